#ifndef MSAT_NN_MODEL_H_
#define MSAT_NN_MODEL_H_

#include <optional>
#include <string>
#include <vector>

#include "nn/attention.h"
#include "nn/encoder.h"

namespace msat {

enum class Topology { kSingleSpeech, kSingleText, kMultiSource, kCoupledEnsemble };

std::string topology_name(Topology t);
Topology topology_from_name(const std::string& name);

struct ModelWidths {
  int enc_l1 = 64;       // speech layer 1, per direction
  int enc_l2 = 128;      // speech layer 2
  int enc_out = 512;     // speech layer 3 == E
  int text_hidden = 256; // text encoder, per direction
  int dec_hidden = 512;
  int attn = 512;
  int embed = 32;

  // Scaled-down preset for quick CPU experiments; same shape constraints.
  static ModelWidths tiny();
};

struct ModelConfig {
  Topology topology = Topology::kMultiSource;
  // present iff topology == kMultiSource
  std::optional<AttentionMode> attention_mode = AttentionMode::kShared;
  ModelWidths widths;
  int src_vocab = 0;
  int tgt_vocab = 0;
  int feat_dim = FeatureMatrix::kWidth;

  void validate() const;
  bool uses_speech() const { return topology != Topology::kSingleText; }
  bool uses_text() const { return topology != Topology::kSingleSpeech; }
};

// One parallel training/decoding example, already token-encoded.
struct Utterance {
  std::string id;
  FeatureMatrix features;
  int n_frames = -1;  // -1 means every row; smaller masks padding frames
  std::vector<int> translation;    // BOS ... EOS
  std::vector<int> transcription;  // characters then EOS
};

// Per-step attention weights over each source; src2 stays empty for
// single-source topologies.
struct AttentionRecord {
  std::vector<std::vector<double>> src1;
  std::vector<std::vector<double>> src2;
};

class Model {
 public:
  // Registers fresh parameters when init_rng is given, otherwise resolves
  // (and shape-checks) an existing store, e.g. a loaded checkpoint.
  Model(const ModelConfig& cfg, ParameterStore& store, Rng* init_rng);

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& store() const { return *store_; }
  int num_sources() const;

  struct Encoded {
    std::vector<AttendedSource> sources;
  };
  // Encodes whatever sources the topology needs. Dropout applies only in
  // training mode (rng required then).
  Encoded encode(Tape& tape, const Utterance& utt, bool training, double dropout,
                 Rng* rng) const;

  struct State {
    std::vector<LstmState> branch;
  };
  State initial_state(Tape& tape, const Encoded& enc) const;

  struct StepResult {
    Var logits;                    // ensemble: mean of branch logits
    std::vector<Var> branch_logits;
    State next;
    std::vector<std::vector<double>> att_rows;  // one weight row per source
  };
  StepResult step(Tape& tape, const Encoded& enc, const State& state,
                  int prev_token, bool training, double dropout, Rng* rng) const;

  struct NllResult {
    Var loss;  // summed over tokens (gradient objective)
    int n_tokens = 0;
    std::vector<double> token_logprobs;  // log P(reference_k), one per step
    AttentionRecord attention;
  };
  // Teacher-forced negative log-likelihood of utt.transcription.
  NllResult sequence_nll(Tape& tape, const Utterance& utt, bool training,
                         double dropout, Rng* rng) const;

 private:
  struct Branch {
    bool speech = false;
    bool text = false;
    SpeechEncoderParams enc_speech;
    TextEncoderParams enc_text;
    AttentionParams attn;
    LstmParams dec;
    Tensor* dec_embed = nullptr;
    Tensor* init_w = nullptr;
    Tensor* init_b = nullptr;
    Tensor* out_w = nullptr;
    Tensor* out_b = nullptr;
    int first_source = 0;  // index into Encoded.sources
  };

  void build_branch(Branch& b, const std::string& dec_prefix,
                    const std::string& attn_prefix, const std::string& out_prefix,
                    Rng* rng);

  ModelConfig cfg_;
  ParameterStore* store_;
  std::vector<Branch> branches_;
};

// Sidecar metadata stored next to the binary checkpoint: configuration,
// vocabularies, and the feature normalizer.
struct ModelMeta {
  ModelConfig config;
  std::vector<std::string> src_tokens;  // without the reserved four
  std::vector<std::string> tgt_tokens;
  std::vector<double> feat_mean;
  std::vector<double> feat_std;

  void save(const std::string& path) const;
  static ModelMeta load(const std::string& path);
};

// model.params -> model.meta.json
std::string meta_path_for(const std::string& params_path);

}  // namespace msat

#endif  // MSAT_NN_MODEL_H_

#ifndef MSAT_TRAIN_TRAINER_H_
#define MSAT_TRAIN_TRAINER_H_

#include <string>
#include <vector>

#include "core/adam.h"
#include "corpus/manifest.h"
#include "corpus/vocab.h"
#include "frontend/normalizer.h"
#include "nn/model.h"

namespace msat {

struct TrainConfig {
  double lr = 2e-4;
  double dropout = 0.2;
  int max_epochs = 300;
  int batch_size = 16;
  // evaluations without a strict dev improvement before stopping; 0 stops
  // at the first non-improving evaluation
  int patience = 25;
  int eval_every = 1;  // epochs between dev evaluations
  uint64_t seed = 1;
  bool verbose = false;

  AdamConfig adam() const {
    AdamConfig a;
    a.lr = lr;
    return a;
  }
};

struct TrainLogRecord {
  int epoch = 0;
  double train_loss_per_token = 0.0;
  bool evaluated = false;
  double dev_cer = 0.0;
  double seconds = 0.0;  // wall clock; excluded from determinism comparisons
  bool best = false;
};

struct TrainResult {
  std::vector<TrainLogRecord> log;
  double best_dev_cer = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  std::string params_path;
  std::string meta_path;
  std::string log_path;
};

// Loaded, token-encoded, normalized utterances plus reference strings.
struct Dataset {
  std::vector<Utterance> utts;
  std::vector<std::string> references;  // transcription text per utterance
};

// Reads features (or audio, through the PLP frontend), encodes text fields
// with the given vocabularies, and optionally normalizes.
Dataset load_dataset(const Manifest& manifest, const Vocabulary& src_vocab,
                     const Vocabulary& tgt_vocab, const FeatureNormalizer* norm,
                     bool need_speech, bool need_targets);

// The training loop: seeded shuffling, summed-NLL batches, Adam steps,
// periodic greedy dev decoding, and best-on-dev checkpointing. Writes
// <out_prefix>.params / .meta.json / .log.jsonl and returns the log.
TrainResult train_model(const ModelConfig& base_config, const Manifest& train,
                        const Manifest& dev, const TrainConfig& cfg,
                        const std::string& out_prefix);

// Loads the checkpoint pair written by train_model.
struct LoadedModel {
  ModelMeta meta;
  ParameterStore store;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
  FeatureNormalizer normalizer;
};
LoadedModel load_model(const std::string& params_path);

}  // namespace msat

#endif  // MSAT_TRAIN_TRAINER_H_

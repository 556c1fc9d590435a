#ifndef MSAT_NN_ENCODER_H_
#define MSAT_NN_ENCODER_H_

#include <utility>
#include <vector>

#include "frontend/plp.h"
#include "nn/lstm.h"

namespace msat {

enum class SourceKind { kSpeech, kText };

// A sequence of encoder output states, one column per position.
struct EncoderStates {
  SourceKind kind = SourceKind::kSpeech;
  int length = 0;  // L
  int width = 0;   // E
  Var states;      // E x L
  Var final_state;  // E x 1, used for decoder state init
  // speech only: encoder position -> (first, last) covered input frames
  std::vector<std::pair<int, int>> position_map;
};

// Frame spans owned by each top-layer position after the two pyramid
// halvings: position j starts at frame 4j and owns up to 4 frames.
std::vector<std::pair<int, int>> speech_position_map(int t_frames);

// Pyramid: bidirectional layer over every frame, then two unidirectional
// layers that each read every second output of the layer below.
struct SpeechEncoderParams {
  LstmParams l1_fwd, l1_bwd, l2, l3;
};

struct SpeechEncoderWidths {
  int l1 = 64;   // per direction
  int l2 = 128;
  int out = 512;  // layer 3 == E
};

SpeechEncoderParams register_speech_encoder(ParameterStore& store,
                                            const std::string& prefix,
                                            const SpeechEncoderWidths& w,
                                            int feat_dim, Rng& rng);
SpeechEncoderParams lookup_speech_encoder(ParameterStore& store,
                                          const std::string& prefix,
                                          const SpeechEncoderWidths& w,
                                          int feat_dim);

// n_frames limits the read to a prefix of the matrix so padded frames
// cannot influence the encoding; pass -1 for all frames.
EncoderStates encode_speech(Tape& tape, const SpeechEncoderParams& p,
                            const FeatureMatrix& feats, int n_frames,
                            double dropout_rate, bool training, Rng* rng);

struct TextEncoderParams {
  Tensor* embed = nullptr;  // vocab x embed_dim
  LstmParams fwd, bwd;
};

TextEncoderParams register_text_encoder(ParameterStore& store,
                                        const std::string& enc_prefix,
                                        const std::string& embed_name,
                                        int vocab, int embed_dim, int hidden,
                                        Rng& rng);
TextEncoderParams lookup_text_encoder(ParameterStore& store,
                                      const std::string& enc_prefix,
                                      const std::string& embed_name, int vocab,
                                      int embed_dim, int hidden);

EncoderStates encode_text(Tape& tape, const TextEncoderParams& p,
                          const std::vector<int>& tokens, double dropout_rate,
                          bool training, Rng* rng);

}  // namespace msat

#endif  // MSAT_NN_ENCODER_H_

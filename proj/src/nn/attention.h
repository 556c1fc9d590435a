#ifndef MSAT_NN_ATTENTION_H_
#define MSAT_NN_ATTENTION_H_

#include <string>

#include "nn/encoder.h"

namespace msat {

// Parameter sharing across the two mechanisms of a multi-source model:
//   untied - per-source v, W^s, W^h (6 blocks)
//   tied   - shared v and W^s, per-source W^h (4 blocks)
//   shared - one mechanism for both sources (3 blocks)
enum class AttentionMode { kSingle, kUntied, kTied, kShared };

std::string attention_mode_name(AttentionMode m);
AttentionMode attention_mode_from_name(const std::string& name);

struct AttentionParams {
  AttentionMode mode = AttentionMode::kSingle;
  int width = 0;  // A
  struct Blocks {
    Tensor* v = nullptr;    // 1 x 2A
    Tensor* w_s = nullptr;  // A x D_dec
    Tensor* w_h = nullptr;  // A x E_source
  };
  Blocks src[2];  // resolved per source; aliases under tied/shared
};

// enc_width2 is ignored in single mode. Shared mode requires equal encoder
// output widths and is rejected otherwise.
AttentionParams register_attention(ParameterStore& store, const std::string& prefix,
                                   AttentionMode mode, int width, int dec_width,
                                   int enc_width1, int enc_width2, Rng& rng);
AttentionParams lookup_attention(ParameterStore& store, const std::string& prefix,
                                 AttentionMode mode, int width, int dec_width,
                                 int enc_width1, int enc_width2);

// Per-utterance precomputation: the source projection W^h h_n for every
// position at once. Scoring against it is equivalent to projecting
// per position (asserted by test).
struct AttendedSource {
  EncoderStates enc;
  Var proj;  // A x L
};

AttendedSource prepare_source(Tape& tape, const AttentionParams& p,
                              const EncoderStates& enc, int which);

struct AttendResult {
  Var weights;  // 1 x L, nonnegative, sums to 1
  Var context;  // E x 1
};

// score_n = v . tanh([W^s s ; W^h h_n]); weights = softmax over positions;
// context = sum_n weights_n h_n.
AttendResult attend(Tape& tape, const AttentionParams& p, Var dec_state,
                    const AttendedSource& src, int which);

// Concatenated multi-source context c = [ctx1 ; ctx2], width E1 + E2.
Var joint_context(Tape& tape, const AttendResult& a1, const AttendResult& a2);

}  // namespace msat

#endif  // MSAT_NN_ATTENTION_H_

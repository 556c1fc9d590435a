#ifndef MSAT_NN_LSTM_H_
#define MSAT_NN_LSTM_H_

#include <string>

#include "core/store.h"
#include "core/tape.h"

namespace msat {

// One cell: a fused weight block W [4H x (I+H)] over [x; h_prev] and bias
// b [4H], gate rows ordered input, forget, output, candidate. Forget-gate
// bias starts at 1, everything else at 0.
struct LstmParams {
  Tensor* w = nullptr;
  Tensor* b = nullptr;
  int input_width = 0;
  int hidden_width = 0;
};

LstmParams register_lstm(ParameterStore& store, const std::string& prefix,
                         int input_width, int hidden_width, Rng& rng);
// Resolves an already-populated store (e.g. a loaded checkpoint) and
// validates shapes against the expected widths.
LstmParams lookup_lstm(ParameterStore& store, const std::string& prefix,
                       int input_width, int hidden_width);

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_zero_state(Tape& tape, int hidden_width);
LstmState lstm_step(Tape& tape, const LstmParams& p, const LstmState& prev, Var x);

}  // namespace msat

#endif  // MSAT_NN_LSTM_H_

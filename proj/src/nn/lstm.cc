#include "nn/lstm.h"

#include "util/errors.h"

namespace msat {

LstmParams register_lstm(ParameterStore& store, const std::string& prefix,
                         int input_width, int hidden_width, Rng& rng) {
  LstmParams p;
  p.input_width = input_width;
  p.hidden_width = hidden_width;
  p.w = &store.add(prefix + ".w", 4 * hidden_width, input_width + hidden_width);
  p.b = &store.add(prefix + ".b", 4 * hidden_width, 1);
  init_glorot(*p.w, rng);
  for (int i = hidden_width; i < 2 * hidden_width; ++i) p.b->v[i] = 1.0;
  return p;
}

LstmParams lookup_lstm(ParameterStore& store, const std::string& prefix,
                       int input_width, int hidden_width) {
  LstmParams p;
  p.input_width = input_width;
  p.hidden_width = hidden_width;
  p.w = &store.get(prefix + ".w");
  p.b = &store.get(prefix + ".b");
  if (p.w->rows != 4 * hidden_width || p.w->cols != input_width + hidden_width ||
      p.b->rows != 4 * hidden_width || p.b->cols != 1)
    throw ConfigError("lstm '" + prefix + "': stored shapes do not match widths " +
                      std::to_string(input_width) + "/" + std::to_string(hidden_width));
  return p;
}

LstmState lstm_zero_state(Tape& tape, int hidden_width) {
  return {tape.zeros(hidden_width, 1), tape.zeros(hidden_width, 1)};
}

LstmState lstm_step(Tape& tape, const LstmParams& p, const LstmState& prev, Var x) {
  int h = p.hidden_width;
  Var xh = tape.concat(x, prev.h, 0);
  Var z = tape.add(tape.matmul(tape.param(*p.w), xh), tape.param(*p.b));
  Var gi = tape.sigmoid(tape.slice_rows(z, 0, h));
  Var gf = tape.sigmoid(tape.slice_rows(z, h, 2 * h));
  Var go = tape.sigmoid(tape.slice_rows(z, 2 * h, 3 * h));
  Var gc = tape.tanh(tape.slice_rows(z, 3 * h, 4 * h));
  Var c = tape.add(tape.mul(gf, prev.c), tape.mul(gi, gc));
  Var out = tape.mul(go, tape.tanh(c));
  return {out, c};
}

}  // namespace msat

#include "nn/encoder.h"

#include "util/errors.h"

namespace msat {

std::vector<std::pair<int, int>> speech_position_map(int t_frames) {
  int p2 = (t_frames + 1) / 2;
  int p3 = (p2 + 1) / 2;
  std::vector<std::pair<int, int>> map(p3);
  for (int j = 0; j < p3; ++j)
    map[j] = {4 * j, std::min(4 * j + 3, t_frames - 1)};
  return map;
}

SpeechEncoderParams register_speech_encoder(ParameterStore& store,
                                            const std::string& prefix,
                                            const SpeechEncoderWidths& w,
                                            int feat_dim, Rng& rng) {
  SpeechEncoderParams p;
  p.l1_fwd = register_lstm(store, prefix + ".layer1.fwd", feat_dim, w.l1, rng);
  p.l1_bwd = register_lstm(store, prefix + ".layer1.bwd", feat_dim, w.l1, rng);
  p.l2 = register_lstm(store, prefix + ".layer2", 2 * w.l1, w.l2, rng);
  p.l3 = register_lstm(store, prefix + ".layer3", w.l2, w.out, rng);
  return p;
}

SpeechEncoderParams lookup_speech_encoder(ParameterStore& store,
                                          const std::string& prefix,
                                          const SpeechEncoderWidths& w,
                                          int feat_dim) {
  SpeechEncoderParams p;
  p.l1_fwd = lookup_lstm(store, prefix + ".layer1.fwd", feat_dim, w.l1);
  p.l1_bwd = lookup_lstm(store, prefix + ".layer1.bwd", feat_dim, w.l1);
  p.l2 = lookup_lstm(store, prefix + ".layer2", 2 * w.l1, w.l2);
  p.l3 = lookup_lstm(store, prefix + ".layer3", w.l2, w.out);
  return p;
}

namespace {

// Runs a cell over a sequence, optionally reversed.
std::vector<Var> run_lstm(Tape& tape, const LstmParams& p,
                          const std::vector<Var>& inputs, bool reversed) {
  std::vector<Var> outputs(inputs.size());
  LstmState state = lstm_zero_state(tape, p.hidden_width);
  for (size_t k = 0; k < inputs.size(); ++k) {
    size_t t = reversed ? inputs.size() - 1 - k : k;
    state = lstm_step(tape, p, state, inputs[t]);
    outputs[t] = state.h;
  }
  return outputs;
}

std::vector<Var> maybe_dropout(Tape& tape, std::vector<Var> xs, double rate,
                               bool training, Rng* rng) {
  if (!training || rate == 0.0) return xs;
  for (Var& x : xs) x = tape.dropout(x, rate, training, *rng);
  return xs;
}

std::vector<Var> every_second(const std::vector<Var>& xs) {
  std::vector<Var> out;
  out.reserve((xs.size() + 1) / 2);
  for (size_t i = 0; i < xs.size(); i += 2) out.push_back(xs[i]);
  return out;
}

}  // namespace

EncoderStates encode_speech(Tape& tape, const SpeechEncoderParams& p,
                            const FeatureMatrix& feats, int n_frames,
                            double dropout_rate, bool training, Rng* rng) {
  int t_total = n_frames < 0 ? feats.frames : n_frames;
  if (t_total < 1 || t_total > feats.frames)
    throw InputError("encode_speech: bad frame count " + std::to_string(t_total));

  std::vector<Var> frames(t_total);
  for (int t = 0; t < t_total; ++t)
    frames[t] = tape.constant(feats.width, 1,
                              feats.data.data() + static_cast<size_t>(t) * feats.width);

  std::vector<Var> fwd = run_lstm(tape, p.l1_fwd, frames, false);
  std::vector<Var> bwd = run_lstm(tape, p.l1_bwd, frames, true);
  std::vector<Var> l1(t_total);
  for (int t = 0; t < t_total; ++t) l1[t] = tape.concat(fwd[t], bwd[t], 0);

  // dropout sits on the non-recurrent connections between layers
  std::vector<Var> l2_in =
      maybe_dropout(tape, every_second(l1), dropout_rate, training, rng);
  std::vector<Var> l2 = run_lstm(tape, p.l2, l2_in, false);
  std::vector<Var> l3_in =
      maybe_dropout(tape, every_second(l2), dropout_rate, training, rng);
  std::vector<Var> l3 = run_lstm(tape, p.l3, l3_in, false);

  EncoderStates out;
  out.kind = SourceKind::kSpeech;
  out.length = static_cast<int>(l3.size());
  out.width = p.l3.hidden_width;
  out.states = tape.hstack(l3);
  out.final_state = l3.back();
  out.position_map = speech_position_map(t_total);
  return out;
}

TextEncoderParams register_text_encoder(ParameterStore& store,
                                        const std::string& enc_prefix,
                                        const std::string& embed_name,
                                        int vocab, int embed_dim, int hidden,
                                        Rng& rng) {
  TextEncoderParams p;
  p.embed = &store.add(embed_name, vocab, embed_dim);
  init_glorot(*p.embed, rng);
  p.fwd = register_lstm(store, enc_prefix + ".fwd", embed_dim, hidden, rng);
  p.bwd = register_lstm(store, enc_prefix + ".bwd", embed_dim, hidden, rng);
  return p;
}

TextEncoderParams lookup_text_encoder(ParameterStore& store,
                                      const std::string& enc_prefix,
                                      const std::string& embed_name, int vocab,
                                      int embed_dim, int hidden) {
  TextEncoderParams p;
  p.embed = &store.get(embed_name);
  if (p.embed->rows != vocab || p.embed->cols != embed_dim)
    throw ConfigError("text embedding '" + embed_name + "' has shape " +
                      shape_str(p.embed->rows, p.embed->cols) + ", expected " +
                      shape_str(vocab, embed_dim));
  p.fwd = lookup_lstm(store, enc_prefix + ".fwd", embed_dim, hidden);
  p.bwd = lookup_lstm(store, enc_prefix + ".bwd", embed_dim, hidden);
  return p;
}

EncoderStates encode_text(Tape& tape, const TextEncoderParams& p,
                          const std::vector<int>& tokens, double dropout_rate,
                          bool training, Rng* rng) {
  if (tokens.empty()) throw InputError("encode_text: empty token sequence");
  Var table = tape.param(*p.embed);
  std::vector<Var> embedded(tokens.size());
  for (size_t m = 0; m < tokens.size(); ++m) {
    if (tokens[m] < 0 || tokens[m] >= p.embed->rows)
      throw InputError("encode_text: token id " + std::to_string(tokens[m]) +
                       " outside vocabulary of " + std::to_string(p.embed->rows));
    embedded[m] = tape.embedding_lookup(table, tokens[m]);
  }
  embedded = maybe_dropout(tape, std::move(embedded), dropout_rate, training, rng);

  std::vector<Var> fwd = run_lstm(tape, p.fwd, embedded, false);
  std::vector<Var> bwd = run_lstm(tape, p.bwd, embedded, true);
  std::vector<Var> states(tokens.size());
  for (size_t m = 0; m < tokens.size(); ++m)
    states[m] = tape.concat(fwd[m], bwd[m], 0);

  EncoderStates out;
  out.kind = SourceKind::kText;
  out.length = static_cast<int>(tokens.size());
  out.width = 2 * p.fwd.hidden_width;
  out.states = tape.hstack(states);
  out.final_state = tape.concat(fwd.back(), bwd.front(), 0);
  return out;
}

}  // namespace msat

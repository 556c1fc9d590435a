#include "nn/attention.h"

#include "util/errors.h"

namespace msat {

std::string attention_mode_name(AttentionMode m) {
  switch (m) {
    case AttentionMode::kSingle: return "single";
    case AttentionMode::kUntied: return "untied";
    case AttentionMode::kTied: return "tied";
    case AttentionMode::kShared: return "shared";
  }
  return "?";
}

AttentionMode attention_mode_from_name(const std::string& name) {
  if (name == "single") return AttentionMode::kSingle;
  if (name == "untied") return AttentionMode::kUntied;
  if (name == "tied") return AttentionMode::kTied;
  if (name == "shared") return AttentionMode::kShared;
  throw ConfigError("unknown attention mode '" + name + "'");
}

namespace {

AttentionParams resolve(ParameterStore& store, const std::string& prefix,
                        AttentionMode mode, int width, int dec_width,
                        int enc_width1, int enc_width2, Rng* rng) {
  AttentionParams p;
  p.mode = mode;
  p.width = width;

  auto block = [&](const std::string& name, int rows, int cols) -> Tensor* {
    if (rng) {
      Tensor& t = store.add(name, rows, cols);
      init_glorot(t, *rng);
      return &t;
    }
    Tensor& t = store.get(name);
    if (t.rows != rows || t.cols != cols)
      throw ConfigError("attention block '" + name + "' has shape " +
                        shape_str(t.rows, t.cols) + ", expected " +
                        shape_str(rows, cols));
    return &t;
  };

  switch (mode) {
    case AttentionMode::kSingle: {
      p.src[0].v = block(prefix + ".v", 1, 2 * width);
      p.src[0].w_s = block(prefix + ".w_s", width, dec_width);
      p.src[0].w_h = block(prefix + ".w_h", width, enc_width1);
      p.src[1] = p.src[0];
      break;
    }
    case AttentionMode::kUntied: {
      p.src[0].v = block(prefix + ".src1.v", 1, 2 * width);
      p.src[0].w_s = block(prefix + ".src1.w_s", width, dec_width);
      p.src[0].w_h = block(prefix + ".src1.w_h", width, enc_width1);
      p.src[1].v = block(prefix + ".src2.v", 1, 2 * width);
      p.src[1].w_s = block(prefix + ".src2.w_s", width, dec_width);
      p.src[1].w_h = block(prefix + ".src2.w_h", width, enc_width2);
      break;
    }
    case AttentionMode::kTied: {
      Tensor* v = block(prefix + ".v", 1, 2 * width);
      Tensor* w_s = block(prefix + ".w_s", width, dec_width);
      p.src[0] = {v, w_s, block(prefix + ".src1.w_h", width, enc_width1)};
      p.src[1] = {v, w_s, block(prefix + ".src2.w_h", width, enc_width2)};
      break;
    }
    case AttentionMode::kShared: {
      if (enc_width1 != enc_width2)
        throw ConfigError("shared attention needs equal encoder widths, got " +
                          std::to_string(enc_width1) + " and " +
                          std::to_string(enc_width2));
      p.src[0].v = block(prefix + ".v", 1, 2 * width);
      p.src[0].w_s = block(prefix + ".w_s", width, dec_width);
      p.src[0].w_h = block(prefix + ".w_h", width, enc_width1);
      p.src[1] = p.src[0];
      break;
    }
  }
  return p;
}

}  // namespace

AttentionParams register_attention(ParameterStore& store, const std::string& prefix,
                                   AttentionMode mode, int width, int dec_width,
                                   int enc_width1, int enc_width2, Rng& rng) {
  return resolve(store, prefix, mode, width, dec_width, enc_width1, enc_width2, &rng);
}

AttentionParams lookup_attention(ParameterStore& store, const std::string& prefix,
                                 AttentionMode mode, int width, int dec_width,
                                 int enc_width1, int enc_width2) {
  return resolve(store, prefix, mode, width, dec_width, enc_width1, enc_width2,
                 nullptr);
}

AttendedSource prepare_source(Tape& tape, const AttentionParams& p,
                              const EncoderStates& enc, int which) {
  AttendedSource src;
  src.enc = enc;
  src.proj = tape.matmul(tape.param(*p.src[which].w_h), enc.states);
  return src;
}

AttendResult attend(Tape& tape, const AttentionParams& p, Var dec_state,
                    const AttendedSource& src, int which) {
  if (src.enc.length < 1) throw InputError("attend: empty source");
  const AttentionParams::Blocks& b = p.src[which];
  Var state_proj = tape.matmul(tape.param(*b.w_s), dec_state);  // A x 1
  Var stacked = tape.concat(tape.tile_cols(state_proj, src.enc.length), src.proj, 0);
  Var scores = tape.matmul(tape.param(*b.v), tape.tanh(stacked));  // 1 x L
  AttendResult r;
  r.weights = tape.softmax(scores);
  r.context = tape.matmul(src.enc.states, tape.reshape(r.weights, src.enc.length, 1));
  return r;
}

Var joint_context(Tape& tape, const AttendResult& a1, const AttendResult& a2) {
  return tape.concat(a1.context, a2.context, 0);
}

}  // namespace msat

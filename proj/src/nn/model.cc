#include "nn/model.h"

#include <fstream>

#include <json.hpp>

#include "corpus/vocab.h"
#include "util/errors.h"

namespace msat {

using nlohmann::json;

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::kSingleSpeech: return "single-speech";
    case Topology::kSingleText: return "single-text";
    case Topology::kMultiSource: return "multi-source";
    case Topology::kCoupledEnsemble: return "coupled-ensemble";
  }
  return "?";
}

Topology topology_from_name(const std::string& name) {
  if (name == "single-speech") return Topology::kSingleSpeech;
  if (name == "single-text") return Topology::kSingleText;
  if (name == "multi-source") return Topology::kMultiSource;
  if (name == "coupled-ensemble") return Topology::kCoupledEnsemble;
  throw ConfigError("unknown topology '" + name + "'");
}

ModelWidths ModelWidths::tiny() {
  ModelWidths w;
  w.enc_l1 = 16;
  w.enc_l2 = 32;
  w.enc_out = 64;
  w.text_hidden = 32;
  w.dec_hidden = 64;
  w.attn = 64;
  w.embed = 16;
  return w;
}

void ModelConfig::validate() const {
  if (topology == Topology::kMultiSource) {
    if (!attention_mode || *attention_mode == AttentionMode::kSingle)
      throw ConfigError("multi-source topology needs an attention mode "
                        "(untied, tied or shared)");
    if (2 * widths.text_hidden != widths.enc_out)
      throw ConfigError("multi-source encoders must agree on output width: "
                        "speech " + std::to_string(widths.enc_out) + " vs text " +
                        std::to_string(2 * widths.text_hidden));
  } else if (attention_mode && *attention_mode != AttentionMode::kSingle) {
    throw ConfigError("attention mode is only meaningful for multi-source");
  }
  if (tgt_vocab <= Vocabulary::kUnk)
    throw ConfigError("target vocabulary too small");
  if (uses_text() && src_vocab <= Vocabulary::kUnk)
    throw ConfigError("source vocabulary too small");
}

int Model::num_sources() const {
  return (cfg_.topology == Topology::kMultiSource ||
          cfg_.topology == Topology::kCoupledEnsemble)
             ? 2
             : 1;
}

void Model::build_branch(Branch& b, const std::string& dec_prefix,
                         const std::string& attn_prefix,
                         const std::string& out_prefix, Rng* rng) {
  const ModelWidths& w = cfg_.widths;
  int enc1 = b.speech ? w.enc_out : 2 * w.text_hidden;
  int enc2 = 2 * w.text_hidden;  // second source is always text
  AttentionMode mode =
      (b.speech && b.text) ? *cfg_.attention_mode : AttentionMode::kSingle;
  int ctx_width = b.speech && b.text ? enc1 + enc2 : enc1;

  auto tensor = [&](const std::string& name, int rows, int cols,
                    bool glorot = true) -> Tensor* {
    if (rng) {
      Tensor& t = store_->add(name, rows, cols);
      if (glorot) init_glorot(t, *rng);
      return &t;
    }
    Tensor& t = store_->get(name);
    if (t.rows != rows || t.cols != cols)
      throw ConfigError("parameter '" + name + "' has shape " +
                        shape_str(t.rows, t.cols) + ", expected " +
                        shape_str(rows, cols));
    return &t;
  };

  if (rng)
    b.attn = register_attention(*store_, attn_prefix, mode, w.attn, w.dec_hidden,
                                enc1, enc2, *rng);
  else
    b.attn = lookup_attention(*store_, attn_prefix, mode, w.attn, w.dec_hidden,
                              enc1, enc2);

  b.dec_embed = tensor(dec_prefix + ".embed", cfg_.tgt_vocab, w.embed);
  b.dec = rng ? register_lstm(*store_, dec_prefix, w.embed + ctx_width,
                              w.dec_hidden, *rng)
              : lookup_lstm(*store_, dec_prefix, w.embed + ctx_width, w.dec_hidden);
  b.init_w = tensor(dec_prefix + ".init_w", w.dec_hidden, enc1);
  b.init_b = tensor(dec_prefix + ".init_b", w.dec_hidden, 1, false);
  b.out_w = tensor(out_prefix + ".w", cfg_.tgt_vocab, w.dec_hidden);
  b.out_b = tensor(out_prefix + ".b", cfg_.tgt_vocab, 1, false);
}

Model::Model(const ModelConfig& cfg, ParameterStore& store, Rng* init_rng)
    : cfg_(cfg), store_(&store) {
  cfg_.validate();
  const ModelWidths& w = cfg_.widths;
  SpeechEncoderWidths sw{w.enc_l1, w.enc_l2, w.enc_out};

  auto speech_params = [&](const std::string& prefix) {
    return init_rng
               ? register_speech_encoder(*store_, prefix, sw, cfg_.feat_dim, *init_rng)
               : lookup_speech_encoder(*store_, prefix, sw, cfg_.feat_dim);
  };
  auto text_params = [&]() {
    return init_rng ? register_text_encoder(*store_, "enc_text", "embed_src",
                                            cfg_.src_vocab, w.embed, w.text_hidden,
                                            *init_rng)
                    : lookup_text_encoder(*store_, "enc_text", "embed_src",
                                          cfg_.src_vocab, w.embed, w.text_hidden);
  };

  switch (cfg_.topology) {
    case Topology::kSingleSpeech: {
      Branch b;
      b.speech = true;
      b.enc_speech = speech_params("enc_speech");
      build_branch(b, "dec", "attn", "out", init_rng);
      branches_.push_back(b);
      break;
    }
    case Topology::kSingleText: {
      Branch b;
      b.text = true;
      b.enc_text = text_params();
      build_branch(b, "dec", "attn", "out", init_rng);
      branches_.push_back(b);
      break;
    }
    case Topology::kMultiSource: {
      Branch b;
      b.speech = b.text = true;
      b.enc_speech = speech_params("enc_speech");
      b.enc_text = text_params();
      build_branch(b, "dec", "attn", "out", init_rng);
      branches_.push_back(b);
      break;
    }
    case Topology::kCoupledEnsemble: {
      Branch speech;
      speech.speech = true;
      speech.first_source = 0;
      speech.enc_speech = speech_params("enc_speech");
      build_branch(speech, "dec1", "attn1", "out1", init_rng);
      branches_.push_back(speech);
      Branch text;
      text.text = true;
      text.first_source = 1;
      text.enc_text = text_params();
      build_branch(text, "dec2", "attn2", "out2", init_rng);
      branches_.push_back(text);
      break;
    }
  }
}

Model::Encoded Model::encode(Tape& tape, const Utterance& utt, bool training,
                             double dropout, Rng* rng) const {
  Encoded enc;
  switch (cfg_.topology) {
    case Topology::kSingleSpeech: {
      EncoderStates s = encode_speech(tape, branches_[0].enc_speech, utt.features,
                                      utt.n_frames, dropout, training, rng);
      enc.sources.push_back(prepare_source(tape, branches_[0].attn, s, 0));
      break;
    }
    case Topology::kSingleText: {
      EncoderStates s = encode_text(tape, branches_[0].enc_text, utt.translation,
                                    dropout, training, rng);
      enc.sources.push_back(prepare_source(tape, branches_[0].attn, s, 0));
      break;
    }
    case Topology::kMultiSource: {
      EncoderStates sp = encode_speech(tape, branches_[0].enc_speech, utt.features,
                                       utt.n_frames, dropout, training, rng);
      EncoderStates tx = encode_text(tape, branches_[0].enc_text, utt.translation,
                                     dropout, training, rng);
      enc.sources.push_back(prepare_source(tape, branches_[0].attn, sp, 0));
      enc.sources.push_back(prepare_source(tape, branches_[0].attn, tx, 1));
      break;
    }
    case Topology::kCoupledEnsemble: {
      EncoderStates sp = encode_speech(tape, branches_[0].enc_speech, utt.features,
                                       utt.n_frames, dropout, training, rng);
      EncoderStates tx = encode_text(tape, branches_[1].enc_text, utt.translation,
                                     dropout, training, rng);
      enc.sources.push_back(prepare_source(tape, branches_[0].attn, sp, 0));
      enc.sources.push_back(prepare_source(tape, branches_[1].attn, tx, 0));
      break;
    }
  }
  return enc;
}

Model::State Model::initial_state(Tape& tape, const Encoded& enc) const {
  State st;
  for (size_t bi = 0; bi < branches_.size(); ++bi) {
    const Branch& b = branches_[bi];
    Var final_state = enc.sources[b.first_source].enc.final_state;
    Var h0 = tape.tanh(tape.add(tape.matmul(tape.param(*b.init_w), final_state),
                                tape.param(*b.init_b)));
    st.branch.push_back({h0, tape.zeros(cfg_.widths.dec_hidden, 1)});
  }
  return st;
}

Model::StepResult Model::step(Tape& tape, const Encoded& enc, const State& state,
                              int prev_token, bool training, double dropout,
                              Rng* rng) const {
  StepResult out;
  out.att_rows.resize(enc.sources.size());
  for (size_t bi = 0; bi < branches_.size(); ++bi) {
    const Branch& b = branches_[bi];
    Var s_prev = state.branch[bi].h;

    Var ctx;
    if (b.speech && b.text) {
      AttendResult a1 = attend(tape, b.attn, s_prev, enc.sources[0], 0);
      AttendResult a2 = attend(tape, b.attn, s_prev, enc.sources[1], 1);
      ctx = joint_context(tape, a1, a2);
      auto w1 = tape.value(a1.weights);
      auto w2 = tape.value(a2.weights);
      out.att_rows[0].assign(w1.begin(), w1.end());
      out.att_rows[1].assign(w2.begin(), w2.end());
    } else {
      AttendResult a = attend(tape, b.attn, s_prev, enc.sources[b.first_source], 0);
      ctx = a.context;
      auto wv = tape.value(a.weights);
      out.att_rows[b.first_source].assign(wv.begin(), wv.end());
    }

    Var prev_embed = tape.embedding_lookup(tape.param(*b.dec_embed), prev_token);
    Var input = tape.concat(prev_embed, ctx, 0);
    if (training && rng) input = tape.dropout(input, dropout, training, *rng);
    LstmState next = lstm_step(tape, b.dec, state.branch[bi], input);
    out.next.branch.push_back(next);
    Var logits = tape.add(tape.matmul(tape.param(*b.out_w), next.h),
                          tape.param(*b.out_b));
    out.branch_logits.push_back(logits);
  }
  // pre-softmax combination: the ensemble averages branch outputs, never
  // their softmaxes
  out.logits = out.branch_logits.size() == 1
                   ? out.branch_logits[0]
                   : tape.scale(tape.add(out.branch_logits[0], out.branch_logits[1]),
                                0.5);
  return out;
}

Model::NllResult Model::sequence_nll(Tape& tape, const Utterance& utt, bool training,
                                     double dropout, Rng* rng) const {
  if (utt.transcription.empty())
    throw InputError("sequence_nll: empty reference for '" + utt.id + "'");
  if (utt.transcription.back() != Vocabulary::kEos)
    throw InputError("sequence_nll: reference for '" + utt.id +
                     "' does not end with EOS");
  for (int tok : utt.transcription)
    if (tok < 0 || tok >= cfg_.tgt_vocab)
      throw InputError("sequence_nll: token " + std::to_string(tok) +
                       " outside vocabulary in '" + utt.id + "'");

  Encoded enc = encode(tape, utt, training, dropout, rng);
  State state = initial_state(tape, enc);
  NllResult res;
  res.n_tokens = static_cast<int>(utt.transcription.size());
  Var total;
  int prev = Vocabulary::kBos;
  for (int k = 0; k < res.n_tokens; ++k) {
    StepResult sr = step(tape, enc, state, prev, training, dropout, rng);
    Var nll_k = tape.cross_entropy(sr.logits, utt.transcription[k]);
    res.token_logprobs.push_back(-tape.scalar(nll_k));
    total = k == 0 ? nll_k : tape.add(total, nll_k);
    res.attention.src1.push_back(std::move(sr.att_rows[0]));
    if (sr.att_rows.size() > 1)
      res.attention.src2.push_back(std::move(sr.att_rows[1]));
    state = sr.next;
    prev = utt.transcription[k];
  }
  res.loss = total;
  return res;
}

std::string meta_path_for(const std::string& params_path) {
  std::string base = params_path;
  const std::string suffix = ".params";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
    base.resize(base.size() - suffix.size());
  return base + ".meta.json";
}

void ModelMeta::save(const std::string& path) const {
  json j;
  j["topology"] = topology_name(config.topology);
  if (config.attention_mode)
    j["attention_mode"] = attention_mode_name(*config.attention_mode);
  j["widths"] = {{"enc_l1", config.widths.enc_l1},
                 {"enc_l2", config.widths.enc_l2},
                 {"enc_out", config.widths.enc_out},
                 {"text_hidden", config.widths.text_hidden},
                 {"dec_hidden", config.widths.dec_hidden},
                 {"attn", config.widths.attn},
                 {"embed", config.widths.embed}};
  j["feat_dim"] = config.feat_dim;
  j["src_tokens"] = src_tokens;
  j["tgt_tokens"] = tgt_tokens;
  j["feat_mean"] = feat_mean;
  j["feat_std"] = feat_std;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot write model meta: " + path);
  os << j.dump(2) << "\n";
}

ModelMeta ModelMeta::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model meta: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("model meta " + path + ": " + e.what());
  }
  ModelMeta m;
  m.config.topology = topology_from_name(j.at("topology").get<std::string>());
  if (j.contains("attention_mode"))
    m.config.attention_mode =
        attention_mode_from_name(j.at("attention_mode").get<std::string>());
  else
    m.config.attention_mode.reset();
  const json& w = j.at("widths");
  m.config.widths.enc_l1 = w.at("enc_l1").get<int>();
  m.config.widths.enc_l2 = w.at("enc_l2").get<int>();
  m.config.widths.enc_out = w.at("enc_out").get<int>();
  m.config.widths.text_hidden = w.at("text_hidden").get<int>();
  m.config.widths.dec_hidden = w.at("dec_hidden").get<int>();
  m.config.widths.attn = w.at("attn").get<int>();
  m.config.widths.embed = w.at("embed").get<int>();
  m.config.feat_dim = j.at("feat_dim").get<int>();
  m.src_tokens = j.at("src_tokens").get<std::vector<std::string>>();
  m.tgt_tokens = j.at("tgt_tokens").get<std::vector<std::string>>();
  m.feat_mean = j.value("feat_mean", std::vector<double>());
  m.feat_std = j.value("feat_std", std::vector<double>());
  m.config.src_vocab = static_cast<int>(m.src_tokens.size()) + 4;
  m.config.tgt_vocab = static_cast<int>(m.tgt_tokens.size()) + 4;
  return m;
}

}  // namespace msat

#include "decode/search.h"

#include <algorithm>
#include <cmath>

#include "corpus/vocab.h"
#include "util/errors.h"

namespace msat {

double length_penalty(int len, double alpha) {
  return std::pow((5.0 + len) / 6.0, alpha);
}

namespace {

int resolve_max_len(int requested, const Model::Encoded& enc) {
  if (requested > 0) return requested;
  return std::max(8, 3 * enc.sources[0].enc.length);
}

// log P for every vocabulary entry, from raw logit values.
std::vector<double> log_softmax_values(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  double lse = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

void append_att(AttentionRecord& rec, const std::vector<std::vector<double>>& rows) {
  rec.src1.push_back(rows[0]);
  if (rows.size() > 1) rec.src2.push_back(rows[1]);
}

}  // namespace

DecodeResult greedy_decode(const Model& model, const Utterance& utt, int max_len) {
  Tape tape(4096);
  Model::Encoded enc = model.encode(tape, utt, false, 0.0, nullptr);
  int limit = resolve_max_len(max_len, enc);
  Model::State state = model.initial_state(tape, enc);

  DecodeResult res;
  int prev = Vocabulary::kBos;
  for (int k = 0; k < limit; ++k) {
    Model::StepResult sr = model.step(tape, enc, state, prev, false, 0.0, nullptr);
    auto logp = log_softmax_values(tape.value(sr.logits));
    int best = 0;
    for (int i = 1; i < static_cast<int>(logp.size()); ++i)
      if (logp[i] > logp[best]) best = i;
    res.logprob += logp[best];
    res.steps += 1;
    append_att(res.attention, sr.att_rows);
    state = sr.next;
    if (best == Vocabulary::kEos) {
      res.finished = true;
      break;
    }
    res.tokens.push_back(best);
    prev = best;
  }
  res.score = res.logprob / length_penalty(res.steps, 0.8);
  return res;
}

DecodeResult beam_decode(const Model& model, const Utterance& utt,
                         const DecodeConfig& cfg) {
  if (cfg.beam < 1) throw ConfigError("beam size must be at least 1");
  Tape tape(16384);
  Model::Encoded enc = model.encode(tape, utt, false, 0.0, nullptr);
  int limit = resolve_max_len(cfg.max_len, enc);

  struct Hyp {
    std::vector<int> tokens;  // emitted so far, EOS excluded
    double logp = 0.0;
    Model::State state;  // after consuming tokens.back() (or BOS)
    AttentionRecord att;
    int steps = 0;
  };
  std::vector<Hyp> alive(1);
  alive[0].state = model.initial_state(tape, enc);
  std::vector<Hyp> finished;

  for (int k = 0; k < limit && !alive.empty() &&
                  static_cast<int>(finished.size()) < cfg.beam;
       ++k) {
    struct Cand {
      double score;
      size_t hyp;
      int token;
    };
    std::vector<Cand> cands;
    std::vector<Model::StepResult> steps(alive.size());
    for (size_t h = 0; h < alive.size(); ++h) {
      int prev = alive[h].tokens.empty() ? Vocabulary::kBos : alive[h].tokens.back();
      steps[h] = model.step(tape, enc, alive[h].state, prev, false, 0.0, nullptr);
      auto logp = log_softmax_values(tape.value(steps[h].logits));
      for (int t = 0; t < static_cast<int>(logp.size()); ++t)
        cands.push_back({alive[h].logp + logp[t], h, t});
    }
    // ties resolve in favor of earlier hypotheses and lower token ids, the
    // same order greedy argmax uses
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) { return a.score > b.score; });

    std::vector<Hyp> next_alive;
    int take = std::min<int>(cfg.beam, static_cast<int>(cands.size()));
    for (int c = 0; c < take; ++c) {
      const Cand& cand = cands[c];
      Hyp h = alive[cand.hyp];
      h.logp = cand.score;
      h.state = steps[cand.hyp].next;
      h.steps += 1;
      append_att(h.att, steps[cand.hyp].att_rows);
      if (cand.token == Vocabulary::kEos) {
        finished.push_back(std::move(h));
      } else {
        h.tokens.push_back(cand.token);
        next_alive.push_back(std::move(h));
      }
    }
    alive = std::move(next_alive);
  }

  auto normalized = [&](const Hyp& h) {
    return h.logp / length_penalty(h.steps, cfg.alpha);
  };
  const Hyp* best = nullptr;
  bool best_finished = false;
  for (const Hyp& h : finished)
    if (!best || normalized(h) > normalized(*best)) {
      best = &h;
      best_finished = true;
    }
  if (!best) {
    for (const Hyp& h : alive)
      if (!best || normalized(h) > normalized(*best)) best = &h;
  }
  if (!best) throw StateError("beam search produced no hypotheses");

  DecodeResult res;
  res.tokens = best->tokens;
  res.logprob = best->logp;
  res.steps = best->steps;
  res.score = normalized(*best);
  res.finished = best_finished;
  res.attention = best->att;
  return res;
}

ForcedResult forced_decode(const Model& model, const Utterance& utt) {
  Tape tape(8192);
  Model::NllResult nll = model.sequence_nll(tape, utt, false, 0.0, nullptr);
  ForcedResult res;
  res.token_logprobs = nll.token_logprobs;
  for (double lp : res.token_logprobs) res.total_logprob += lp;
  res.attention = std::move(nll.attention);
  return res;
}

}  // namespace msat

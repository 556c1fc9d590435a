#include "eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "util/errors.h"
#include "util/text.h"

namespace msat {

int edit_distance(const std::vector<std::string>& ref,
                  const std::vector<std::string>& hyp) {
  size_t rs = ref.size() + 1, hs = hyp.size() + 1;
  std::vector<int> dist(rs * hs);
  for (size_t i = 0; i < rs; ++i) dist[i * hs] = static_cast<int>(i);
  for (size_t j = 0; j < hs; ++j) dist[j] = static_cast<int>(j);
  for (size_t i = 1; i < rs; ++i)
    for (size_t j = 1; j < hs; ++j)
      dist[i * hs + j] = std::min(
          {dist[(i - 1) * hs + j] + 1, dist[i * hs + j - 1] + 1,
           dist[(i - 1) * hs + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
  return dist[rs * hs - 1];
}

double cer(const std::string& reference, const std::string& hypothesis) {
  std::vector<std::string> r = utf8_chars(reference);
  if (r.empty()) throw InputError("cer: empty reference");
  return static_cast<double>(edit_distance(r, utf8_chars(hypothesis))) / r.size();
}

double wer(const std::string& reference, const std::string& hypothesis) {
  std::vector<std::string> r = split_ws(reference);
  if (r.empty()) throw InputError("wer: empty reference");
  return static_cast<double>(edit_distance(r, split_ws(hypothesis))) / r.size();
}

namespace {

double micro_rate(const std::vector<std::string>& refs,
                  const std::vector<std::string>& hyps, bool words) {
  if (refs.size() != hyps.size())
    throw InputError("corpus metric: " + std::to_string(refs.size()) +
                     " references vs " + std::to_string(hyps.size()) + " hypotheses");
  if (refs.empty()) throw InputError("corpus metric: empty corpus");
  int64_t total_dist = 0, total_len = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    std::vector<std::string> r = words ? split_ws(refs[i]) : utf8_chars(refs[i]);
    std::vector<std::string> h = words ? split_ws(hyps[i]) : utf8_chars(hyps[i]);
    if (r.empty()) throw InputError("corpus metric: empty reference at line " +
                                    std::to_string(i + 1));
    total_dist += edit_distance(r, h);
    total_len += static_cast<int64_t>(r.size());
  }
  return static_cast<double>(total_dist) / static_cast<double>(total_len);
}

}  // namespace

double corpus_cer(const std::vector<std::string>& refs,
                  const std::vector<std::string>& hyps) {
  return micro_rate(refs, hyps, false);
}

double corpus_wer(const std::vector<std::string>& refs,
                  const std::vector<std::string>& hyps) {
  return micro_rate(refs, hyps, true);
}

double corpus_bleu(const std::vector<std::string>& refs,
                   const std::vector<std::string>& hyps, const BleuOptions& opts) {
  if (refs.size() != hyps.size())
    throw InputError("bleu: " + std::to_string(refs.size()) + " references vs " +
                     std::to_string(hyps.size()) + " hypotheses");
  if (refs.empty()) throw InputError("bleu: empty corpus");

  constexpr int kMaxOrder = 4;
  int64_t matches[kMaxOrder] = {0};
  int64_t totals[kMaxOrder] = {0};
  int64_t ref_len = 0, hyp_len = 0;

  for (size_t i = 0; i < refs.size(); ++i) {
    std::vector<std::string> r = split_ws(refs[i]);
    std::vector<std::string> h = split_ws(hyps[i]);
    ref_len += static_cast<int64_t>(r.size());
    hyp_len += static_cast<int64_t>(h.size());
    for (int n = 1; n <= kMaxOrder; ++n) {
      std::map<std::vector<std::string>, int64_t> ref_counts;
      for (size_t k = 0; n <= static_cast<int>(r.size()) && k + n <= r.size(); ++k)
        ref_counts[{r.begin() + k, r.begin() + k + n}]++;
      std::map<std::vector<std::string>, int64_t> hyp_counts;
      for (size_t k = 0; n <= static_cast<int>(h.size()) && k + n <= h.size(); ++k)
        hyp_counts[{h.begin() + k, h.begin() + k + n}]++;
      for (const auto& [gram, count] : hyp_counts) {
        totals[n - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  if (hyp_len == 0) return 0.0;

  double log_precision = 0.0;
  int used_orders = 0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    int64_t m = matches[n - 1], t = totals[n - 1];
    if (t == 0) continue;  // corpus too short for this order
    ++used_orders;
    if (opts.smooth_add_one && n > 1) {
      m += 1;
      t += 1;
    }
    if (m == 0) return 0.0;  // plain geometric mean annihilates
    log_precision += std::log(static_cast<double>(m) / static_cast<double>(t));
  }
  if (used_orders == 0) throw InputError("bleu: no n-grams in corpus");
  double gm = std::exp(log_precision / used_orders);
  double bp = hyp_len < ref_len
                  ? std::exp(1.0 - static_cast<double>(ref_len) / hyp_len)
                  : 1.0;
  return 100.0 * bp * gm;
}

}  // namespace msat

#ifndef MSAT_EVAL_METRICS_H_
#define MSAT_EVAL_METRICS_H_

#include <string>
#include <vector>

namespace msat {

// Unit-cost Levenshtein distance over arbitrary token sequences.
int edit_distance(const std::vector<std::string>& ref,
                  const std::vector<std::string>& hyp);

// Character error rate: distance over codepoints (whitespace counts as a
// character) divided by reference length. Empty reference is an InputError.
double cer(const std::string& reference, const std::string& hypothesis);
// Word error rate over whitespace tokens.
double wer(const std::string& reference, const std::string& hypothesis);

// Corpus-level micro average: total distance over total reference length,
// so pooling per-fold outputs equals scoring the concatenation.
double corpus_cer(const std::vector<std::string>& refs,
                  const std::vector<std::string>& hyps);
double corpus_wer(const std::vector<std::string>& refs,
                  const std::vector<std::string>& hyps);

struct BleuOptions {
  // Lin/Och add-one smoothing on the n>1 precisions, for tiny corpora.
  bool smooth_add_one = false;
};

// Corpus BLEU-4 in [0, 100]: clipped modified n-gram precisions under a
// geometric mean, times the brevity penalty exp(min(0, 1 - r/c)). Orders
// with no n-grams anywhere in the corpus drop out of the mean.
double corpus_bleu(const std::vector<std::string>& refs,
                   const std::vector<std::string>& hyps,
                   const BleuOptions& opts = {});

}  // namespace msat

#endif  // MSAT_EVAL_METRICS_H_

#ifndef MSAT_DECODE_SEARCH_H_
#define MSAT_DECODE_SEARCH_H_

#include <string>
#include <vector>

#include "nn/model.h"

namespace msat {

// ((5 + len) / 6)^alpha; lp(1) == 1 exactly.
double length_penalty(int len, double alpha);

struct DecodeConfig {
  int beam = 4;
  double alpha = 0.8;
  // -1 picks 3x the first source's encoded length (at least 8).
  int max_len = -1;
};

struct DecodeResult {
  std::vector<int> tokens;  // transcript tokens, EOS excluded
  double logprob = 0.0;     // cumulative log P including the EOS step
  double score = 0.0;       // logprob / lp(steps)
  int steps = 0;            // decode steps taken (counts EOS when finished)
  bool finished = false;
  AttentionRecord attention;  // one row per step
};

DecodeResult greedy_decode(const Model& model, const Utterance& utt,
                           int max_len = -1);

// Standard beam search over cumulative log-probability. Hypotheses that
// emit EOS retire from the beam; search stops once beam-many have
// finished, the beam empties, or max_len is hit. Finished candidates are
// ranked by length-normalized score; with none, the best unfinished
// hypothesis is returned.
DecodeResult beam_decode(const Model& model, const Utterance& utt,
                         const DecodeConfig& cfg);

struct ForcedResult {
  std::vector<double> token_logprobs;  // log P(reference_k) per step
  double total_logprob = 0.0;          // == -sequence_nll
  AttentionRecord attention;           // K rows for a K-token reference
};

// Runs the decoder with the reference fixed as the previous-token input.
ForcedResult forced_decode(const Model& model, const Utterance& utt);

}  // namespace msat

#endif  // MSAT_DECODE_SEARCH_H_

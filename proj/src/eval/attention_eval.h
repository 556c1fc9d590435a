#ifndef MSAT_EVAL_ATTENTION_EVAL_H_
#define MSAT_EVAL_ATTENTION_EVAL_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace msat {

// One forced-alignment span at feature-frame resolution.
struct AlignmentSpan {
  std::string text;
  int first_frame = 0;
  int last_frame = 0;
};

// Lines of `utt_id<TAB>word<TAB>start_frame<TAB>end_frame`.
std::map<std::string, std::vector<AlignmentSpan>> load_spans(const std::string& path);

// Attention dump record: utterance id, K, N, M, then K rows of N weights
// over the first source and K rows of M weights over the second (absent
// when M == 0).
struct AttentionDumpEntry {
  std::string id;
  std::vector<std::vector<double>> src1;
  std::vector<std::vector<double>> src2;
};

void write_attention_dump(const std::vector<AttentionDumpEntry>& entries,
                          const std::string& path);
std::vector<AttentionDumpEntry> read_attention_dump(const std::string& path);

// Everything needed to score one utterance's speech attention against its
// forced-alignment spans. `weights` come from forced decoding, so row k
// predicts reference character k (the trailing EOS row has no span).
struct UttAttentionInput {
  std::string id;
  std::vector<std::vector<double>> weights;  // K x N over the speech source
  std::string reference;
  std::vector<AlignmentSpan> spans;
  std::vector<std::pair<int, int>> position_map;  // encoder position -> frames
  int n_frames = 0;
};

// Sum of in-span attention mass per covered token, with the token count.
// Tokens without a covering span are excluded.
std::pair<double, int> utterance_attention_mass(const UttAttentionInput& utt);

// token_weighted pools tokens across the corpus; otherwise utterances are
// averaged first and then across the corpus.
double attention_accuracy(const std::vector<UttAttentionInput>& utts,
                          bool token_weighted = true);

}  // namespace msat

#endif  // MSAT_EVAL_ATTENTION_EVAL_H_

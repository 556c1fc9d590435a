#include "eval/attention_eval.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "util/errors.h"
#include "util/text.h"

namespace msat {

std::map<std::string, std::vector<AlignmentSpan>> load_spans(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open spans file: " + path);
  std::map<std::string, std::vector<AlignmentSpan>> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split(trim(line), '\t');
    if (f.size() != 4)
      throw FormatError("spans file " + path + " line " + std::to_string(lineno) +
                        ": expected 4 tab-separated fields");
    AlignmentSpan span;
    span.text = f[1];
    try {
      span.first_frame = std::stoi(f[2]);
      span.last_frame = std::stoi(f[3]);
    } catch (const std::exception&) {
      throw FormatError("spans file " + path + " line " + std::to_string(lineno) +
                        ": bad frame index");
    }
    if (span.first_frame < 0 || span.last_frame < span.first_frame)
      throw FormatError("spans file " + path + " line " + std::to_string(lineno) +
                        ": bad span [" + f[2] + ", " + f[3] + "]");
    out[f[0]].push_back(span);
  }
  return out;
}

void write_attention_dump(const std::vector<AttentionDumpEntry>& entries,
                          const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot open attention dump for writing: " + path);
  char buf[32];
  for (const AttentionDumpEntry& e : entries) {
    size_t k = e.src1.size();
    size_t n = k ? e.src1[0].size() : 0;
    size_t m = e.src2.empty() ? 0 : e.src2[0].size();
    os << e.id << ' ' << k << ' ' << n << ' ' << m << '\n';
    auto write_rows = [&](const std::vector<std::vector<double>>& rows) {
      for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%.12g", row[i]);
          os << (i ? " " : "") << buf;
        }
        os << '\n';
      }
    };
    write_rows(e.src1);
    write_rows(e.src2);
  }
}

std::vector<AttentionDumpEntry> read_attention_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open attention dump: " + path);
  std::vector<AttentionDumpEntry> out;
  std::string id;
  size_t k, n, m;
  while (in >> id >> k >> n >> m) {
    AttentionDumpEntry e;
    e.id = id;
    e.src1.assign(k, std::vector<double>(n));
    for (auto& row : e.src1)
      for (double& w : row)
        if (!(in >> w))
          throw FormatError("attention dump " + path + ": truncated record for " + id);
    if (m > 0) {
      e.src2.assign(k, std::vector<double>(m));
      for (auto& row : e.src2)
        for (double& w : row)
          if (!(in >> w))
            throw FormatError("attention dump " + path + ": truncated record for " + id);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::pair<double, int> utterance_attention_mass(const UttAttentionInput& utt) {
  if (utt.weights.empty()) return {0.0, 0};
  int n_positions = static_cast<int>(utt.weights[0].size());

  // match spans to reference characters, in order
  std::vector<std::string> ref = utf8_chars(utt.reference);
  std::vector<int> span_of_char(ref.size(), -1);
  size_t cursor = 0;
  for (size_t s = 0; s < utt.spans.size(); ++s) {
    const AlignmentSpan& span = utt.spans[s];
    if (span.last_frame >= utt.n_frames)
      throw InputError("utterance '" + utt.id + "': span end " +
                       std::to_string(span.last_frame) + " beyond " +
                       std::to_string(utt.n_frames) + " frames");
    std::vector<std::string> word = utf8_chars(span.text);
    if (word.empty()) continue;
    for (size_t j = cursor; j + word.size() <= ref.size(); ++j) {
      bool match = true;
      for (size_t t = 0; t < word.size(); ++t)
        if (ref[j + t] != word[t]) {
          match = false;
          break;
        }
      if (match) {
        for (size_t t = 0; t < word.size(); ++t)
          span_of_char[j + t] = static_cast<int>(s);
        cursor = j + word.size();
        break;
      }
    }
  }

  double total = 0.0;
  int count = 0;
  for (size_t c = 0; c < ref.size() && c < utt.weights.size(); ++c) {
    if (span_of_char[c] < 0) continue;
    const AlignmentSpan& span = utt.spans[span_of_char[c]];
    // a position partially covered by the span counts fully
    int p0 = -1, p1 = -1;
    for (int p = 0; p < static_cast<int>(utt.position_map.size()); ++p) {
      auto [a, b] = utt.position_map[p];
      if (b >= span.first_frame && a <= span.last_frame) {
        if (p0 < 0) p0 = p;
        p1 = p;
      }
    }
    if (p0 < 0) continue;
    p1 = std::min(p1, n_positions - 1);
    double mass = 0.0;
    for (int p = p0; p <= p1 && p < n_positions; ++p) mass += utt.weights[c][p];
    total += mass;
    ++count;
  }
  return {total, count};
}

double attention_accuracy(const std::vector<UttAttentionInput>& utts,
                          bool token_weighted) {
  if (utts.empty()) throw InputError("attention_accuracy: no utterances");
  double pooled_mass = 0.0;
  int pooled_tokens = 0;
  double utt_sum = 0.0;
  int utt_count = 0;
  for (const UttAttentionInput& u : utts) {
    auto [mass, count] = utterance_attention_mass(u);
    if (count == 0) continue;
    pooled_mass += mass;
    pooled_tokens += count;
    utt_sum += mass / count;
    ++utt_count;
  }
  if (pooled_tokens == 0)
    throw InputError("attention_accuracy: no tokens matched any span");
  return token_weighted ? pooled_mass / pooled_tokens : utt_sum / utt_count;
}

}  // namespace msat

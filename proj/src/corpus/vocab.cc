#include "corpus/vocab.h"

#include <algorithm>
#include <iostream>
#include <set>

#include "util/errors.h"
#include "util/text.h"

namespace msat {

Vocabulary Vocabulary::build(const Manifest& train, TextField field) {
  if (train.rows.empty()) throw InputError("build_vocab: empty train split");
  std::set<std::string> chars;  // byte-wise order == codepoint order in UTF-8
  for (const ManifestRow& r : train.rows) {
    const std::string& text =
        field == TextField::kTranslation ? r.translation : r.transcription;
    for (const std::string& c : utf8_chars(text)) chars.insert(c);
  }
  std::vector<std::string> tokens(chars.begin(), chars.end());
  return from_tokens(tokens);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  v.tokens_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (const std::string& t : tokens) v.tokens_.push_back(t);
  for (size_t i = 0; i < v.tokens_.size(); ++i)
    v.index_[v.tokens_[i]] = static_cast<int>(i);
  return v;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw InputError("token id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(size()));
  return tokens_[id];
}

int Vocabulary::id(const std::string& ch) const {
  auto it = index_.find(ch);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> Vocabulary::encode_source(const std::string& text) const {
  std::vector<int> out;
  out.push_back(kBos);
  for (const std::string& c : utf8_chars(text)) {
    int i = id(c);
    if (i < 0) {
      std::cerr << "[vocab] source character '" << c << "' not in inventory; using <unk>\n";
      i = kUnk;
    }
    out.push_back(i);
  }
  out.push_back(kEos);
  return out;
}

std::vector<int> Vocabulary::encode_target(const std::string& text) const {
  std::vector<int> out;
  for (const std::string& c : utf8_chars(text)) {
    int i = id(c);
    if (i < 0)
      throw InputError("target character '" + c + "' not in the training vocabulary");
    out.push_back(i);
  }
  out.push_back(kEos);
  return out;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int i : ids) {
    if (i <= kUnk) continue;
    out += token(i);
  }
  return out;
}

}  // namespace msat

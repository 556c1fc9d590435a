#ifndef MSAT_CORPUS_VOCAB_H_
#define MSAT_CORPUS_VOCAB_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "corpus/manifest.h"

namespace msat {

enum class TextField { kTranslation, kTranscription };

// Character inventory with four reserved entries. Built from the training
// split only; characters sort by codepoint so the mapping is deterministic.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  static Vocabulary build(const Manifest& train, TextField field);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const;
  // -1 when the character is not in the inventory.
  int id(const std::string& ch) const;

  // Source side: BOS ... EOS with UNK for unseen characters.
  std::vector<int> encode_source(const std::string& text) const;
  // Target side: characters plus trailing EOS; unseen characters are an
  // InputError naming the offending token.
  std::vector<int> encode_target(const std::string& text) const;
  // Drops sentinel/reserved ids.
  std::string decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace msat

#endif  // MSAT_CORPUS_VOCAB_H_

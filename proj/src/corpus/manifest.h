#ifndef MSAT_CORPUS_MANIFEST_H_
#define MSAT_CORPUS_MANIFEST_H_

#include <string>
#include <vector>

namespace msat {

// One parallel triple: audio (or cached features), translation text,
// reference transcription.
struct ManifestRow {
  std::string id;
  std::string audio;     // path, may be empty when features is set
  std::string features;  // path to a .plpf file
  std::string translation;
  std::string transcription;
};

enum class Split { kTrain, kDev, kTest };

std::string split_name(Split s);

struct Manifest {
  Split split = Split::kTrain;
  std::vector<ManifestRow> rows;
  std::string dir;  // directory of the file it was loaded from; resolves paths

  std::string resolve(const std::string& path) const;
};

// UTF-8 TSV with a header row; JSON-lines accepted when `jsonl` is set
// (or the path ends in .jsonl). Checks id uniqueness, that referenced
// files exist, and that text fields are non-empty for train/dev.
Manifest load_manifest(const std::string& path, Split split, bool jsonl = false,
                       bool check_files = true);
void save_manifest(const Manifest& m, const std::string& path, bool jsonl = false);

}  // namespace msat

#endif  // MSAT_CORPUS_MANIFEST_H_

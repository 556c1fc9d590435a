#include "corpus/manifest.h"

#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "util/errors.h"
#include "util/text.h"

namespace msat {

namespace fs = std::filesystem;
using nlohmann::json;

std::string split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string Manifest::resolve(const std::string& path) const {
  if (path.empty() || fs::path(path).is_absolute() || dir.empty()) return path;
  return (fs::path(dir) / path).string();
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void validate(const Manifest& m, const std::string& path, bool check_files) {
  std::unordered_set<std::string> seen;
  for (const ManifestRow& r : m.rows) {
    if (r.id.empty()) throw FormatError("manifest " + path + ": row with empty id");
    if (!seen.insert(r.id).second)
      throw FormatError("manifest " + path + ": duplicate id '" + r.id + "'");
    if (r.audio.empty() && r.features.empty())
      throw FormatError("manifest " + path + ": row '" + r.id +
                        "' has neither audio nor features");
    if (m.split != Split::kTest && (r.translation.empty() || r.transcription.empty()))
      throw FormatError("manifest " + path + ": row '" + r.id +
                        "' needs translation and transcription for " +
                        split_name(m.split));
    if (check_files) {
      for (const std::string& p : {r.audio, r.features}) {
        if (!p.empty() && !fs::exists(m.resolve(p)))
          throw InputError("manifest " + path + ": row '" + r.id +
                           "' references missing file " + m.resolve(p));
      }
    }
  }
}

}  // namespace

Manifest load_manifest(const std::string& path, Split split, bool jsonl,
                       bool check_files) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest: " + path);
  Manifest m;
  m.split = split;
  m.dir = fs::path(path).parent_path().string();
  jsonl = jsonl || ends_with(path, ".jsonl");

  std::string line;
  if (jsonl) {
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw FormatError("manifest " + path + " line " + std::to_string(lineno) +
                          ": " + e.what());
      }
      ManifestRow r;
      r.id = j.value("id", "");
      r.audio = j.value("audio", "");
      r.features = j.value("features", "");
      r.translation = j.value("translation", "");
      r.transcription = j.value("transcription", "");
      m.rows.push_back(std::move(r));
    }
  } else {
    if (!std::getline(in, line))
      throw FormatError("manifest " + path + ": empty file");
    std::vector<std::string> header = msat::split(trim(line), '\t');
    auto col = [&](const std::string& name) -> int {
      for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
      return -1;
    };
    int c_id = col("id"), c_audio = col("audio"), c_feat = col("features"),
        c_tr = col("translation"), c_ts = col("transcription");
    if (c_id < 0 || c_tr < 0 || c_ts < 0 || (c_audio < 0 && c_feat < 0))
      throw FormatError("manifest " + path +
                        ": header must name id, audio and/or features, "
                        "translation, transcription");
    size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      std::vector<std::string> f = msat::split(line, '\t');
      // allow trailing whitespace on the last field
      for (std::string& x : f) x = trim(x);
      auto field = [&](int c) { return c >= 0 && c < static_cast<int>(f.size()) ? f[c] : std::string(); };
      ManifestRow r;
      r.id = field(c_id);
      r.audio = field(c_audio);
      r.features = field(c_feat);
      r.translation = field(c_tr);
      r.transcription = field(c_ts);
      m.rows.push_back(std::move(r));
    }
  }
  validate(m, path, check_files);
  return m;
}

void save_manifest(const Manifest& m, const std::string& path, bool jsonl) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot open manifest for writing: " + path);
  jsonl = jsonl || ends_with(path, ".jsonl");
  if (jsonl) {
    for (const ManifestRow& r : m.rows) {
      json j{{"id", r.id},
             {"audio", r.audio},
             {"features", r.features},
             {"translation", r.translation},
             {"transcription", r.transcription}};
      os << j.dump() << "\n";
    }
  } else {
    os << "id\taudio\tfeatures\ttranslation\ttranscription\n";
    for (const ManifestRow& r : m.rows)
      os << r.id << '\t' << r.audio << '\t' << r.features << '\t' << r.translation
         << '\t' << r.transcription << '\n';
  }
}

}  // namespace msat

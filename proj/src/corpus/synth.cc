#include "corpus/synth.h"

#include <filesystem>
#include <fstream>

#include "core/rng.h"
#include "corpus/manifest.h"
#include "frontend/feature_io.h"
#include "util/errors.h"

namespace msat {

namespace fs = std::filesystem;

SynthPaths synth_corpus(const SynthConfig& cfg, const std::string& out_dir) {
  if (cfg.homophone_rate < 0.0 || cfg.homophone_rate > 1.0)
    throw ConfigError("homophone_rate must be in [0, 1]");
  if (cfg.alphabet_size < 2 || cfg.alphabet_size > 26)
    throw ConfigError("alphabet_size must be in [2, 26]");
  if (cfg.n_utts < 1) throw ConfigError("n_utts must be positive");
  int n_pairs = static_cast<int>(cfg.homophone_rate * cfg.alphabet_size / 2.0);
  if (2 * n_pairs > cfg.alphabet_size)
    throw ConfigError("alphabet too small for requested homophone pairs");

  Rng rng(cfg.seed);
  const int n = cfg.alphabet_size;

  // per-character acoustic templates; homophone pairs share pattern AND
  // duration so audio alone cannot separate them
  std::vector<std::vector<double>> pattern(n, std::vector<double>(39));
  std::vector<int> dur(n);
  for (int c = 0; c < n; ++c) {
    for (double& x : pattern[c]) x = rng.normal(0.0, 1.0);
    dur[c] = cfg.min_frames_per_char +
             static_cast<int>(rng.index(cfg.max_frames_per_char - cfg.min_frames_per_char + 1));
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  for (int p = 0; p < n_pairs; ++p) {
    int a = order[2 * p], b = order[2 * p + 1];
    pattern[b] = pattern[a];
    dur[b] = dur[a];
  }

  fs::create_directories(fs::path(out_dir) / "features");

  Manifest manifests[3];
  manifests[0].split = Split::kTrain;
  manifests[1].split = Split::kDev;
  manifests[2].split = Split::kTest;
  std::ofstream spans[3];
  SynthPaths paths;
  paths.train_manifest = (fs::path(out_dir) / "train.tsv").string();
  paths.dev_manifest = (fs::path(out_dir) / "dev.tsv").string();
  paths.test_manifest = (fs::path(out_dir) / "test.tsv").string();
  paths.train_spans = (fs::path(out_dir) / "spans_train.tsv").string();
  paths.dev_spans = (fs::path(out_dir) / "spans_dev.tsv").string();
  paths.test_spans = (fs::path(out_dir) / "spans_test.tsv").string();
  spans[0].open(paths.train_spans, std::ios::trunc);
  spans[1].open(paths.dev_spans, std::ios::trunc);
  spans[2].open(paths.test_spans, std::ios::trunc);

  int n_train = static_cast<int>(cfg.train_frac * cfg.n_utts);
  int n_dev = static_cast<int>(cfg.dev_frac * cfg.n_utts);
  if (n_train < 1) n_train = 1;
  if (n_train + n_dev > cfg.n_utts) n_dev = cfg.n_utts - n_train;

  for (int u = 0; u < cfg.n_utts; ++u) {
    char id[16];
    std::snprintf(id, sizeof id, "utt%05d", u);
    int len = cfg.min_len + static_cast<int>(rng.index(cfg.max_len - cfg.min_len + 1));
    std::string target, translation;
    std::vector<int> chars(len);
    for (int i = 0; i < len; ++i) {
      int c = static_cast<int>(rng.index(n));
      chars[i] = c;
      target.push_back(static_cast<char>('a' + c));
      translation.push_back(static_cast<char>('A' + c));  // substitution cipher
    }

    int total_frames = 0;
    for (int c : chars) total_frames += dur[c];
    FeatureMatrix m;
    m.frames = total_frames;
    m.width = 39;
    m.data.resize(static_cast<size_t>(total_frames) * 39);

    int which = u < n_train ? 0 : (u < n_train + n_dev ? 1 : 2);
    int t = 0;
    for (int i = 0; i < len; ++i) {
      int c = chars[i];
      int start = t;
      for (int f = 0; f < dur[c]; ++f, ++t)
        for (int d = 0; d < 39; ++d)
          m.at(t, d) = pattern[c][d] + rng.normal(0.0, cfg.noise_sd);
      spans[which] << id << '\t' << target[i] << '\t' << start << '\t' << (t - 1)
                   << '\n';
    }

    std::string feat_rel = "features/" + std::string(id) + ".plpf";
    save_features(m, (fs::path(out_dir) / feat_rel).string());

    ManifestRow row;
    row.id = id;
    row.features = feat_rel;
    row.translation = translation;
    row.transcription = target;
    manifests[which].rows.push_back(std::move(row));
  }

  save_manifest(manifests[0], paths.train_manifest);
  save_manifest(manifests[1], paths.dev_manifest);
  save_manifest(manifests[2], paths.test_manifest);
  return paths;
}

}  // namespace msat

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "corpus/folds.h"
#include "corpus/manifest.h"
#include "corpus/synth.h"
#include "corpus/vocab.h"
#include "frontend/feature_io.h"
#include "util/errors.h"

using namespace msat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("msat_corpus_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Manifest tiny_manifest() {
  Manifest m;
  m.split = Split::kTrain;
  m.rows.push_back({"u1", "", "", "ab", "xy"});
  m.rows.push_back({"u2", "", "", "bc", "yz"});
  for (auto& r : m.rows) r.features = "dummy.plpf";
  return m;
}

}  // namespace

TEST_CASE("vocabulary collects sorted characters behind the reserved four") {
  Manifest m = tiny_manifest();
  Vocabulary v = Vocabulary::build(m, TextField::kTranslation);
  REQUIRE(v.size() == 4 + 3);  // a b c
  CHECK(v.token(4) == "a");
  CHECK(v.token(5) == "b");
  CHECK(v.token(6) == "c");
  // deterministic across runs
  Vocabulary v2 = Vocabulary::build(m, TextField::kTranslation);
  CHECK(v.tokens() == v2.tokens());
}

TEST_CASE("source encoding wraps with sentinels and maps unseen to UNK") {
  Manifest m = tiny_manifest();
  Vocabulary v = Vocabulary::build(m, TextField::kTranslation);
  std::vector<int> ids = v.encode_source("aq");
  REQUIRE(ids.size() == 4);
  CHECK(ids.front() == Vocabulary::kBos);
  CHECK(ids[1] == v.id("a"));
  CHECK(ids[2] == Vocabulary::kUnk);
  CHECK(ids.back() == Vocabulary::kEos);
}

TEST_CASE("target encoding appends EOS and rejects unseen characters") {
  Manifest m = tiny_manifest();
  Vocabulary v = Vocabulary::build(m, TextField::kTranscription);
  std::vector<int> ids = v.encode_target("xz");
  REQUIRE(ids.size() == 3);
  CHECK(ids.back() == Vocabulary::kEos);
  CHECK_THROWS_WITH_AS(v.encode_target("x7"), doctest::Contains("7"), InputError);
  CHECK(v.decode(ids) == "xz");
}

TEST_CASE("empty train split is rejected") {
  Manifest m;
  CHECK_THROWS_AS(Vocabulary::build(m, TextField::kTranslation), InputError);
}

TEST_CASE("manifest TSV round-trip") {
  TempDir tmp;
  // referenced feature file must exist
  FeatureMatrix feats;
  feats.frames = 2;
  feats.width = 39;
  feats.data.assign(2 * 39, 0.5);
  save_features(feats, (tmp.path / "dummy.plpf").string());

  Manifest m = tiny_manifest();
  std::string p1 = (tmp.path / "m.tsv").string();
  save_manifest(m, p1);
  Manifest back = load_manifest(p1, Split::kTrain);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].id == "u1");
  CHECK(back.rows[1].translation == "bc");
  std::string p2 = (tmp.path / "m2.tsv").string();
  save_manifest(back, p2);
  std::ifstream f1(p1), f2(p2);
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
}

TEST_CASE("manifest jsonl round-trip and validation errors") {
  TempDir tmp;
  FeatureMatrix feats;
  feats.frames = 1;
  feats.width = 39;
  feats.data.assign(39, 0.0);
  save_features(feats, (tmp.path / "dummy.plpf").string());

  Manifest m = tiny_manifest();
  std::string pj = (tmp.path / "m.jsonl").string();
  save_manifest(m, pj);
  Manifest back = load_manifest(pj, Split::kTrain);
  CHECK(back.rows.size() == 2);

  // duplicate ids
  Manifest dup = tiny_manifest();
  dup.rows[1].id = "u1";
  std::string pd = (tmp.path / "dup.tsv").string();
  save_manifest(dup, pd);
  CHECK_THROWS_AS(load_manifest(pd, Split::kTrain), FormatError);

  // missing referenced file
  Manifest missing = tiny_manifest();
  missing.rows[0].features = "nope.plpf";
  std::string pm = (tmp.path / "missing.tsv").string();
  save_manifest(missing, pm);
  CHECK_THROWS_AS(load_manifest(pm, Split::kTrain), InputError);

  // empty text on train
  Manifest empty_text = tiny_manifest();
  empty_text.rows[0].translation = "";
  std::string pe = (tmp.path / "empty.tsv").string();
  save_manifest(empty_text, pe);
  CHECK_THROWS_AS(load_manifest(pe, Split::kTrain), FormatError);
}

TEST_CASE("fold rule: test i, dev (i-1) mod k, train the rest") {
  auto folds = make_folds(10, 10);
  REQUIRE(folds.size() == 10);
  CHECK(folds[0].test_group == 0);
  CHECK(folds[0].dev_group == 9);
  CHECK(folds[0].train_groups == std::vector<int>({1, 2, 3, 4, 5, 6, 7, 8}));
  std::set<int> tests, devs;
  for (const auto& f : folds) {
    tests.insert(f.test_group);
    devs.insert(f.dev_group);
    CHECK(f.train_groups.size() == 8);
  }
  CHECK(tests.size() == 10);  // every group exactly once as test
  CHECK(devs.size() == 10);
}

TEST_CASE("three groups leave exactly one training group") {
  auto folds = make_folds(3, 3);
  for (const auto& f : folds) CHECK(f.train_groups.size() == 1);
}

TEST_CASE("fold configuration errors") {
  CHECK_THROWS_AS(make_folds(2, 2), ConfigError);
  CHECK_THROWS_AS(make_folds(10, 4), ConfigError);
}

TEST_CASE("synthetic corpus is reproducible and self-consistent") {
  TempDir tmp1, tmp2;
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.n_utts = 20;
  cfg.alphabet_size = 8;
  cfg.homophone_rate = 0.5;
  SynthPaths a = synth_corpus(cfg, tmp1.path.string());
  SynthPaths b = synth_corpus(cfg, tmp2.path.string());

  Manifest ma = load_manifest(a.train_manifest, Split::kTrain);
  Manifest mb = load_manifest(b.train_manifest, Split::kTrain);
  REQUIRE(ma.rows.size() == mb.rows.size());
  for (size_t i = 0; i < ma.rows.size(); ++i) {
    CHECK(ma.rows[i].transcription == mb.rows[i].transcription);
    CHECK(ma.rows[i].translation == mb.rows[i].translation);
    FeatureMatrix fa = load_features(ma.resolve(ma.rows[i].features));
    FeatureMatrix fb = load_features(mb.resolve(mb.rows[i].features));
    CHECK(fa.data == fb.data);  // bit-identical
  }

  // translation is an invertible substitution cipher of the target
  for (const auto& r : ma.rows) {
    REQUIRE(r.translation.size() == r.transcription.size());
    for (size_t i = 0; i < r.translation.size(); ++i)
      CHECK(r.translation[i] == static_cast<char>(r.transcription[i] - 'a' + 'A'));
  }

  // splits are disjoint and cover n_utts
  Manifest dev = load_manifest(a.dev_manifest, Split::kDev);
  Manifest test = load_manifest(a.test_manifest, Split::kTest);
  std::set<std::string> ids;
  for (const auto& r : ma.rows) ids.insert(r.id);
  for (const auto& r : dev.rows) ids.insert(r.id);
  for (const auto& r : test.rows) ids.insert(r.id);
  CHECK(ids.size() == 20);
}

TEST_CASE("homophone pairs share acoustics but not translations") {
  TempDir tmp;
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.n_utts = 40;
  cfg.alphabet_size = 6;
  cfg.homophone_rate = 1.0;  // all characters paired
  cfg.noise_sd = 0.0;        // pure templates, so collisions are exact
  synth_corpus(cfg, tmp.path.string());
  Manifest m = load_manifest((tmp.path / "train.tsv").string(), Split::kTrain);

  // collect the exact frame pattern of each character from noiseless audio
  std::map<char, std::vector<double>> first_frame;
  std::map<char, int> durations;
  std::ifstream spans(tmp.path / "spans_train.tsv");
  std::string utt, ch;
  int s, e;
  std::map<std::string, FeatureMatrix> feats;
  for (const auto& r : m.rows) feats[r.id] = load_features(m.resolve(r.features));
  while (spans >> utt >> ch >> s >> e) {
    if (!feats.count(utt)) continue;
    const FeatureMatrix& f = feats[utt];
    std::vector<double> v(f.data.begin() + static_cast<size_t>(s) * 39,
                          f.data.begin() + static_cast<size_t>(s) * 39 + 39);
    char c = ch[0];
    if (!first_frame.count(c)) {
      first_frame[c] = v;
      durations[c] = e - s + 1;
    } else {
      CHECK(first_frame[c] == v);  // template fixed per character
      CHECK(durations[c] == e - s + 1);
    }
  }
  // with rate 1.0 every template appears under exactly two characters
  std::map<std::vector<double>, int> sharing;
  for (auto& [c, v] : first_frame) sharing[v]++;
  for (auto& [v, cnt] : sharing) CHECK(cnt == 2);
}

TEST_CASE("synth rejects impossible homophone demands") {
  SynthConfig cfg;
  cfg.alphabet_size = 1;
  CHECK_THROWS_AS(synth_corpus(cfg, "/tmp/never_used"), ConfigError);
}

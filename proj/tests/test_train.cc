#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "corpus/synth.h"
#include "decode/search.h"
#include "frontend/feature_io.h"
#include "train/batch.h"
#include "train/trainer.h"
#include "util/errors.h"

using namespace msat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("msat_train_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ModelConfig micro_config(Topology topo,
                         std::optional<AttentionMode> mode = std::nullopt) {
  ModelConfig cfg;
  cfg.topology = topo;
  cfg.attention_mode = mode;
  cfg.widths.enc_l1 = 4;
  cfg.widths.enc_l2 = 8;
  cfg.widths.enc_out = 16;
  cfg.widths.text_hidden = 8;
  cfg.widths.dec_hidden = 16;
  cfg.widths.attn = 12;
  cfg.widths.embed = 6;
  return cfg;
}

Utterance random_utterance(Rng& rng, int frames, int tgt_len) {
  Utterance u;
  u.id = "u" + std::to_string(rng.bits() % 1000);
  u.features.frames = frames;
  u.features.width = 39;
  u.features.data.resize(static_cast<size_t>(frames) * 39);
  for (double& d : u.features.data) d = rng.normal(0.0, 1.0);
  u.translation = {1, 4, 5, 2};
  for (int i = 0; i < tgt_len; ++i)
    u.transcription.push_back(4 + static_cast<int>(rng.index(3)));
  u.transcription.push_back(2);  // EOS
  return u;
}

}  // namespace

TEST_CASE("batch size one puts every utterance in its own batch") {
  Rng rng(1);
  std::vector<Utterance> utts;
  for (int i = 0; i < 7; ++i) utts.push_back(random_utterance(rng, 5 + i, 3));
  auto batches = batch_utterances(utts, 1, nullptr);
  CHECK(batches.size() == 7);
  for (const auto& b : batches) CHECK(b.indices.size() == 1);
}

TEST_CASE("batches bucket by length and cover every utterance once") {
  Rng rng(2);
  std::vector<Utterance> utts;
  for (int i = 0; i < 23; ++i)
    utts.push_back(random_utterance(rng, 4 + static_cast<int>(rng.index(30)), 3));
  Rng shuffle(3);
  auto batches = batch_utterances(utts, 4, &shuffle);
  std::vector<int> seen(utts.size(), 0);
  for (const auto& b : batches) {
    CHECK(b.indices.size() <= 4);
    int lo = INT32_MAX, hi = 0;
    for (size_t i : b.indices) {
      seen[i]++;
      lo = std::min(lo, utts[i].features.frames);
      hi = std::max(hi, utts[i].features.frames);
    }
    // bucketing keeps in-batch length spread small relative to the corpus
    CHECK(hi - lo <= 30);
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("summed batch loss equals the sum of per-utterance losses") {
  ParameterStore store;
  Rng rng(5);
  ModelConfig cfg = micro_config(Topology::kSingleSpeech);
  cfg.src_vocab = 8;
  cfg.tgt_vocab = 8;
  Model model(cfg, store, &rng);
  Rng data(7);
  std::vector<Utterance> utts;
  for (int i = 0; i < 4; ++i)
    utts.push_back(random_utterance(data, 6 + static_cast<int>(data.index(5)), 3));

  double individual = 0.0;
  for (const Utterance& u : utts) {
    Tape t;
    individual += t.scalar(model.sequence_nll(t, u, false, 0.0, nullptr).loss);
  }
  Tape batch_tape;
  Var total;
  for (size_t i = 0; i < utts.size(); ++i) {
    Var l = model.sequence_nll(batch_tape, utts[i], false, 0.0, nullptr).loss;
    total = i == 0 ? l : batch_tape.add(total, l);
  }
  CHECK(std::abs(batch_tape.scalar(total) - individual) <= 1e-9);
}

TEST_CASE("appending padding frames leaves the loss unchanged") {
  ParameterStore store;
  Rng rng(11);
  ModelConfig cfg = micro_config(Topology::kSingleSpeech);
  cfg.src_vocab = 8;
  cfg.tgt_vocab = 8;
  Model model(cfg, store, &rng);
  Rng data(13);
  Utterance u = random_utterance(data, 9, 4);

  Tape t1;
  double base = t1.scalar(model.sequence_nll(t1, u, false, 0.0, nullptr).loss);

  Utterance padded = u;
  padded.n_frames = u.features.frames;  // true length; the rest is padding
  padded.features.frames += 5;
  padded.features.data.resize(static_cast<size_t>(padded.features.frames) * 39, 0.0);
  Tape t2;
  double with_pad = t2.scalar(model.sequence_nll(t2, padded, false, 0.0, nullptr).loss);
  CHECK(std::abs(base - with_pad) <= 1e-9);
}

TEST_CASE("training runs end to end, selects the best dev checkpoint") {
  TempDir tmp;
  SynthConfig sc;
  sc.seed = 9;
  sc.n_utts = 12;
  sc.alphabet_size = 4;
  sc.min_len = 3;
  sc.max_len = 5;
  SynthPaths paths = synth_corpus(sc, tmp.path.string());
  Manifest train = load_manifest(paths.train_manifest, Split::kTrain);
  Manifest dev = load_manifest(paths.dev_manifest, Split::kDev);

  TrainConfig tc;
  tc.lr = 0.01;
  tc.dropout = 0.0;
  tc.max_epochs = 6;
  tc.batch_size = 4;
  tc.patience = 100;
  tc.seed = 5;
  TrainResult res = train_model(micro_config(Topology::kSingleSpeech), train, dev,
                                tc, (tmp.path / "model").string());
  CHECK(res.epochs_run == 6);
  REQUIRE(!res.log.empty());

  // the selected checkpoint's dev CER is the minimum over evaluations
  double min_cer = 1e9;
  int best_count = 0;
  for (const auto& rec : res.log) {
    if (rec.evaluated) min_cer = std::min(min_cer, rec.dev_cer);
    if (rec.best) ++best_count;
  }
  CHECK(res.best_dev_cer == min_cer);
  CHECK(best_count >= 1);
  CHECK(fs::exists(res.params_path));
  CHECK(fs::exists(res.meta_path));
  CHECK(fs::exists(res.log_path));

  // checkpoint loads back into a usable model
  LoadedModel lm = load_model(res.params_path);
  CHECK(lm.meta.config.topology == Topology::kSingleSpeech);
  Model model(lm.meta.config, lm.store, nullptr);
  Dataset dev_ds = load_dataset(dev, lm.src_vocab, lm.tgt_vocab, &lm.normalizer,
                                true, false);
  DecodeResult r = greedy_decode(model, dev_ds.utts[0]);
  CHECK(r.steps >= 1);
}

TEST_CASE("patience zero stops at the first non-improving evaluation") {
  TempDir tmp;
  SynthConfig sc;
  sc.seed = 21;
  sc.n_utts = 10;
  sc.alphabet_size = 4;
  SynthPaths paths = synth_corpus(sc, tmp.path.string());
  Manifest train = load_manifest(paths.train_manifest, Split::kTrain);
  Manifest dev = load_manifest(paths.dev_manifest, Split::kDev);

  TrainConfig tc;
  tc.lr = 0.0;  // nothing improves after the first evaluation
  tc.dropout = 0.0;
  tc.max_epochs = 50;
  tc.batch_size = 4;
  tc.patience = 0;
  TrainResult res = train_model(micro_config(Topology::kSingleSpeech), train, dev,
                                tc, (tmp.path / "model").string());
  // epoch 1 evaluates and improves (from infinity); epoch 2 cannot improve
  CHECK(res.epochs_run == 2);
}

TEST_CASE("fixed seed reproduces logs and checkpoints bit for bit") {
  TempDir tmp;
  SynthConfig sc;
  sc.seed = 33;
  sc.n_utts = 10;
  sc.alphabet_size = 5;
  SynthPaths paths = synth_corpus(sc, tmp.path.string());
  Manifest train = load_manifest(paths.train_manifest, Split::kTrain);
  Manifest dev = load_manifest(paths.dev_manifest, Split::kDev);

  TrainConfig tc;
  tc.lr = 0.005;
  tc.dropout = 0.2;  // dropout masks must reproduce too
  tc.max_epochs = 3;
  tc.batch_size = 4;
  tc.seed = 77;
  TrainResult a = train_model(micro_config(Topology::kSingleSpeech), train, dev,
                              tc, (tmp.path / "a").string());
  TrainResult b = train_model(micro_config(Topology::kSingleSpeech), train, dev,
                              tc, (tmp.path / "b").string());

  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss_per_token == b.log[i].train_loss_per_token);
    CHECK(a.log[i].evaluated == b.log[i].evaluated);
    if (a.log[i].evaluated) CHECK(a.log[i].dev_cer == b.log[i].dev_cer);
    CHECK(a.log[i].best == b.log[i].best);
  }
  std::ifstream fa(a.params_path, std::ios::binary), fb(b.params_path, std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)), {});
  std::string cb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(ca == cb);
}

TEST_CASE("loss decreases monotonically early in a toy overfit run") {
  TempDir tmp;
  SynthConfig sc;
  sc.seed = 41;
  sc.n_utts = 1;
  sc.alphabet_size = 4;
  sc.min_len = 4;
  sc.max_len = 6;
  SynthPaths paths = synth_corpus(sc, tmp.path.string());
  Manifest train = load_manifest(paths.train_manifest, Split::kTrain);

  TrainConfig tc;
  tc.lr = 0.01;
  tc.dropout = 0.0;
  tc.max_epochs = 10;
  tc.batch_size = 1;
  tc.patience = 1000;
  tc.eval_every = 5;
  TrainResult res = train_model(micro_config(Topology::kSingleSpeech), train, train,
                                tc, (tmp.path / "model").string());
  REQUIRE(res.log.size() == 10);
  for (size_t i = 1; i < res.log.size(); ++i)
    CHECK(res.log[i].train_loss_per_token < res.log[i - 1].train_loss_per_token);
}

TEST_CASE("non-finite loss aborts naming the utterance") {
  TempDir tmp;
  SynthConfig sc;
  sc.seed = 51;
  sc.n_utts = 4;
  sc.alphabet_size = 4;
  SynthPaths paths = synth_corpus(sc, tmp.path.string());
  // poison one cached feature file with NaN
  Manifest train = load_manifest(paths.train_manifest, Split::kTrain);
  FeatureMatrix f = load_features(train.resolve(train.rows[1].features));
  f.data[7] = std::numeric_limits<double>::quiet_NaN();
  save_features(f, train.resolve(train.rows[1].features));

  TrainConfig tc;
  tc.max_epochs = 1;
  tc.batch_size = 2;
  // the NaN also reaches the corpus normalizer, so the first poisoned batch
  // aborts; the message must carry the offending utterance's id
  CHECK_THROWS_WITH_AS(
      train_model(micro_config(Topology::kSingleSpeech), train, train, tc,
                  (tmp.path / "model").string()),
      doctest::Contains("non-finite loss at utterance 'utt"), StateError);
}

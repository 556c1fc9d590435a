#include "train/trainer.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "decode/search.h"
#include "eval/metrics.h"
#include "frontend/feature_io.h"
#include "frontend/wav.h"
#include "train/batch.h"
#include "util/errors.h"

namespace msat {

using nlohmann::json;

Dataset load_dataset(const Manifest& manifest, const Vocabulary& src_vocab,
                     const Vocabulary& tgt_vocab, const FeatureNormalizer* norm,
                     bool need_speech, bool need_targets) {
  Dataset ds;
  for (const ManifestRow& row : manifest.rows) {
    Utterance u;
    u.id = row.id;
    if (need_speech) {
      if (!row.features.empty()) {
        u.features = load_features(manifest.resolve(row.features));
      } else {
        AudioBuffer audio = read_wav(manifest.resolve(row.audio));
        PlpExtractor plp(audio.sample_rate);
        u.features = plp.features(audio);
      }
      if (norm) norm->apply(u.features);
    }
    u.translation = src_vocab.encode_source(row.translation);
    if (need_targets) u.transcription = tgt_vocab.encode_target(row.transcription);
    ds.references.push_back(row.transcription);
    ds.utts.push_back(std::move(u));
  }
  return ds;
}

namespace {

double greedy_dev_cer(const Model& model, const Dataset& dev,
                      const Vocabulary& tgt_vocab) {
  std::vector<std::string> hyps;
  hyps.reserve(dev.utts.size());
  for (const Utterance& u : dev.utts)
    hyps.push_back(tgt_vocab.decode(greedy_decode(model, u).tokens));
  return corpus_cer(dev.references, hyps);
}

}  // namespace

TrainResult train_model(const ModelConfig& base_config, const Manifest& train,
                        const Manifest& dev, const TrainConfig& cfg,
                        const std::string& out_prefix) {
  if (train.rows.empty()) throw InputError("train split is empty");
  if (dev.rows.empty()) throw InputError("dev split is empty");

  // vocabularies come from the training split only
  Vocabulary src_vocab = Vocabulary::build(train, TextField::kTranslation);
  Vocabulary tgt_vocab = Vocabulary::build(train, TextField::kTranscription);

  ModelConfig config = base_config;
  config.src_vocab = src_vocab.size();
  config.tgt_vocab = tgt_vocab.size();
  config.validate();
  bool need_speech = config.uses_speech();

  Dataset train_ds = load_dataset(train, src_vocab, tgt_vocab, nullptr,
                                  need_speech, true);
  FeatureNormalizer norm;
  if (need_speech) {
    std::vector<const FeatureMatrix*> feats;
    for (const Utterance& u : train_ds.utts) feats.push_back(&u.features);
    norm.fit(feats);
    for (Utterance& u : train_ds.utts) norm.apply(u.features);
  }
  Dataset dev_ds =
      load_dataset(dev, src_vocab, tgt_vocab, need_speech ? &norm : nullptr,
                   need_speech, false);

  ParameterStore store;
  Rng init_rng(cfg.seed);
  Model model(config, store, &init_rng);
  store.ensure_grads();
  Rng shuffle_rng(cfg.seed + 0x9e3779b9);
  Rng dropout_rng(cfg.seed + 0x7f4a7c15);

  ModelMeta meta;
  meta.config = config;
  meta.src_tokens.assign(src_vocab.tokens().begin() + 4, src_vocab.tokens().end());
  meta.tgt_tokens.assign(tgt_vocab.tokens().begin() + 4, tgt_vocab.tokens().end());
  if (need_speech) {
    meta.feat_mean = norm.mean();
    meta.feat_std = norm.std();
  }

  TrainResult result;
  result.params_path = out_prefix + ".params";
  result.meta_path = meta_path_for(result.params_path);
  result.log_path = out_prefix + ".log.jsonl";
  meta.save(result.meta_path);
  std::ofstream log_stream(result.log_path, std::ios::trunc);

  AdamConfig adam_cfg = cfg.adam();
  double best_cer = std::numeric_limits<double>::infinity();
  int non_improving = 0;
  bool have_best = false;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Batch> batches =
        batch_utterances(train_ds.utts, cfg.batch_size, &shuffle_rng);
    double loss_sum = 0.0;
    int64_t token_sum = 0;
    for (const Batch& batch : batches) {
      if (batch.indices.empty()) {
        std::cerr << "[train] skipping empty batch\n";
        continue;
      }
      Tape tape(8192);
      Var total;
      bool first = true;
      for (size_t idx : batch.indices) {
        const Utterance& u = train_ds.utts[idx];
        Model::NllResult r =
            model.sequence_nll(tape, u, true, cfg.dropout, &dropout_rng);
        double value = tape.scalar(r.loss);
        if (!std::isfinite(value))
          throw StateError("non-finite loss at utterance '" + u.id + "' in epoch " +
                           std::to_string(epoch));
        loss_sum += value;
        token_sum += r.n_tokens;
        total = first ? r.loss : tape.add(total, r.loss);
        first = false;
      }
      tape.backward(total);
      adam_step(store, adam_cfg);
      store.zero_grads();
    }

    TrainLogRecord rec;
    rec.epoch = epoch;
    rec.train_loss_per_token = loss_sum / static_cast<double>(token_sum);
    result.epochs_run = epoch;

    bool stop = false;
    if (epoch % cfg.eval_every == 0) {
      rec.evaluated = true;
      rec.dev_cer = greedy_dev_cer(model, dev_ds, tgt_vocab);
      if (rec.dev_cer < best_cer) {
        best_cer = rec.dev_cer;
        rec.best = true;
        have_best = true;
        result.best_dev_cer = best_cer;
        result.best_epoch = epoch;
        non_improving = 0;
        store.save(result.params_path, true);
      } else {
        ++non_improving;
        if (non_improving > cfg.patience) stop = true;
      }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    result.log.push_back(rec);
    if (log_stream) {
      json j{{"epoch", rec.epoch},
             {"train_loss_per_token", rec.train_loss_per_token},
             {"seconds", rec.seconds},
             {"best", rec.best}};
      if (rec.evaluated) j["dev_cer"] = rec.dev_cer;
      log_stream << j.dump() << "\n";
      log_stream.flush();
    }
    if (cfg.verbose) {
      std::cerr << "[train] epoch " << rec.epoch << " loss/token "
                << rec.train_loss_per_token;
      if (rec.evaluated) std::cerr << " dev_cer " << rec.dev_cer;
      if (rec.best) std::cerr << " *";
      std::cerr << "\n";
    }
    if (stop) break;
  }

  if (!have_best) {
    // no evaluation ever ran (eval_every > max_epochs); keep the last state
    store.save(result.params_path, true);
    result.best_dev_cer = std::numeric_limits<double>::quiet_NaN();
    result.best_epoch = result.epochs_run;
  }
  return result;
}

LoadedModel load_model(const std::string& params_path) {
  LoadedModel lm;
  lm.meta = ModelMeta::load(meta_path_for(params_path));
  lm.store = ParameterStore::load(params_path);
  lm.src_vocab = Vocabulary::from_tokens(lm.meta.src_tokens);
  lm.tgt_vocab = Vocabulary::from_tokens(lm.meta.tgt_tokens);
  if (!lm.meta.feat_mean.empty())
    lm.normalizer.set(lm.meta.feat_mean, lm.meta.feat_std);
  return lm;
}

}  // namespace msat

// Command-line surface: corpus synthesis, feature extraction, training,
// decoding, scoring, cross-validation folds, and attention tooling.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "corpus/folds.h"
#include "corpus/manifest.h"
#include "corpus/synth.h"
#include "decode/search.h"
#include "eval/attention_eval.h"
#include "eval/metrics.h"
#include "frontend/feature_io.h"
#include "frontend/wav.h"
#include "train/trainer.h"
#include "util/errors.h"
#include "util/text.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace msat;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(trim(line));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

struct WidthFlags {
  std::string preset = "paper";
  int enc_l1 = -1, enc_l2 = -1, enc_out = -1, text_hidden = -1, dec_hidden = -1,
      attn = -1, embed = -1;

  ModelWidths resolve() const {
    ModelWidths w;
    if (preset == "tiny")
      w = ModelWidths::tiny();
    else if (preset != "paper")
      throw ConfigError("unknown preset '" + preset + "' (paper or tiny)");
    if (enc_l1 > 0) w.enc_l1 = enc_l1;
    if (enc_l2 > 0) w.enc_l2 = enc_l2;
    if (enc_out > 0) w.enc_out = enc_out;
    if (text_hidden > 0) w.text_hidden = text_hidden;
    if (dec_hidden > 0) w.dec_hidden = dec_hidden;
    if (attn > 0) w.attn = attn;
    if (embed > 0) w.embed = embed;
    return w;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "width preset: paper (default) or tiny");
    cmd->add_option("--enc-l1", enc_l1, "speech layer-1 width per direction");
    cmd->add_option("--enc-l2", enc_l2, "speech layer-2 width");
    cmd->add_option("--enc-out", enc_out, "speech layer-3 / encoder output width");
    cmd->add_option("--text-hidden", text_hidden, "text encoder width per direction");
    cmd->add_option("--dec-hidden", dec_hidden, "decoder hidden width");
    cmd->add_option("--attn-width", attn, "attention width");
    cmd->add_option("--embed", embed, "character embedding width");
  }
};

struct LoadedForInference {
  LoadedModel lm;
  std::unique_ptr<Model> model;
  Dataset data;
  Manifest manifest;
};

LoadedForInference load_for_inference(const std::string& params,
                                      const std::string& manifest_path,
                                      bool need_targets) {
  LoadedForInference out;
  out.lm = load_model(params);
  out.model = std::make_unique<Model>(out.lm.meta.config, out.lm.store, nullptr);
  out.manifest = load_manifest(manifest_path, Split::kTest);
  bool need_speech = out.lm.meta.config.uses_speech();
  out.data = load_dataset(out.manifest, out.lm.src_vocab, out.lm.tgt_vocab,
                          out.lm.normalizer.fitted() ? &out.lm.normalizer : nullptr,
                          need_speech, need_targets);
  return out;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_dir) {
  SynthPaths paths = synth_corpus(cfg, out_dir);
  std::cout << paths.train_manifest << "\n"
            << paths.dev_manifest << "\n"
            << paths.test_manifest << "\n";
  return 0;
}

int cmd_extract_features(const std::string& manifest_path, const std::string& outdir,
                         const std::string& out_manifest) {
  Manifest m = load_manifest(manifest_path, Split::kTest);
  fs::create_directories(outdir);
  for (ManifestRow& row : m.rows) {
    if (row.audio.empty()) continue;  // already feature-backed
    AudioBuffer audio = read_wav(m.resolve(row.audio));
    PlpExtractor plp(audio.sample_rate);
    FeatureMatrix feats = plp.features(audio);
    std::string path = (fs::path(outdir) / (row.id + ".plpf")).string();
    save_features(feats, path);
    row.features = fs::absolute(path).string();
  }
  m.dir.clear();
  save_manifest(m, out_manifest);
  std::cout << out_manifest << "\n";
  return 0;
}

int cmd_train(const std::string& train_path, const std::string& dev_path,
              const std::string& topology, const std::string& attention,
              const WidthFlags& widths, const TrainConfig& tc,
              const std::string& out_prefix) {
  ModelConfig config;
  config.topology = topology_from_name(topology);
  if (config.topology == Topology::kMultiSource)
    config.attention_mode = attention_mode_from_name(attention);
  else
    config.attention_mode.reset();
  config.widths = widths.resolve();

  Manifest train = load_manifest(train_path, Split::kTrain);
  Manifest dev = load_manifest(dev_path, Split::kDev);
  TrainResult res = train_model(config, train, dev, tc, out_prefix);
  json j{{"best_dev_cer", res.best_dev_cer},
         {"best_epoch", res.best_epoch},
         {"epochs_run", res.epochs_run},
         {"params", res.params_path},
         {"log", res.log_path}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_decode(const std::string& params, const std::string& manifest_path,
               const std::string& out_path, const std::string& text_out,
               int beam, double alpha, int max_len, bool greedy) {
  LoadedForInference inf = load_for_inference(params, manifest_path, false);
  std::ofstream os(out_path, std::ios::trunc);
  if (!os) throw InputError("cannot open " + out_path);
  std::ofstream text_stream;
  if (!text_out.empty()) text_stream.open(text_out, std::ios::trunc);

  DecodeConfig dc;
  dc.beam = beam;
  dc.alpha = alpha;
  dc.max_len = max_len;
  for (size_t i = 0; i < inf.data.utts.size(); ++i) {
    DecodeResult r = greedy ? greedy_decode(*inf.model, inf.data.utts[i], max_len)
                            : beam_decode(*inf.model, inf.data.utts[i], dc);
    std::string transcript = inf.lm.tgt_vocab.decode(r.tokens);
    json j{{"id", inf.data.utts[i].id},
           {"transcript", transcript},
           {"score", r.score}};
    os << j.dump() << "\n";
    if (text_stream) text_stream << transcript << "\n";
  }
  return 0;
}

int cmd_score(const std::string& metric, const std::string& ref_path,
              const std::string& hyp_path, bool smooth) {
  std::vector<std::string> refs = read_lines(ref_path);
  std::vector<std::string> hyps = read_lines(hyp_path);
  if (hyps.size() < refs.size()) hyps.resize(refs.size());  // trailing empties
  double value = 0.0;
  if (metric == "cer")
    value = corpus_cer(refs, hyps);
  else if (metric == "wer")
    value = corpus_wer(refs, hyps);
  else if (metric == "bleu")
    value = corpus_bleu(refs, hyps, {smooth});
  else
    throw ConfigError("unknown metric '" + metric + "' (cer, wer or bleu)");
  std::printf("%.6f\n", value);
  return 0;
}

int cmd_folds(const std::vector<std::string>& group_paths, int k,
              const std::string& out_dir, const std::string& train_cmd) {
  std::vector<Manifest> groups;
  for (const std::string& p : group_paths)
    groups.push_back(load_manifest(p, Split::kTrain));
  std::vector<FoldSpec> specs = make_folds(groups.size(), k);

  fs::create_directories(out_dir);
  std::vector<std::string> fold_dirs;
  for (int i = 0; i < k; ++i) {
    FoldData fold = assemble_fold(groups, specs[i]);
    std::string dir = (fs::path(out_dir) / ("fold" + std::to_string(i))).string();
    fs::create_directories(dir);
    save_manifest(fold.train, dir + "/train.tsv");
    save_manifest(fold.dev, dir + "/dev.tsv");
    save_manifest(fold.test, dir + "/test.tsv");
    fold_dirs.push_back(dir);
  }

  if (!train_cmd.empty()) {
    for (int i = 0; i < k; ++i) {
      std::string cmd = train_cmd;
      auto replace_all = [&](const std::string& key, const std::string& value) {
        size_t pos = 0;
        while ((pos = cmd.find(key, pos)) != std::string::npos) {
          cmd.replace(pos, key.size(), value);
          pos += value.size();
        }
      };
      replace_all("{train}", fold_dirs[i] + "/train.tsv");
      replace_all("{dev}", fold_dirs[i] + "/dev.tsv");
      replace_all("{test}", fold_dirs[i] + "/test.tsv");
      replace_all("{out}", fold_dirs[i]);
      replace_all("{fold}", std::to_string(i));
      std::cerr << "[folds] fold " << i << ": " << cmd << "\n";
      int rc = std::system(cmd.c_str());
      if (rc != 0)
        throw StateError("fold " + std::to_string(i) + " command failed with status " +
                         std::to_string(rc));
    }
  }

  // report over whichever folds have produced hyp.txt
  std::vector<std::string> all_refs, all_hyps;
  json per_fold = json::array();
  for (int i = 0; i < k; ++i) {
    std::string hyp_path = fold_dirs[i] + "/hyp.txt";
    if (!fs::exists(hyp_path)) continue;
    Manifest test = load_manifest(fold_dirs[i] + "/test.tsv", Split::kTest);
    std::vector<std::string> refs;
    for (const ManifestRow& r : test.rows) refs.push_back(r.transcription);
    std::vector<std::string> hyps = read_lines(hyp_path);
    if (hyps.size() != refs.size())
      throw InputError("fold " + std::to_string(i) + ": " +
                       std::to_string(hyps.size()) + " hypotheses for " +
                       std::to_string(refs.size()) + " references");
    per_fold.push_back({{"fold", i}, {"cer", corpus_cer(refs, hyps)}});
    all_refs.insert(all_refs.end(), refs.begin(), refs.end());
    all_hyps.insert(all_hyps.end(), hyps.begin(), hyps.end());
  }
  json report{{"folds", per_fold}};
  if (!all_refs.empty()) report["concatenated_cer"] = corpus_cer(all_refs, all_hyps);
  std::ofstream rs(fs::path(out_dir) / "report.json", std::ios::trunc);
  rs << report.dump(2) << "\n";
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_dump_attention(const std::string& params, const std::string& manifest_path,
                       const std::string& out_path) {
  LoadedForInference inf = load_for_inference(params, manifest_path, true);
  std::vector<AttentionDumpEntry> entries;
  for (const Utterance& u : inf.data.utts) {
    ForcedResult r = forced_decode(*inf.model, u);
    AttentionDumpEntry e;
    e.id = u.id;
    e.src1 = std::move(r.attention.src1);
    e.src2 = std::move(r.attention.src2);
    entries.push_back(std::move(e));
  }
  write_attention_dump(entries, out_path);
  return 0;
}

int cmd_plot_attention(const std::string& dump_path, const std::string& utt_id,
                       int source, const std::string& out_path) {
  std::vector<AttentionDumpEntry> entries = read_attention_dump(dump_path);
  const AttentionDumpEntry* entry = nullptr;
  for (const auto& e : entries)
    if (e.id == utt_id) entry = &e;
  if (!entry) throw InputError("utterance '" + utt_id + "' not in dump");
  const auto& rows = source == 2 ? entry->src2 : entry->src1;
  if (rows.empty()) throw InputError("no weights for source " + std::to_string(source));

  static const char* shades = " .:-=+*#%@";
  double mx = 0.0;
  for (const auto& row : rows)
    for (double w : row) mx = std::max(mx, w);
  std::ostringstream plot;
  plot << utt_id << " source " << source << " (" << rows.size() << " steps x "
       << rows[0].size() << " positions)\n";
  for (size_t k = 0; k < rows.size(); ++k) {
    plot << static_cast<char>(k < 26 ? 'a' + k : '.') << " |";
    for (double w : rows[k]) {
      int level = mx > 0 ? static_cast<int>(w / mx * 9.0) : 0;
      plot << shades[std::clamp(level, 0, 9)];
    }
    plot << "|\n";
  }
  if (out_path.empty()) {
    std::cout << plot.str();
  } else {
    std::ofstream os(out_path, std::ios::trunc);
    os << plot.str();
  }
  return 0;
}

int cmd_force_align_score(const std::string& dump_path, const std::string& spans_path,
                          const std::string& manifest_path,
                          const std::string& weighting) {
  auto entries = read_attention_dump(dump_path);
  auto spans = load_spans(spans_path);
  Manifest manifest = load_manifest(manifest_path, Split::kTest);
  std::map<std::string, const ManifestRow*> rows;
  for (const ManifestRow& r : manifest.rows) rows[r.id] = &r;

  std::vector<UttAttentionInput> inputs;
  for (const AttentionDumpEntry& e : entries) {
    auto row_it = rows.find(e.id);
    auto span_it = spans.find(e.id);
    if (row_it == rows.end() || span_it == spans.end()) continue;
    UttAttentionInput u;
    u.id = e.id;
    u.weights = e.src1;
    u.reference = row_it->second->transcription;
    u.spans = span_it->second;
    const ManifestRow& row = *row_it->second;
    FeatureMatrix f = load_features(manifest.resolve(row.features));
    u.n_frames = f.frames;
    u.position_map = speech_position_map(f.frames);
    if (!e.src1.empty() && e.src1[0].size() != u.position_map.size())
      throw InputError("utterance '" + e.id + "': dump has " +
                       std::to_string(e.src1[0].size()) + " positions but features give " +
                       std::to_string(u.position_map.size()));
    inputs.push_back(std::move(u));
  }
  if (inputs.empty()) throw InputError("no utterances shared by dump, spans, manifest");
  double acc = attention_accuracy(inputs, weighting != "utterance");
  std::printf("%.6f\n", acc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-source attentional speech transcription toolkit"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic parallel corpus");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_cfg.seed, "rng seed");
  synth->add_option("--n-utts", synth_cfg.n_utts, "utterance count");
  synth->add_option("--alphabet-size", synth_cfg.alphabet_size, "target alphabet size");
  synth->add_option("--homophone-rate", synth_cfg.homophone_rate,
                    "fraction of the alphabet paired into shared acoustics");
  synth->add_option("--min-len", synth_cfg.min_len, "min target length");
  synth->add_option("--max-len", synth_cfg.max_len, "max target length");
  synth->add_option("--noise-sd", synth_cfg.noise_sd, "per-frame noise sd");

  // extract-features
  std::string ef_manifest, ef_outdir, ef_out_manifest;
  auto* ef = app.add_subcommand("extract-features", "cache PLP features for a manifest");
  ef->add_option("--manifest", ef_manifest, "input manifest")->required();
  ef->add_option("--outdir", ef_outdir, "feature cache directory")->required();
  ef->add_option("--out-manifest", ef_out_manifest, "rewritten manifest")->required();

  // train
  std::string tr_train, tr_dev, tr_topology = "multi-source", tr_attention = "shared",
              tr_out;
  WidthFlags tr_widths;
  TrainConfig tr_cfg;
  auto* tr = app.add_subcommand("train", "train a transcription model");
  tr->add_option("--train", tr_train, "train manifest")->required();
  tr->add_option("--dev", tr_dev, "dev manifest")->required();
  tr->add_option("--topology", tr_topology,
                 "single-speech | single-text | multi-source | coupled-ensemble");
  tr->add_option("--attention", tr_attention, "untied | tied | shared");
  tr->add_option("--out", tr_out, "output prefix")->required();
  tr->add_option("--lr", tr_cfg.lr, "Adam learning rate");
  tr->add_option("--dropout", tr_cfg.dropout, "dropout rate");
  tr->add_option("--epochs", tr_cfg.max_epochs, "max epochs");
  tr->add_option("--batch-size", tr_cfg.batch_size, "batch size");
  tr->add_option("--patience", tr_cfg.patience, "evals without improvement before stop");
  tr->add_option("--eval-every", tr_cfg.eval_every, "epochs between dev evaluations");
  tr->add_option("--seed", tr_cfg.seed, "rng seed");
  tr->add_flag("--verbose", tr_cfg.verbose, "per-epoch progress on stderr");
  tr_widths.attach(tr);

  // decode
  std::string de_params, de_manifest, de_out, de_text_out;
  int de_beam = 4, de_max_len = -1;
  double de_alpha = 0.8;
  bool de_greedy = false;
  auto* de = app.add_subcommand("decode", "beam-search transcription");
  de->add_option("--model", de_params, "checkpoint .params path")->required();
  de->add_option("--manifest", de_manifest, "utterances to decode")->required();
  de->add_option("--out", de_out, "JSON-lines output {id, transcript, score}")->required();
  de->add_option("--text-out", de_text_out, "plain transcripts, one per line");
  de->add_option("--beam", de_beam, "beam size");
  de->add_option("--alpha", de_alpha, "length-normalization weight");
  de->add_option("--max-len", de_max_len, "decode step limit (-1: 3x source length)");
  de->add_flag("--greedy", de_greedy, "greedy decoding instead of beam");

  // score
  std::string sc_metric, sc_ref, sc_hyp;
  bool sc_smooth = false;
  auto* sc = app.add_subcommand("score", "corpus metric over parallel line files");
  sc->add_option("--metric", sc_metric, "cer | wer | bleu")->required();
  sc->add_option("--ref", sc_ref, "reference lines")->required();
  sc->add_option("--hyp", sc_hyp, "hypothesis lines")->required();
  sc->add_flag("--smooth", sc_smooth, "add-one BLEU smoothing");

  // folds
  std::vector<std::string> fo_groups;
  int fo_k = 10;
  std::string fo_out, fo_train_cmd;
  auto* fo = app.add_subcommand("folds", "cross-validation driver");
  fo->add_option("--groups", fo_groups, "per-narrative manifests")
      ->required()
      ->delimiter(',');
  fo->add_option("--k", fo_k, "fold count (must equal group count)");
  fo->add_option("--out", fo_out, "output directory")->required();
  fo->add_option("--train-cmd", fo_train_cmd,
                 "command template with {train} {dev} {test} {out} {fold}; "
                 "should leave {out}/hyp.txt for the report");

  // dump-attention
  std::string da_params, da_manifest, da_out;
  auto* da = app.add_subcommand("dump-attention",
                                "forced-decode attention records per utterance");
  da->add_option("--model", da_params, "checkpoint .params path")->required();
  da->add_option("--manifest", da_manifest, "utterances with references")->required();
  da->add_option("--out", da_out, "dump file")->required();

  // plot-attention
  std::string pa_dump, pa_utt, pa_out;
  int pa_source = 1;
  auto* pa = app.add_subcommand("plot-attention", "text heatmap of one record");
  pa->add_option("--dump", pa_dump, "attention dump")->required();
  pa->add_option("--utt", pa_utt, "utterance id")->required();
  pa->add_option("--source", pa_source, "1 (speech) or 2 (text)");
  pa->add_option("--out", pa_out, "output file (default stdout)");

  // force-align-score
  std::string fa_dump, fa_spans, fa_manifest, fa_weighting = "token";
  auto* fa = app.add_subcommand("force-align-score",
                                "attention accuracy against alignment spans");
  fa->add_option("--dump", fa_dump, "attention dump from dump-attention")->required();
  fa->add_option("--spans", fa_spans, "utt\\tword\\tstart\\tend lines")->required();
  fa->add_option("--manifest", fa_manifest, "manifest with features")->required();
  fa->add_option("--weighting", fa_weighting, "token (default) or utterance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_cfg, synth_out);
    if (ef->parsed()) return cmd_extract_features(ef_manifest, ef_outdir, ef_out_manifest);
    if (tr->parsed())
      return cmd_train(tr_train, tr_dev, tr_topology, tr_attention, tr_widths,
                       tr_cfg, tr_out);
    if (de->parsed())
      return cmd_decode(de_params, de_manifest, de_out, de_text_out, de_beam,
                        de_alpha, de_max_len, de_greedy);
    if (sc->parsed()) return cmd_score(sc_metric, sc_ref, sc_hyp, sc_smooth);
    if (fo->parsed()) return cmd_folds(fo_groups, fo_k, fo_out, fo_train_cmd);
    if (da->parsed()) return cmd_dump_attention(da_params, da_manifest, da_out);
    if (pa->parsed()) return cmd_plot_attention(pa_dump, pa_utt, pa_source, pa_out);
    if (fa->parsed())
      return cmd_force_align_score(fa_dump, fa_spans, fa_manifest, fa_weighting);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

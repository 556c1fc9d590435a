#ifndef MSAT_CORPUS_SYNTH_H_
#define MSAT_CORPUS_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

namespace msat {

// Synthetic parallel corpus for desk-scale verification. Targets are
// random strings over a small alphabet; "speech" is a fixed 39-dim
// template per character (4-8 frames) plus seeded Gaussian noise;
// translations are an invertible character-substitution encoding of the
// target. With homophone_rate > 0, pairs of characters share one acoustic
// template (same pattern and duration) while staying distinct in the
// translation, so the text source carries information the audio cannot.
struct SynthConfig {
  uint64_t seed = 1;
  int n_utts = 300;
  int alphabet_size = 12;
  double homophone_rate = 0.0;
  int min_len = 5;
  int max_len = 10;
  int min_frames_per_char = 4;
  int max_frames_per_char = 8;
  double noise_sd = 0.1;
  double train_frac = 0.8;
  double dev_frac = 0.1;
};

struct SynthPaths {
  std::string train_manifest;
  std::string dev_manifest;
  std::string test_manifest;
  std::string train_spans;
  std::string dev_spans;
  std::string test_spans;
};

// Writes features/<id>.plpf, {train,dev,test}.tsv and matching span files
// (character-level forced alignments) under out_dir.
SynthPaths synth_corpus(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace msat

#endif  // MSAT_CORPUS_SYNTH_H_

#ifndef MSAT_FRONTEND_PLP_H_
#define MSAT_FRONTEND_PLP_H_

#include <memory>
#include <vector>

#include "frontend/wav.h"

namespace msat {

// T x 39 feature frames: 13 PLP cepstra plus delta and delta-delta.
struct FeatureMatrix {
  int frames = 0;
  int width = 0;
  std::vector<double> data;  // row-major

  static constexpr int kWidth = 39;
  static constexpr int kFrameShiftMs = 10;
  static constexpr int kFrameWidthMs = 25;

  double at(int t, int d) const { return data[static_cast<size_t>(t) * width + d]; }
  double& at(int t, int d) { return data[static_cast<size_t>(t) * width + d]; }
};

// Frame count for S samples: 1 + floor((S - W) / H) with W = 25 ms and
// H = 10 ms worth of samples. Throws InputError when S < W.
int frame_count(size_t num_samples, int sample_rate);

// Overlapping 25 ms frames every 10 ms, Hamming-windowed.
std::vector<std::vector<double>> frame_signal(const AudioBuffer& audio);

// Perceptual linear prediction: power spectrum -> Bark critical bands ->
// equal-loudness weighting -> cube-root compression -> autoregressive
// model via Levinson-Durbin -> 13 cepstra, then deltas to 39 dims.
// Normalization is a separate, corpus-level step (see FeatureNormalizer).
class PlpExtractor {
 public:
  explicit PlpExtractor(int sample_rate, int order = 12);
  ~PlpExtractor();
  PlpExtractor(const PlpExtractor&) = delete;
  PlpExtractor& operator=(const PlpExtractor&) = delete;

  FeatureMatrix features(const AudioBuffer& audio);

  // Bark-integrated band energies of one windowed frame, before the
  // loudness curve. Exposed so tests can locate spectral peaks.
  std::vector<double> critical_band_energies(const std::vector<double>& frame);

  int num_bands() const { return static_cast<int>(center_hz_.size()); }
  double band_center_hz(int b) const { return center_hz_[b]; }

 private:
  std::vector<double> cepstra(const std::vector<double>& frame);

  int sample_rate_;
  int order_;
  int win_;
  int nfft_;
  std::vector<double> center_hz_;
  std::vector<double> loudness_;                  // per band
  std::vector<std::vector<double>> band_weights_;  // band -> per-bin weight
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

// Appends first- and second-order regression deltas (+/- 2 frames, edges
// clamped) to a T x 13 cepstral matrix, giving T x 39.
FeatureMatrix add_deltas(const std::vector<std::vector<double>>& cepstra);

}  // namespace msat

#endif  // MSAT_FRONTEND_PLP_H_

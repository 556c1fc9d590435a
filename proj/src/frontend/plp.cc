#include "frontend/plp.h"

#include <fftw3.h>

#include <cmath>
#include <cstring>

#include "util/errors.h"

namespace msat {

namespace {

constexpr double kPowerFloor = 1e-10;

double bark(double hz) { return 6.0 * std::asinh(hz / 600.0); }

// Critical-band masking curve around a center, in bark offsets.
double band_shape(double d) {
  if (d < -1.3 || d > 2.5) return 0.0;
  if (d < -0.5) return std::pow(10.0, 2.5 * (d + 0.5));
  if (d <= 0.5) return 1.0;
  return std::pow(10.0, -(d - 0.5));
}

// Equal-loudness pre-emphasis at a given frequency.
double equal_loudness(double hz) {
  double w2 = std::pow(2.0 * M_PI * hz, 2.0);
  double num = (w2 + 56.8e6) * w2 * w2;
  double den = std::pow(w2 + 6.3e6, 2.0) * (w2 + 0.38e9);
  return num / den;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Durbin recursion: r[0..p] -> predictor a[1..p] and residual power.
void levinson(const std::vector<double>& r, int p, std::vector<double>& a,
              double* err_out) {
  a.assign(p + 1, 0.0);
  double err = r[0];
  for (int i = 1; i <= p; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc -= a[j] * r[i - j];
    double k = acc / err;
    a[i] = k;
    for (int j = 1; j <= i / 2; ++j) {
      double tmp = a[j] - k * a[i - j];
      a[i - j] -= k * a[j];
      a[j] = tmp;
    }
    err *= (1.0 - k * k);
  }
  *err_out = err;
}

}  // namespace

int frame_count(size_t num_samples, int sample_rate) {
  if (sample_rate != 8000 && sample_rate != 16000)
    throw InputError("unsupported sample rate " + std::to_string(sample_rate) +
                     " (need 8000 or 16000)");
  size_t win = static_cast<size_t>(sample_rate) * FeatureMatrix::kFrameWidthMs / 1000;
  size_t hop = static_cast<size_t>(sample_rate) * FeatureMatrix::kFrameShiftMs / 1000;
  if (num_samples < win)
    throw InputError("audio too short: " + std::to_string(num_samples) +
                     " samples, need at least " + std::to_string(win));
  return static_cast<int>(1 + (num_samples - win) / hop);
}

std::vector<std::vector<double>> frame_signal(const AudioBuffer& audio) {
  int t_total = frame_count(audio.samples.size(), audio.sample_rate);
  int win = audio.sample_rate * FeatureMatrix::kFrameWidthMs / 1000;
  int hop = audio.sample_rate * FeatureMatrix::kFrameShiftMs / 1000;
  std::vector<double> window(win);
  for (int n = 0; n < win; ++n)
    window[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (win - 1));
  std::vector<std::vector<double>> frames(t_total);
  for (int t = 0; t < t_total; ++t) {
    frames[t].resize(win);
    const double* src = audio.samples.data() + static_cast<size_t>(t) * hop;
    for (int n = 0; n < win; ++n) frames[t][n] = src[n] * window[n];
  }
  return frames;
}

struct PlpExtractor::Fft {
  int n;
  double* in;
  fftw_complex* out;
  fftw_plan plan;

  explicit Fft(int nfft) : n(nfft) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  ~Fft() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

PlpExtractor::PlpExtractor(int sample_rate, int order)
    : sample_rate_(sample_rate), order_(order) {
  if (sample_rate != 8000 && sample_rate != 16000)
    throw InputError("unsupported sample rate " + std::to_string(sample_rate));
  win_ = sample_rate_ * FeatureMatrix::kFrameWidthMs / 1000;
  nfft_ = next_pow2(win_);
  fft_ = std::make_unique<Fft>(nfft_);

  double nyquist = sample_rate_ / 2.0;
  int nbands = static_cast<int>(std::floor(bark(nyquist) - 0.5));
  int nbins = nfft_ / 2 + 1;
  for (int b = 1; b <= nbands; ++b) {
    // center at integer bark b; invert bark() for the physical frequency
    double hz = 600.0 * std::sinh(b / 6.0);
    center_hz_.push_back(hz);
    loudness_.push_back(equal_loudness(hz));
    std::vector<double> w(nbins, 0.0);
    for (int j = 0; j < nbins; ++j) {
      double f = static_cast<double>(j) * sample_rate_ / nfft_;
      w[j] = band_shape(bark(f) - static_cast<double>(b));
    }
    band_weights_.push_back(std::move(w));
  }
}

PlpExtractor::~PlpExtractor() = default;

std::vector<double> PlpExtractor::critical_band_energies(
    const std::vector<double>& frame) {
  if (static_cast<int>(frame.size()) != win_)
    throw ShapeError("frame length " + std::to_string(frame.size()) +
                     " does not match window " + std::to_string(win_));
  std::memcpy(fft_->in, frame.data(), win_ * sizeof(double));
  std::memset(fft_->in + win_, 0, (nfft_ - win_) * sizeof(double));
  fftw_execute(fft_->plan);
  int nbins = nfft_ / 2 + 1;
  std::vector<double> power(nbins);
  for (int j = 0; j < nbins; ++j) {
    double re = fft_->out[j][0], im = fft_->out[j][1];
    power[j] = std::max(re * re + im * im, kPowerFloor);
  }
  std::vector<double> energies(band_weights_.size(), 0.0);
  for (size_t b = 0; b < band_weights_.size(); ++b) {
    double acc = 0.0;
    const std::vector<double>& w = band_weights_[b];
    for (int j = 0; j < nbins; ++j) acc += w[j] * power[j];
    energies[b] = acc;
  }
  return energies;
}

std::vector<double> PlpExtractor::cepstra(const std::vector<double>& frame) {
  std::vector<double> bands = critical_band_energies(frame);
  int nb = static_cast<int>(bands.size());
  for (int b = 0; b < nb; ++b)
    bands[b] = std::pow(loudness_[b] * bands[b], 0.33);

  // duplicate edges, mirror to an even sequence, inverse DFT -> autocorrelation
  std::vector<double> aug(nb + 2);
  aug[0] = bands[0];
  for (int b = 0; b < nb; ++b) aug[b + 1] = bands[b];
  aug[nb + 1] = bands[nb - 1];
  int half = static_cast<int>(aug.size()) - 1;
  int len = 2 * half;
  std::vector<double> r(order_ + 1, 0.0);
  for (int k = 0; k <= order_; ++k) {
    double acc = 0.0;
    for (int j = 0; j < len; ++j) {
      double s = j <= half ? aug[j] : aug[len - j];
      acc += s * std::cos(2.0 * M_PI * j * k / len);
    }
    r[k] = acc / len;
  }

  std::vector<double> a;
  double err = 0.0;
  levinson(r, order_, a, &err);
  if (err <= 0.0) err = kPowerFloor;

  // cepstral recursion over the predictor coefficients
  std::vector<double> c(order_ + 1, 0.0);
  c[0] = std::log(err);
  for (int n = 1; n <= order_; ++n) {
    double acc = a[n];
    for (int k = 1; k < n; ++k) acc += (static_cast<double>(k) / n) * c[k] * a[n - k];
    c[n] = acc;
  }
  return c;
}

FeatureMatrix PlpExtractor::features(const AudioBuffer& audio) {
  if (audio.sample_rate != sample_rate_)
    throw InputError("audio rate " + std::to_string(audio.sample_rate) +
                     " does not match extractor rate " + std::to_string(sample_rate_));
  std::vector<std::vector<double>> frames = frame_signal(audio);
  std::vector<std::vector<double>> ceps(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) ceps[t] = cepstra(frames[t]);
  return add_deltas(ceps);
}

FeatureMatrix add_deltas(const std::vector<std::vector<double>>& cepstra) {
  int t_total = static_cast<int>(cepstra.size());
  int base = static_cast<int>(cepstra[0].size());
  FeatureMatrix out;
  out.frames = t_total;
  out.width = base * 3;
  out.data.assign(static_cast<size_t>(t_total) * out.width, 0.0);

  auto clamped = [&](const std::vector<std::vector<double>>& m, int t) -> const std::vector<double>& {
    if (t < 0) t = 0;
    if (t >= t_total) t = t_total - 1;
    return m[t];
  };

  // 2 * (1^2 + 2^2) = 10
  const double denom = 10.0;
  std::vector<std::vector<double>> delta(t_total, std::vector<double>(base));
  for (int t = 0; t < t_total; ++t)
    for (int d = 0; d < base; ++d)
      delta[t][d] = (clamped(cepstra, t + 1)[d] - clamped(cepstra, t - 1)[d] +
                     2.0 * (clamped(cepstra, t + 2)[d] - clamped(cepstra, t - 2)[d])) /
                    denom;
  for (int t = 0; t < t_total; ++t)
    for (int d = 0; d < base; ++d) {
      double dd = (clamped(delta, t + 1)[d] - clamped(delta, t - 1)[d] +
                   2.0 * (clamped(delta, t + 2)[d] - clamped(delta, t - 2)[d])) /
                  denom;
      out.at(t, d) = cepstra[t][d];
      out.at(t, base + d) = delta[t][d];
      out.at(t, 2 * base + d) = dd;
    }
  return out;
}

}  // namespace msat

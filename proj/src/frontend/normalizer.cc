#include "frontend/normalizer.h"

#include <cmath>

#include "util/errors.h"

namespace msat {

void FeatureNormalizer::fit(const std::vector<const FeatureMatrix*>& corpus) {
  if (corpus.empty()) throw InputError("normalizer: empty corpus");
  int width = corpus[0]->width;
  mean_.assign(width, 0.0);
  std_.assign(width, 0.0);
  size_t count = 0;
  for (const FeatureMatrix* m : corpus) {
    for (int t = 0; t < m->frames; ++t)
      for (int d = 0; d < width; ++d) mean_[d] += m->at(t, d);
    count += static_cast<size_t>(m->frames);
  }
  for (int d = 0; d < width; ++d) mean_[d] /= static_cast<double>(count);
  for (const FeatureMatrix* m : corpus)
    for (int t = 0; t < m->frames; ++t)
      for (int d = 0; d < width; ++d) {
        double centered = m->at(t, d) - mean_[d];
        std_[d] += centered * centered;
      }
  for (int d = 0; d < width; ++d)
    std_[d] = std::sqrt(std::max(std_[d] / static_cast<double>(count), 1e-10));
}

void FeatureNormalizer::apply(FeatureMatrix& m) const {
  if (!fitted()) throw StateError("normalizer used before fit");
  if (m.width != static_cast<int>(mean_.size()))
    throw ShapeError("normalizer width mismatch");
  for (int t = 0; t < m.frames; ++t)
    for (int d = 0; d < m.width; ++d)
      m.at(t, d) = (m.at(t, d) - mean_[d]) / std_[d];
}

void FeatureNormalizer::set(std::vector<double> mean, std::vector<double> std) {
  mean_ = std::move(mean);
  std_ = std::move(std);
}

}  // namespace msat

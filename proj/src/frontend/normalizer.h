#ifndef MSAT_FRONTEND_NORMALIZER_H_
#define MSAT_FRONTEND_NORMALIZER_H_

#include <vector>

#include "frontend/plp.h"

namespace msat {

// Per-dimension mean/variance normalization, fit on the training split
// once and stored with the checkpoint.
class FeatureNormalizer {
 public:
  void fit(const std::vector<const FeatureMatrix*>& corpus);
  void apply(FeatureMatrix& m) const;
  bool fitted() const { return !mean_.empty(); }

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& std() const { return std_; }
  void set(std::vector<double> mean, std::vector<double> std);

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

}  // namespace msat

#endif  // MSAT_FRONTEND_NORMALIZER_H_

// Test-only central finite-difference gradient oracle. Kept independent of
// the tape's backward rules: it only re-runs the caller's forward function
// at perturbed parameter values.

#ifndef MSAT_TESTS_GRADCHECK_H_
#define MSAT_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "core/tensor.h"

namespace msat::test {

inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// `forward` rebuilds the computation from scratch and returns the loss
// value. Analytic grads must already sit in each tensor's grad buffer.
// Returns the max relative error over every coordinate of every tensor.
inline double max_grad_error(const std::function<double()>& forward,
                             const std::vector<Tensor*>& params,
                             double eps = 1e-5) {
  double worst = 0.0;
  for (Tensor* t : params) {
    for (size_t k = 0; k < t->v.size(); ++k) {
      double orig = t->v[k];
      t->v[k] = orig + eps;
      double up = forward();
      t->v[k] = orig - eps;
      double down = forward();
      t->v[k] = orig;
      double fd = (up - down) / (2.0 * eps);
      worst = std::max(worst, rel_err(fd, t->g[k]));
    }
  }
  return worst;
}

}  // namespace msat::test

#endif  // MSAT_TESTS_GRADCHECK_H_

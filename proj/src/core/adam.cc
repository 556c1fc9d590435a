#include "core/adam.h"

#include <cmath>

#include "util/errors.h"

namespace msat {

void adam_step(ParameterStore& store, const AdamConfig& cfg) {
  for (size_t i = 0; i < store.size(); ++i) {
    if (!store.tensor(i).has_grad())
      throw StateError("adam_step: parameter '" + store.name(i) +
                       "' has no gradient; run backward first");
  }
  store.set_step(store.step() + 1);
  uint64_t t = store.step();
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (size_t i = 0; i < store.size(); ++i) {
    Tensor& p = store.tensor(i);
    ParameterStore::Moments& mo = store.moments(i);
    for (size_t k = 0; k < p.v.size(); ++k) {
      double g = p.g[k];
      mo.m[k] = cfg.beta1 * mo.m[k] + (1.0 - cfg.beta1) * g;
      mo.v[k] = cfg.beta2 * mo.v[k] + (1.0 - cfg.beta2) * g * g;
      double mhat = mo.m[k] / bc1;
      double vhat = mo.v[k] / bc2;
      p.v[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace msat

#ifndef MSAT_CORE_ADAM_H_
#define MSAT_CORE_ADAM_H_

#include "core/store.h"

namespace msat {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update applied in place over every parameter in the
// store. Grads are left untouched; zeroing them is the caller's step.
// Throws StateError if any parameter has no gradient buffer.
void adam_step(ParameterStore& store, const AdamConfig& cfg);

}  // namespace msat

#endif  // MSAT_CORE_ADAM_H_

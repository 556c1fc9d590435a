#ifndef MSAT_CORE_RNG_H_
#define MSAT_CORE_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace msat {

// Seeded generator with hand-rolled distributions so that streams are
// bit-identical across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t bits() { return gen_(); }

  // [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; draws two uniforms per call, no cached spare.
  double normal(double mean, double sd);

  // [0, n) without modulo bias worth worrying about at these sizes.
  size_t index(size_t n) { return static_cast<size_t>(bits() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    // Fisher-Yates; std::shuffle is implementation-defined.
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace msat

#endif  // MSAT_CORE_RNG_H_

#ifndef MSAT_CORE_STORE_H_
#define MSAT_CORE_STORE_H_

#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/rng.h"
#include "core/tensor.h"

namespace msat {

// Named learnable tensors plus their Adam moment accumulators and the
// shared step counter. Registration order is preserved; it fixes both
// checkpoint layout and update order, which keeps runs reproducible.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, int rows, int cols);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  size_t size() const { return params_.size(); }
  const std::string& name(size_t i) const { return names_[i]; }
  Tensor& tensor(size_t i) { return params_[i]; }
  const Tensor& tensor(size_t i) const { return params_[i]; }

  int64_t param_count() const;
  // Total over names starting with `prefix`.
  int64_t param_count(const std::string& prefix) const;

  void zero_grads();
  void ensure_grads();

  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  // Allocated on first use; sized like the parameter.
  Moments& moments(size_t i);
  bool has_moments(size_t i) const;
  uint64_t step() const { return step_; }
  void set_step(uint64_t s) { step_ = s; }

  // Binary checkpoint: magic, version, flag byte for moments, step counter,
  // parameter count, then per parameter name/shape/raw little-endian values
  // (followed by the two moment arrays when the flag is set).
  void save(const std::string& path, bool with_moments) const;
  static ParameterStore load(const std::string& path);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, size_t> index_;
  std::deque<Tensor> params_;  // deque: references stay valid as it grows
  std::deque<Moments> moments_;
  uint64_t step_ = 0;
};

// Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))), drawing
// row-major so a fixed seed reproduces the same tensor bit for bit.
void init_glorot(Tensor& t, Rng& rng);
void fill_constant(Tensor& t, double value);

}  // namespace msat

#endif  // MSAT_CORE_STORE_H_

#ifndef MSAT_CORE_TENSOR_H_
#define MSAT_CORE_TENSOR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "util/errors.h"

namespace msat {

// Dense row-major matrix of doubles. Vectors are stored as n x 1.
// The gradient buffer stays empty until the tensor joins a recorded
// computation (or ensure_grad is called), and always matches the value
// shape once allocated.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;
  std::vector<double> g;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {
    if (r <= 0 || c <= 0) throw ShapeError("tensor dimensions must be positive");
  }

  int64_t size() const { return static_cast<int64_t>(rows) * cols; }
  bool has_grad() const { return !g.empty(); }
  void ensure_grad() {
    if (g.empty()) g.assign(v.size(), 0.0);
  }
  void zero_grad() {
    for (double& x : g) x = 0.0;
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

inline std::string shape_str(int rows, int cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

}  // namespace msat

#endif  // MSAT_CORE_TENSOR_H_

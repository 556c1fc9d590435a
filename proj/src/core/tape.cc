#include "core/tape.h"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <memory>

namespace msat {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

Tape::Tape(size_t reserve_hint) { nodes_.reserve(reserve_hint); }

Var Tape::push(int rows, int cols) {
  if (rows <= 0 || cols <= 0)
    throw ShapeError("empty tensor " + shape_str(rows, cols));
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.val.assign(static_cast<size_t>(rows) * cols, 0.0);
  n.vptr = n.val.data();
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::param(Tensor& t) {
  auto it = param_vars_.find(&t);
  if (it != param_vars_.end()) return Var{it->second};
  t.ensure_grad();
  Node n;
  n.rows = t.rows;
  n.cols = t.cols;
  n.vptr = t.v.data();
  n.ext = &t;
  n.back = [](Tape&, Node& self) {
    for (size_t i = 0; i < self.grad.size(); ++i) self.ext->g[i] += self.grad[i];
  };
  nodes_.push_back(std::move(n));
  int32_t idx = static_cast<int32_t>(nodes_.size() - 1);
  param_vars_.emplace(&t, idx);
  return Var{idx};
}

Var Tape::constant(int rows, int cols, const double* data) {
  Var v = push(rows, cols);
  Node& n = nodes_[v.idx];
  std::memcpy(n.val.data(), data, n.val.size() * sizeof(double));
  return v;
}

Var Tape::zeros(int rows, int cols) { return push(rows, cols); }

double Tape::scalar(Var v) const {
  const Node& n = node(v);
  if (n.rows != 1 || n.cols != 1)
    throw ShapeError("expected scalar, got " + shape_str(n.rows, n.cols));
  return n.vptr[0];
}

Var Tape::matmul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.cols != nb.rows)
    throw ShapeError("matmul dimension mismatch " + shape_str(na.rows, na.cols) +
                     " x " + shape_str(nb.rows, nb.cols));
  int m = na.rows, k = na.cols, n = nb.cols;
  Var out = push(m, n);
  Node& o = nodes_[out.idx];
  CMap A(node(a).vptr, m, k);
  CMap B(node(b).vptr, k, n);
  MMap(o.val.data(), m, n).noalias() = A * B;
  int ai = a.idx, bi = b.idx;
  o.back = [ai, bi, m, k, n](Tape& t, Node& self) {
    CMap G(self.grad.data(), m, n);
    CMap A(t.nodes_[ai].vptr, m, k);
    CMap B(t.nodes_[bi].vptr, k, n);
    MMap(t.grad_buf(ai).data(), m, k).noalias() += G * B.transpose();
    MMap(t.grad_buf(bi).data(), k, n).noalias() += A.transpose() * G;
  };
  return out;
}

Var Tape::add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols)
    throw ShapeError("add shape mismatch " + shape_str(na.rows, na.cols) + " vs " +
                     shape_str(nb.rows, nb.cols));
  Var out = push(na.rows, na.cols);
  Node& o = nodes_[out.idx];
  const double* pa = node(a).vptr;
  const double* pb = node(b).vptr;
  for (size_t i = 0; i < o.val.size(); ++i) o.val[i] = pa[i] + pb[i];
  int ai = a.idx, bi = b.idx;
  o.back = [ai, bi](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    std::vector<double>& gb = t.grad_buf(bi);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      ga[i] += self.grad[i];
      gb[i] += self.grad[i];
    }
  };
  return out;
}

Var Tape::scale(Var a, double s) {
  const Node& na = node(a);
  Var out = push(na.rows, na.cols);
  Node& o = nodes_[out.idx];
  const double* pa = node(a).vptr;
  for (size_t i = 0; i < o.val.size(); ++i) o.val[i] = s * pa[i];
  int ai = a.idx;
  o.back = [ai, s](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += s * self.grad[i];
  };
  return out;
}

Var Tape::mul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols)
    throw ShapeError("mul shape mismatch " + shape_str(na.rows, na.cols) + " vs " +
                     shape_str(nb.rows, nb.cols));
  Var out = push(na.rows, na.cols);
  Node& o = nodes_[out.idx];
  const double* pa = node(a).vptr;
  const double* pb = node(b).vptr;
  for (size_t i = 0; i < o.val.size(); ++i) o.val[i] = pa[i] * pb[i];
  int ai = a.idx, bi = b.idx;
  o.back = [ai, bi](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    std::vector<double>& gb = t.grad_buf(bi);
    const double* pa = t.nodes_[ai].vptr;
    const double* pb = t.nodes_[bi].vptr;
    for (size_t i = 0; i < self.grad.size(); ++i) {
      ga[i] += self.grad[i] * pb[i];
      gb[i] += self.grad[i] * pa[i];
    }
  };
  return out;
}

Var Tape::tanh(Var a) {
  const Node& na = node(a);
  Var out = push(na.rows, na.cols);
  Node& o = nodes_[out.idx];
  const double* pa = node(a).vptr;
  for (size_t i = 0; i < o.val.size(); ++i) o.val[i] = std::tanh(pa[i]);
  int ai = a.idx, oi = out.idx;
  o.back = [ai, oi](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    const double* y = t.nodes_[oi].vptr;
    for (size_t i = 0; i < self.grad.size(); ++i)
      ga[i] += self.grad[i] * (1.0 - y[i] * y[i]);
  };
  return out;
}

static inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Var Tape::sigmoid(Var a) {
  const Node& na = node(a);
  Var out = push(na.rows, na.cols);
  Node& o = nodes_[out.idx];
  const double* pa = node(a).vptr;
  for (size_t i = 0; i < o.val.size(); ++i) o.val[i] = stable_sigmoid(pa[i]);
  int ai = a.idx, oi = out.idx;
  o.back = [ai, oi](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    const double* y = t.nodes_[oi].vptr;
    for (size_t i = 0; i < self.grad.size(); ++i)
      ga[i] += self.grad[i] * y[i] * (1.0 - y[i]);
  };
  return out;
}

Var Tape::concat(Var a, Var b, int axis) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (axis == 0) {
    if (na.cols != nb.cols)
      throw ShapeError("concat axis 0 needs equal cols: " +
                       shape_str(na.rows, na.cols) + " vs " +
                       shape_str(nb.rows, nb.cols));
    int ra = na.rows, rb = nb.rows, c = na.cols;
    Var out = push(ra + rb, c);
    Node& o = nodes_[out.idx];
    size_t asz = static_cast<size_t>(ra) * c;
    std::memcpy(o.val.data(), node(a).vptr, asz * sizeof(double));
    std::memcpy(o.val.data() + asz, node(b).vptr,
                static_cast<size_t>(rb) * c * sizeof(double));
    int ai = a.idx, bi = b.idx;
    o.back = [ai, bi, asz](Tape& t, Node& self) {
      std::vector<double>& ga = t.grad_buf(ai);
      std::vector<double>& gb = t.grad_buf(bi);
      for (size_t i = 0; i < asz; ++i) ga[i] += self.grad[i];
      for (size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[asz + i];
    };
    return out;
  }
  if (axis == 1) {
    if (na.rows != nb.rows)
      throw ShapeError("concat axis 1 needs equal rows: " +
                       shape_str(na.rows, na.cols) + " vs " +
                       shape_str(nb.rows, nb.cols));
    int r = na.rows, ca = na.cols, cb = nb.cols;
    Var out = push(r, ca + cb);
    Node& o = nodes_[out.idx];
    const double* pa = node(a).vptr;
    const double* pb = node(b).vptr;
    for (int i = 0; i < r; ++i) {
      std::memcpy(o.val.data() + static_cast<size_t>(i) * (ca + cb), pa + static_cast<size_t>(i) * ca,
                  ca * sizeof(double));
      std::memcpy(o.val.data() + static_cast<size_t>(i) * (ca + cb) + ca,
                  pb + static_cast<size_t>(i) * cb, cb * sizeof(double));
    }
    int ai = a.idx, bi = b.idx;
    o.back = [ai, bi, r, ca, cb](Tape& t, Node& self) {
      std::vector<double>& ga = t.grad_buf(ai);
      std::vector<double>& gb = t.grad_buf(bi);
      for (int i = 0; i < r; ++i) {
        const double* gr = self.grad.data() + static_cast<size_t>(i) * (ca + cb);
        for (int j = 0; j < ca; ++j) ga[static_cast<size_t>(i) * ca + j] += gr[j];
        for (int j = 0; j < cb; ++j) gb[static_cast<size_t>(i) * cb + j] += gr[ca + j];
      }
    };
    return out;
  }
  throw ShapeError("concat axis must be 0 or 1");
}

Var Tape::hstack(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("hstack of zero columns");
  int r = node(parts[0]).rows;
  int total = 0;
  for (Var p : parts) {
    if (node(p).rows != r) throw ShapeError("hstack needs equal heights");
    total += node(p).cols;
  }
  Var out = push(r, total);
  Node& o = nodes_[out.idx];
  std::vector<int32_t> idxs;
  std::vector<int> widths;
  idxs.reserve(parts.size());
  int off = 0;
  for (Var p : parts) {
    const Node& np = node(p);
    for (int i = 0; i < r; ++i)
      std::memcpy(o.val.data() + static_cast<size_t>(i) * total + off,
                  np.vptr + static_cast<size_t>(i) * np.cols, np.cols * sizeof(double));
    idxs.push_back(p.idx);
    widths.push_back(np.cols);
    off += np.cols;
  }
  o.back = [idxs, widths, r, total](Tape& t, Node& self) {
    int off = 0;
    for (size_t p = 0; p < idxs.size(); ++p) {
      std::vector<double>& gp = t.grad_buf(idxs[p]);
      int w = widths[p];
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < w; ++j)
          gp[static_cast<size_t>(i) * w + j] +=
              self.grad[static_cast<size_t>(i) * total + off + j];
      off += w;
    }
  };
  return out;
}

Var Tape::slice_rows(Var a, int r0, int r1) {
  const Node& na = node(a);
  if (r0 < 0 || r1 > na.rows || r0 >= r1)
    throw ShapeError("slice_rows [" + std::to_string(r0) + "," + std::to_string(r1) +
                     ") out of " + shape_str(na.rows, na.cols));
  int c = na.cols;
  Var out = push(r1 - r0, c);
  Node& o = nodes_[out.idx];
  std::memcpy(o.val.data(), node(a).vptr + static_cast<size_t>(r0) * c,
              o.val.size() * sizeof(double));
  int ai = a.idx;
  size_t base = static_cast<size_t>(r0) * c;
  o.back = [ai, base](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    for (size_t i = 0; i < self.grad.size(); ++i) ga[base + i] += self.grad[i];
  };
  return out;
}

Var Tape::tile_cols(Var v, int n) {
  const Node& nv = node(v);
  if (nv.cols != 1) throw ShapeError("tile_cols expects a column vector");
  if (n < 1) throw ShapeError("tile_cols needs n >= 1");
  int r = nv.rows;
  Var out = push(r, n);
  Node& o = nodes_[out.idx];
  const double* pv = node(v).vptr;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) o.val[static_cast<size_t>(i) * n + j] = pv[i];
  int vi = v.idx;
  o.back = [vi, r, n](Tape& t, Node& self) {
    std::vector<double>& gv = t.grad_buf(vi);
    for (int i = 0; i < r; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += self.grad[static_cast<size_t>(i) * n + j];
      gv[i] += s;
    }
  };
  return out;
}

Var Tape::reshape(Var a, int rows, int cols) {
  const Node& na = node(a);
  if (static_cast<int64_t>(na.rows) * na.cols != static_cast<int64_t>(rows) * cols)
    throw ShapeError("reshape " + shape_str(na.rows, na.cols) + " -> " +
                     shape_str(rows, cols) + " changes element count");
  Var out = push(rows, cols);
  Node& o = nodes_[out.idx];
  std::memcpy(o.val.data(), node(a).vptr, o.val.size() * sizeof(double));
  int ai = a.idx;
  o.back = [ai](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
  };
  return out;
}

Var Tape::embedding_lookup(Var table, int index) {
  const Node& nt = node(table);
  if (index < 0 || index >= nt.rows)
    throw InputError("embedding index " + std::to_string(index) +
                     " outside table with " + std::to_string(nt.rows) + " rows");
  int d = nt.cols;
  Var out = push(d, 1);
  Node& o = nodes_[out.idx];
  std::memcpy(o.val.data(), node(table).vptr + static_cast<size_t>(index) * d,
              d * sizeof(double));
  int ti = table.idx;
  o.back = [ti, index, d](Tape& t, Node& self) {
    std::vector<double>& gt = t.grad_buf(ti);
    for (int j = 0; j < d; ++j) gt[static_cast<size_t>(index) * d + j] += self.grad[j];
  };
  return out;
}

Var Tape::softmax(Var x) {
  const Node& nx = node(x);
  if (nx.rows != 1 && nx.cols != 1)
    throw ShapeError("softmax expects a vector, got " + shape_str(nx.rows, nx.cols));
  Var out = push(nx.rows, nx.cols);
  Node& o = nodes_[out.idx];
  const double* px = node(x).vptr;
  size_t n = o.val.size();
  double mx = px[0];
  for (size_t i = 1; i < n; ++i) mx = std::max(mx, px[i]);
  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    o.val[i] = std::exp(px[i] - mx);
    z += o.val[i];
  }
  for (size_t i = 0; i < n; ++i) o.val[i] /= z;
  int xi = x.idx, oi = out.idx;
  o.back = [xi, oi](Tape& t, Node& self) {
    std::vector<double>& gx = t.grad_buf(xi);
    const double* y = t.nodes_[oi].vptr;
    double dot = 0.0;
    for (size_t i = 0; i < self.grad.size(); ++i) dot += self.grad[i] * y[i];
    for (size_t i = 0; i < self.grad.size(); ++i)
      gx[i] += y[i] * (self.grad[i] - dot);
  };
  return out;
}

Var Tape::sum(Var a) {
  const Node& na = node(a);
  Var out = push(1, 1);
  Node& o = nodes_[out.idx];
  const double* pa = node(a).vptr;
  double s = 0.0;
  for (size_t i = 0; i < static_cast<size_t>(na.rows) * na.cols; ++i) s += pa[i];
  o.val[0] = s;
  int ai = a.idx;
  o.back = [ai](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    for (double& g : ga) g += self.grad[0];
  };
  return out;
}

Var Tape::cross_entropy(Var logits, int target) {
  const Node& nl = node(logits);
  if (nl.rows != 1 && nl.cols != 1)
    throw ShapeError("cross_entropy expects a logit vector");
  int n = static_cast<int>(nl.rows) * nl.cols;
  if (target < 0 || target >= n)
    throw InputError("cross_entropy target " + std::to_string(target) +
                     " outside vocabulary of size " + std::to_string(n));
  Var out = push(1, 1);
  Node& o = nodes_[out.idx];
  const double* px = node(logits).vptr;
  double mx = px[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, px[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(px[i] - mx);
  double lse = mx + std::log(z);
  o.val[0] = lse - px[target];
  int li = logits.idx;
  o.back = [li, target, n, lse](Tape& t, Node& self) {
    std::vector<double>& gl = t.grad_buf(li);
    const double* px = t.nodes_[li].vptr;
    double g = self.grad[0];
    for (int i = 0; i < n; ++i) {
      double p = std::exp(px[i] - lse);
      gl[i] += g * (p - (i == target ? 1.0 : 0.0));
    }
  };
  return out;
}

Var Tape::dropout(Var a, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return a;
  const Node& na = node(a);
  Var out = push(na.rows, na.cols);
  Node& o = nodes_[out.idx];
  const double* pa = node(a).vptr;
  double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(o.val.size());
  for (size_t i = 0; i < o.val.size(); ++i) {
    (*mask)[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    o.val[i] = pa[i] * (*mask)[i];
  }
  int ai = a.idx;
  o.back = [ai, mask](Tape& t, Node& self) {
    std::vector<double>& ga = t.grad_buf(ai);
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * (*mask)[i];
  };
  return out;
}

void Tape::backward(Var loss) {
  if (backward_done_)
    throw StateError("backward already ran on this tape; record a fresh tape");
  const Node& nl = node(loss);
  if (nl.rows != 1 || nl.cols != 1)
    throw ShapeError("backward needs a scalar loss, got " + shape_str(nl.rows, nl.cols));
  backward_done_ = true;
  for (int32_t i = 0; i <= loss.idx; ++i)
    nodes_[i].grad.assign(static_cast<size_t>(nodes_[i].rows) * nodes_[i].cols, 0.0);
  nodes_[loss.idx].grad[0] = 1.0;
  for (int32_t i = loss.idx; i >= 0; --i) {
    if (nodes_[i].back) nodes_[i].back(*this, nodes_[i]);
  }
}

}  // namespace msat

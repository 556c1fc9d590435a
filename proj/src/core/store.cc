#include "core/store.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "util/errors.h"

namespace msat {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'P', 'K'};
constexpr uint8_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t x) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_u64(std::ostream& os, uint64_t x) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double d) {
  put_u64(os, std::bit_cast<uint64_t>(d));
}

struct Reader {
  std::ifstream in;
  size_t offset = 0;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {}

  void need(char* dst, size_t n) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n)
      throw FormatError("checkpoint truncated at byte offset " +
                        std::to_string(offset));
    offset += n;
  }
  uint32_t u32() {
    char b[4];
    need(b, 4);
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i)
      x |= static_cast<uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return x;
  }
  uint64_t u64() {
    char b[8];
    need(b, 8);
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i)
      x |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64_array(std::vector<double>& dst) {
    for (double& d : dst) d = f64();
  }
};

}  // namespace

Tensor& ParameterStore::add(const std::string& name, int rows, int cols) {
  if (index_.count(name))
    throw StateError("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  names_.push_back(name);
  params_.emplace_back(rows, cols);
  moments_.emplace_back();
  return params_.back();
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("unknown parameter: " + name);
  return params_[it->second];
}

const Tensor& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

int64_t ParameterStore::param_count() const {
  int64_t total = 0;
  for (const Tensor& t : params_) total += t.size();
  return total;
}

int64_t ParameterStore::param_count(const std::string& prefix) const {
  int64_t total = 0;
  for (size_t i = 0; i < params_.size(); ++i)
    if (names_[i].rfind(prefix, 0) == 0) total += params_[i].size();
  return total;
}

void ParameterStore::zero_grads() {
  for (Tensor& t : params_) t.zero_grad();
}

void ParameterStore::ensure_grads() {
  for (Tensor& t : params_) t.ensure_grad();
}

ParameterStore::Moments& ParameterStore::moments(size_t i) {
  Moments& mo = moments_[i];
  if (mo.m.empty()) {
    mo.m.assign(params_[i].v.size(), 0.0);
    mo.v.assign(params_[i].v.size(), 0.0);
  }
  return mo;
}

bool ParameterStore::has_moments(size_t i) const { return !moments_[i].m.empty(); }

void ParameterStore::save(const std::string& path, bool with_moments) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));
  os.put(static_cast<char>(with_moments ? 1 : 0));
  put_u64(os, step_);
  put_u32(os, static_cast<uint32_t>(params_.size()));
  for (size_t i = 0; i < params_.size(); ++i) {
    const Tensor& t = params_[i];
    put_u32(os, static_cast<uint32_t>(names_[i].size()));
    os.write(names_[i].data(), static_cast<std::streamsize>(names_[i].size()));
    put_u32(os, 2);
    put_u32(os, static_cast<uint32_t>(t.rows));
    put_u32(os, static_cast<uint32_t>(t.cols));
    for (double d : t.v) put_f64(os, d);
    if (with_moments) {
      const Moments& mo = moments_[i];
      if (mo.m.empty()) {
        for (size_t k = 0; k < t.v.size(); ++k) put_f64(os, 0.0);
        for (size_t k = 0; k < t.v.size(); ++k) put_f64(os, 0.0);
      } else {
        for (double d : mo.m) put_f64(os, d);
        for (double d : mo.v) put_f64(os, d);
      }
    }
  }
  if (!os) throw FormatError("short write on checkpoint: " + path);
}

ParameterStore ParameterStore::load(const std::string& path) {
  Reader r(path);
  if (!r.in) throw FormatError("cannot open checkpoint: " + path);
  char magic[4];
  r.need(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad checkpoint magic at byte offset 0");
  char version;
  r.need(&version, 1);
  if (version != static_cast<char>(kVersion))
    throw FormatError("unsupported checkpoint version at byte offset 4");
  char flags;
  r.need(&flags, 1);
  bool with_moments = flags & 1;
  ParameterStore store;
  store.step_ = r.u64();
  uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = r.u32();
    std::string name(name_len, '\0');
    r.need(name.data(), name_len);
    uint32_t rank = r.u32();
    if (rank != 2)
      throw FormatError("unsupported tensor rank " + std::to_string(rank) +
                        " at byte offset " + std::to_string(r.offset - 4));
    uint32_t rows = r.u32();
    uint32_t cols = r.u32();
    if (rows == 0 || cols == 0)
      throw FormatError("zero dimension at byte offset " + std::to_string(r.offset));
    Tensor& t = store.add(name, static_cast<int>(rows), static_cast<int>(cols));
    r.f64_array(t.v);
    if (with_moments) {
      Moments& mo = store.moments(store.size() - 1);
      r.f64_array(mo.m);
      r.f64_array(mo.v);
    }
  }
  return store;
}

void init_glorot(Tensor& t, Rng& rng) {
  double limit = std::sqrt(6.0 / (t.rows + t.cols));
  for (double& x : t.v) x = rng.uniform(-limit, limit);
}

void fill_constant(Tensor& t, double value) {
  for (double& x : t.v) x = value;
}

}  // namespace msat

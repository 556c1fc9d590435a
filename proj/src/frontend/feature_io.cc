#include "frontend/feature_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "util/errors.h"

namespace msat {

namespace {
constexpr char kMagic[4] = {'P', 'L', 'P', 'F'};
constexpr uint8_t kVersion = 1;
}  // namespace

void save_features(const FeatureMatrix& m, const std::string& path) {
  if (m.width != FeatureMatrix::kWidth)
    throw FormatError("refusing to write features of width " + std::to_string(m.width));
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open feature file for writing: " + path);
  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));
  auto put_u32 = [&](uint32_t x) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
    os.write(b, 4);
  };
  put_u32(static_cast<uint32_t>(m.frames));
  put_u32(static_cast<uint32_t>(m.width));
  for (double d : m.data) {
    uint64_t x = std::bit_cast<uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
    os.write(b, 8);
  }
  if (!os) throw FormatError("short write on feature file: " + path);
}

FeatureMatrix load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open feature file: " + path);
  size_t offset = 0;
  auto need = [&](char* dst, size_t n, const char* what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n)
      throw FormatError("feature file " + path + ": truncated " + what +
                        " at byte offset " + std::to_string(offset));
    offset += n;
  };
  char magic[4];
  need(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("feature file " + path + ": bad magic at byte offset 0");
  char version;
  need(&version, 1, "version");
  if (version != static_cast<char>(kVersion))
    throw FormatError("feature file " + path + ": unsupported version at byte offset 4");
  auto rd_u32 = [&](const char* what) {
    char b[4];
    need(b, 4, what);
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i)
      x |= static_cast<uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return x;
  };
  uint32_t frames = rd_u32("frame count");
  size_t width_offset = offset;
  uint32_t width = rd_u32("width");
  if (width != FeatureMatrix::kWidth)
    throw FormatError("feature file " + path + ": width " + std::to_string(width) +
                      " != 39 at byte offset " + std::to_string(width_offset));
  if (frames == 0)
    throw FormatError("feature file " + path + ": zero frames at byte offset 5");
  FeatureMatrix m;
  m.frames = static_cast<int>(frames);
  m.width = static_cast<int>(width);
  m.data.resize(static_cast<size_t>(frames) * width);
  for (double& d : m.data) {
    char b[8];
    need(b, 8, "payload");
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i)
      x |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    d = std::bit_cast<double>(x);
  }
  return m;
}

}  // namespace msat

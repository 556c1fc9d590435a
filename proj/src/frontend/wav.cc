#include "frontend/wav.h"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "util/errors.h"

namespace msat {

namespace {

uint32_t rd_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError(std::string("wav: truncated reading ") + what);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t(b[3]) << 24);
}

uint16_t rd_u16(std::istream& in, const char* what) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw FormatError(std::string("wav: truncated reading ") + what);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void wr_u32(std::ostream& os, uint32_t x) {
  char b[4] = {static_cast<char>(x & 0xff), static_cast<char>((x >> 8) & 0xff),
               static_cast<char>((x >> 16) & 0xff), static_cast<char>((x >> 24) & 0xff)};
  os.write(b, 4);
}

void wr_u16(std::ostream& os, uint16_t x) {
  char b[2] = {static_cast<char>(x & 0xff), static_cast<char>((x >> 8) & 0xff)};
  os.write(b, 2);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("wav: cannot open " + path);
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw FormatError("wav: missing RIFF header in " + path);
  rd_u32(in, "riff size");
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw FormatError("wav: not a WAVE file: " + path);

  AudioBuffer audio;
  bool got_fmt = false;
  while (in.read(tag, 4)) {
    uint32_t chunk_size = rd_u32(in, "chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      uint16_t format = rd_u16(in, "format");
      uint16_t channels = rd_u16(in, "channels");
      uint32_t rate = rd_u32(in, "rate");
      rd_u32(in, "byte rate");
      rd_u16(in, "block align");
      uint16_t bits = rd_u16(in, "bits per sample");
      if (format != 1) throw FormatError("wav: only PCM supported: " + path);
      if (channels != 1) throw FormatError("wav: only mono supported: " + path);
      if (bits != 16) throw FormatError("wav: only 16-bit supported: " + path);
      audio.sample_rate = static_cast<int>(rate);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      got_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!got_fmt) throw FormatError("wav: data chunk before fmt in " + path);
      size_t n = chunk_size / 2;
      audio.samples.resize(n);
      std::vector<char> raw(chunk_size);
      in.read(raw.data(), chunk_size);
      if (static_cast<uint32_t>(in.gcount()) != chunk_size)
        throw FormatError("wav: truncated data chunk in " + path);
      for (size_t i = 0; i < n; ++i) {
        int16_t s = static_cast<int16_t>(
            static_cast<unsigned char>(raw[2 * i]) |
            (static_cast<unsigned char>(raw[2 * i + 1]) << 8));
        audio.samples[i] = s / 32768.0;
      }
      return audio;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw FormatError("wav: no data chunk in " + path);
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("wav: cannot open for writing: " + path);
  uint32_t data_bytes = static_cast<uint32_t>(audio.samples.size() * 2);
  os.write("RIFF", 4);
  wr_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, 1);
  wr_u16(os, 1);
  wr_u32(os, static_cast<uint32_t>(audio.sample_rate));
  wr_u32(os, static_cast<uint32_t>(audio.sample_rate * 2));
  wr_u16(os, 2);
  wr_u16(os, 16);
  os.write("data", 4);
  wr_u32(os, data_bytes);
  for (double s : audio.samples) {
    double clamped = std::max(-1.0, std::min(1.0, s));
    int16_t q = static_cast<int16_t>(clamped * 32767.0);
    wr_u16(os, static_cast<uint16_t>(q));
  }
}

}  // namespace msat

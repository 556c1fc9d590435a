#ifndef MSAT_FRONTEND_WAV_H_
#define MSAT_FRONTEND_WAV_H_

#include <string>
#include <vector>

namespace msat {

// Mono audio in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;
};

// Reads 16-bit PCM mono WAV. Anything else is a FormatError.
AudioBuffer read_wav(const std::string& path);

// 16-bit PCM mono writer, used by tests and the synthetic corpus.
void write_wav(const std::string& path, const AudioBuffer& audio);

}  // namespace msat

#endif  // MSAT_FRONTEND_WAV_H_

// Exception types shared across the toolkit. The CLI catches these and
// turns them into one-line "error: ..." messages with a nonzero exit.

#ifndef MSAT_UTIL_ERRORS_H_
#define MSAT_UTIL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace msat {

// Tensor dimension mismatch.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file contents (bad magic, truncated payload, wrong field).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied data (audio too short, token outside vocabulary).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options that cannot be assembled into a model or run.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation applied in the wrong state (backward twice, missing grads).
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace msat

#endif  // MSAT_UTIL_ERRORS_H_

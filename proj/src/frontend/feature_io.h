#ifndef MSAT_FRONTEND_FEATURE_IO_H_
#define MSAT_FRONTEND_FEATURE_IO_H_

#include <string>

#include "frontend/plp.h"

namespace msat {

// Feature file: magic "PLPF", version byte, u32 frame count, u32 width
// (must be 39), then frames*width little-endian doubles, row-major.
// Round-trips are bit-exact.
void save_features(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_features(const std::string& path);

}  // namespace msat

#endif  // MSAT_FRONTEND_FEATURE_IO_H_

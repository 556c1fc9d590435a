#ifndef MSAT_TRAIN_BATCH_H_
#define MSAT_TRAIN_BATCH_H_

#include <vector>

#include "core/rng.h"
#include "nn/model.h"

namespace msat {

struct Batch {
  std::vector<size_t> indices;
};

// Buckets utterances by feature length (text length for text-only input)
// to limit padding, then chunks into batches. With an rng, ties and batch
// order are shuffled; without one the result is fully sorted.
std::vector<Batch> batch_utterances(const std::vector<Utterance>& utts,
                                    int batch_size, Rng* rng = nullptr);

}  // namespace msat

#endif  // MSAT_TRAIN_BATCH_H_

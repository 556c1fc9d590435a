#include "train/batch.h"

#include <algorithm>

#include "util/errors.h"

namespace msat {

std::vector<Batch> batch_utterances(const std::vector<Utterance>& utts,
                                    int batch_size, Rng* rng) {
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  std::vector<size_t> order(utts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (rng) rng->shuffle(order);
  auto length_of = [&](size_t i) {
    const Utterance& u = utts[i];
    if (u.features.frames > 0)
      return u.n_frames >= 0 ? u.n_frames : u.features.frames;
    return static_cast<int>(u.translation.size());
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return length_of(a) < length_of(b); });

  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    Batch b;
    size_t end = std::min(order.size(), start + batch_size);
    b.indices.assign(order.begin() + start, order.begin() + end);
    batches.push_back(std::move(b));
  }
  if (rng) rng->shuffle(batches);
  return batches;
}

}  // namespace msat

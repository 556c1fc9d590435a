#include "corpus/folds.h"

#include "util/errors.h"

namespace msat {

std::vector<FoldSpec> make_folds(size_t n_groups, int k) {
  if (k < 3) throw ConfigError("folds need k >= 3, got " + std::to_string(k));
  if (static_cast<size_t>(k) != n_groups)
    throw ConfigError("k = " + std::to_string(k) + " but " +
                      std::to_string(n_groups) + " groups were given");
  std::vector<FoldSpec> folds(k);
  for (int i = 0; i < k; ++i) {
    folds[i].test_group = i;
    folds[i].dev_group = (i + k - 1) % k;
    for (int g = 0; g < k; ++g)
      if (g != i && g != folds[i].dev_group) folds[i].train_groups.push_back(g);
  }
  return folds;
}

namespace {

// Groups can come from different directories, so resolve paths eagerly.
void append_resolved(Manifest& dst, const Manifest& src) {
  for (ManifestRow r : src.rows) {
    r.audio = src.resolve(r.audio);
    r.features = src.resolve(r.features);
    dst.rows.push_back(std::move(r));
  }
}

}  // namespace

FoldData assemble_fold(const std::vector<Manifest>& groups, const FoldSpec& spec) {
  FoldData fold;
  fold.test.split = Split::kTest;
  append_resolved(fold.test, groups[spec.test_group]);
  fold.dev.split = Split::kDev;
  append_resolved(fold.dev, groups[spec.dev_group]);
  fold.train.split = Split::kTrain;
  for (int g : spec.train_groups) append_resolved(fold.train, groups[g]);
  return fold;
}

}  // namespace msat

#ifndef MSAT_CORPUS_FOLDS_H_
#define MSAT_CORPUS_FOLDS_H_

#include <vector>

#include "corpus/manifest.h"

namespace msat {

// Rotation scheme over k narrative groups: fold i tests on group i, uses
// group (i-1) mod k as dev, and trains on the remaining k-2 groups.
struct FoldSpec {
  int test_group = 0;
  int dev_group = 0;
  std::vector<int> train_groups;
};

// k must equal the number of groups and be at least 3.
std::vector<FoldSpec> make_folds(size_t n_groups, int k);

struct FoldData {
  Manifest train;
  Manifest dev;
  Manifest test;
};

FoldData assemble_fold(const std::vector<Manifest>& groups, const FoldSpec& spec);

}  // namespace msat

#endif  // MSAT_CORPUS_FOLDS_H_

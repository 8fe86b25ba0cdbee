#ifndef OSA_FOLDS_HPP
#define OSA_FOLDS_HPP

#include <cstdint>
#include <vector>

#include "osa/subject.hpp"

namespace osa {

// One cross-validation split over window ids (indices into the selected
// sample list). Test sets across folds partition the dataset; within a fold
// the three sets are pairwise disjoint and cover everything.
struct FoldPlan {
  int fold_index = 0;  // 1-based
  std::vector<std::size_t> test_ids;
  std::vector<std::size_t> val_ids;
  std::vector<std::size_t> train_ids;
};

// Uniform draw without replacement of per_class indices from each class.
// Returns indices into `labels`, class-grouped, deterministic given seed.
// Errors: InsufficientSamples.
std::vector<std::size_t> select_samples(const std::vector<Label>& labels, std::size_t per_class,
                                        std::uint64_t seed);

// Stratified k-fold split with a per-class validation draw the same size as
// the fold's test chunk. Class remainders are spread round-robin, so fold
// sizes differ by at most one per class.
// Errors: TooFewSamples.
std::vector<FoldPlan> make_folds(const std::vector<Label>& labels, int k, std::uint64_t seed);

}  // namespace osa

#endif  // OSA_FOLDS_HPP

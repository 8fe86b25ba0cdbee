#include "osa/folds.hpp"

#include <algorithm>

#include "osa/errors.hpp"
#include "osa/rng.hpp"

namespace osa {
namespace {

std::vector<std::vector<std::size_t>> split_by_class(const std::vector<Label>& labels) {
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::Normal) by_class[0].push_back(i);
    else if (labels[i] == Label::Severe) by_class[1].push_back(i);
    else raise(ErrorCode::BadArguments, "fold planning expects Normal/Severe labels only");
  }
  return by_class;
}

}  // namespace

std::vector<std::size_t> select_samples(const std::vector<Label>& labels, std::size_t per_class,
                                        std::uint64_t seed) {
  auto by_class = split_by_class(labels);
  std::vector<std::size_t> out;
  out.reserve(2 * per_class);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& pool = by_class[c];
    if (pool.size() < per_class)
      raise(ErrorCode::InsufficientSamples,
            "class " + std::string(c == 0 ? "Normal" : "Severe") + " has " +
                std::to_string(pool.size()) + " windows, need " + std::to_string(per_class));
    Rng rng(derive_seed(seed, c));
    rng.shuffle(pool);
    pool.resize(per_class);
    std::sort(pool.begin(), pool.end());
    out.insert(out.end(), pool.begin(), pool.end());
  }
  return out;
}

std::vector<FoldPlan> make_folds(const std::vector<Label>& labels, int k, std::uint64_t seed) {
  if (k < 2) raise(ErrorCode::TooFewSamples, "need k >= 2");
  auto by_class = split_by_class(labels);
  for (const auto& pool : by_class)
    if (pool.size() < static_cast<std::size_t>(k))
      raise(ErrorCode::TooFewSamples, "each class needs at least k samples");

  // Per class: shuffle once, then chunk into k test groups; the first
  // (size % k) chunks carry one extra sample.
  std::vector<std::vector<std::vector<std::size_t>>> chunks(by_class.size());
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto pool = by_class[c];
    Rng rng(derive_seed(seed, 100 + c));
    rng.shuffle(pool);
    std::size_t base = pool.size() / static_cast<std::size_t>(k);
    std::size_t extra = pool.size() % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
      std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
      chunks[c].emplace_back(pool.begin() + pos, pool.begin() + pos + len);
      pos += len;
    }
  }

  std::vector<FoldPlan> plans;
  plans.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    FoldPlan plan;
    plan.fold_index = f + 1;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      const auto& test_chunk = chunks[c][static_cast<std::size_t>(f)];
      plan.test_ids.insert(plan.test_ids.end(), test_chunk.begin(), test_chunk.end());

      std::vector<std::size_t> rest;
      for (int g = 0; g < k; ++g)
        if (g != f)
          rest.insert(rest.end(), chunks[c][static_cast<std::size_t>(g)].begin(),
                      chunks[c][static_cast<std::size_t>(g)].end());

      // Validation mirrors the test chunk size for this class.
      Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(f) * 2 + c));
      rng.shuffle(rest);
      std::size_t val_len = std::min(test_chunk.size(), rest.size());
      plan.val_ids.insert(plan.val_ids.end(), rest.begin(), rest.begin() + val_len);
      plan.train_ids.insert(plan.train_ids.end(), rest.begin() + val_len, rest.end());
    }
    std::sort(plan.test_ids.begin(), plan.test_ids.end());
    std::sort(plan.val_ids.begin(), plan.val_ids.end());
    std::sort(plan.train_ids.begin(), plan.train_ids.end());
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace osa

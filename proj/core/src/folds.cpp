#include "cpce/folds.hpp"

#include <algorithm>

#include "cpce/errors.hpp"
#include "cpce/rng.hpp"

namespace cpce {

FoldPlan MakeFoldPlan(Index n, FoldScheme scheme, int k, std::uint64_t seed) {
  if (scheme == FoldScheme::kThreeWay) k = 3;
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (n < static_cast<Index>(k)) {
    throw ConfigError("cannot split " + std::to_string(n) + " rows into " +
                      std::to_string(k) + " non-empty folds");
  }
  Rng rng(MixSeed(seed, 0xF01DF01DULL));
  const std::vector<std::size_t> perm =
      rng.Permutation(static_cast<std::size_t>(n));
  FoldPlan plan;
  plan.scheme = scheme;
  plan.folds.assign(static_cast<std::size_t>(k), {});
  for (std::size_t pos = 0; pos < perm.size(); ++pos) {
    plan.folds[pos % static_cast<std::size_t>(k)].push_back(
        static_cast<Index>(perm[pos]));
  }
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

}  // namespace cpce

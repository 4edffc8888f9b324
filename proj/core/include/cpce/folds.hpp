#pragma once

#include <cstdint>
#include <vector>

#include "cpce/sample_table.hpp"

namespace cpce {

enum class FoldScheme { kKFold, kThreeWay };

// Disjoint row partitions. For kThreeWay the three parts play fixed roles:
// part 0 trains nuisances, part 1 trains the denominator regression,
// part 2 carries the final pseudo-outcome regression.
struct FoldPlan {
  FoldScheme scheme = FoldScheme::kKFold;
  std::vector<std::vector<Index>> folds;  // each sorted ascending
};

// Deterministic in (n, scheme, k, seed); every fold is non-empty and the
// sizes differ by at most one. For kThreeWay, k is forced to 3.
FoldPlan MakeFoldPlan(Index n, FoldScheme scheme, int k, std::uint64_t seed);

}  // namespace cpce

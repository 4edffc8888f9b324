#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "cpce/errors.hpp"

namespace cpce {

using Index = Eigen::Index;

// Principal stratum, labeled by the pair of potential intermediate values
// (value under assignment 1, value under assignment 0).
enum class Stratum { k00 = 0, k10 = 1, k11 = 2 };

inline const char* StratumLabel(Stratum u) {
  switch (u) {
    case Stratum::k00: return "00";
    case Stratum::k10: return "10";
    case Stratum::k11: return "11";
  }
  return "??";
}

Stratum ParseStratum(const std::string& label);

// Strata that can produce an observation in the (z, s) cell under the
// monotonicity assumption (stratum 01 excluded).
std::vector<Stratum> StrataInCell(int z, int s);

inline int CellIndex(int z, int s) { return z * 2 + s; }

// Immutable-by-convention container for an observational table with
// covariates x (n x d), outcome y, binary intermediate s, binary
// assignment z.
struct SampleTable {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXi s;
  Eigen::VectorXi z;

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }

  // Throws SchemaError for shape problems and DataError for value
  // problems (non-finite x/y, s/z outside {0,1}).
  void Validate() const;

  // Observation counts for the four (z, s) cells, indexed by CellIndex.
  std::array<Index, 4> CellCounts() const;

  // Row indices belonging to cell (z, s), in ascending order.
  std::vector<Index> CellRows(int z, int s) const;
};

// Gathers the given rows of m into a new matrix, preserving order.
Eigen::MatrixXd GatherRows(const Eigen::MatrixXd& m,
                           const std::vector<Index>& rows);
Eigen::VectorXd GatherRows(const Eigen::VectorXd& v,
                           const std::vector<Index>& rows);

}  // namespace cpce

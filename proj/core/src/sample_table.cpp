#include "cpce/sample_table.hpp"

#include <cmath>

namespace cpce {

Stratum ParseStratum(const std::string& label) {
  if (label == "00") return Stratum::k00;
  if (label == "10") return Stratum::k10;
  if (label == "11") return Stratum::k11;
  throw ConfigError("unknown stratum label '" + label +
                    "' (expected 00, 10, or 11)");
}

std::vector<Stratum> StrataInCell(int z, int s) {
  if ((z != 0 && z != 1) || (s != 0 && s != 1)) {
    throw ConfigError("StrataInCell: z and s must be 0 or 1");
  }
  if (z == 1 && s == 0) return {Stratum::k00};
  if (z == 0 && s == 1) return {Stratum::k11};
  if (z == 1 && s == 1) return {Stratum::k10, Stratum::k11};
  return {Stratum::k00, Stratum::k10};
}

void SampleTable::Validate() const {
  const Index nn = x.rows();
  if (nn < 1) throw SchemaError("sample table has no rows");
  if (x.cols() < 1) throw SchemaError("sample table has no covariates");
  if (y.size() != nn || s.size() != nn || z.size() != nn) {
    throw SchemaError("column lengths disagree: x has " + std::to_string(nn) +
                      " rows, y " + std::to_string(y.size()) + ", s " +
                      std::to_string(s.size()) + ", z " +
                      std::to_string(z.size()));
  }
  for (Index i = 0; i < nn; ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (!std::isfinite(x(i, j))) {
        throw DataError("non-finite covariate at row " + std::to_string(i) +
                        ", column " + std::to_string(j));
      }
    }
    if (!std::isfinite(y(i))) {
      throw DataError("non-finite outcome at row " + std::to_string(i));
    }
    if (s(i) != 0 && s(i) != 1) {
      throw DataError("s must be 0 or 1 at row " + std::to_string(i) +
                      ", got " + std::to_string(s(i)));
    }
    if (z(i) != 0 && z(i) != 1) {
      throw DataError("z must be 0 or 1 at row " + std::to_string(i) +
                      ", got " + std::to_string(z(i)));
    }
  }
}

std::array<Index, 4> SampleTable::CellCounts() const {
  std::array<Index, 4> counts{0, 0, 0, 0};
  for (Index i = 0; i < n(); ++i) {
    counts[static_cast<std::size_t>(CellIndex(z(i), s(i)))]++;
  }
  return counts;
}

std::vector<Index> SampleTable::CellRows(int zz, int ss) const {
  std::vector<Index> rows;
  for (Index i = 0; i < n(); ++i) {
    if (z(i) == zz && s(i) == ss) rows.push_back(i);
  }
  return rows;
}

Eigen::MatrixXd GatherRows(const Eigen::MatrixXd& m,
                           const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Index>(k)) = m.row(rows[k]);
  }
  return out;
}

Eigen::VectorXd GatherRows(const Eigen::VectorXd& v,
                           const std::vector<Index>& rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out(static_cast<Index>(k)) = v(rows[k]);
  }
  return out;
}

}  // namespace cpce

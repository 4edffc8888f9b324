#include "cpce/nuisance.hpp"

#include "cpce/math_util.hpp"

namespace cpce {

CellRegressions CellRegressions::Fit(const SampleTable& table,
                                     const std::vector<Index>& rows,
                                     const SmootherConfig& cfg) {
  CellRegressions out;
  for (int z = 0; z <= 1; ++z) {
    for (int s = 0; s <= 1; ++s) {
      std::vector<Index> cell_rows;
      for (Index i : rows) {
        if (table.z(i) == z && table.s(i) == s) cell_rows.push_back(i);
      }
      if (cell_rows.empty()) {
        throw EmptyCellError("no observations in cell (z=" +
                             std::to_string(z) + ", s=" + std::to_string(s) +
                             ")");
      }
      const Eigen::MatrixXd cx = GatherRows(table.x, cell_rows);
      const Eigen::VectorXd cy = GatherRows(table.y, cell_rows);
      out.cells_[static_cast<std::size_t>(CellIndex(z, s))] =
          std::make_shared<Smoother>(FitSmoother(cx, cy, cfg));
    }
  }
  return out;
}

double CellRegressions::MuAt(int z, int s, const Eigen::RowVectorXd& x) const {
  return cell(z, s).PredictAt(x);
}

const Smoother& CellRegressions::cell(int z, int s) const {
  const auto& ptr = cells_[static_cast<std::size_t>(CellIndex(z, s))];
  if (!ptr) throw EmptyCellError("cell regression not fitted");
  return *ptr;
}

NuisanceBundle FitNuisances(const SampleTable& table,
                            const std::vector<Index>& rows,
                            const NuisanceConfig& cfg) {
  if (rows.empty()) throw SchemaError("FitNuisances: empty row subset");

  const Eigen::MatrixXd x_all = GatherRows(table.x, rows);
  Eigen::VectorXi z_all(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    z_all(static_cast<Index>(k)) = table.z(rows[k]);
  }

  std::vector<Index> rows1, rows0;
  for (Index i : rows) {
    (table.z(i) == 1 ? rows1 : rows0).push_back(i);
  }
  if (rows1.empty() || rows0.empty()) {
    throw EmptyCellError("FitNuisances: an assignment arm has no rows");
  }
  Eigen::VectorXi s1(static_cast<Index>(rows1.size()));
  for (std::size_t k = 0; k < rows1.size(); ++k) {
    s1(static_cast<Index>(k)) = table.s(rows1[k]);
  }
  Eigen::VectorXi s0(static_cast<Index>(rows0.size()));
  for (std::size_t k = 0; k < rows0.size(); ++k) {
    s0(static_cast<Index>(k)) = table.s(rows0[k]);
  }

  ProbModelConfig prob_cfg = cfg.prob;
  prob_cfg.clip_eps = cfg.clip_eps;

  auto pi_model = std::make_shared<ProbModel>(
      FitLogistic(x_all, z_all, prob_cfg));
  auto p1_model = std::make_shared<ProbModel>(
      FitLogistic(GatherRows(table.x, rows1), s1, prob_cfg));
  auto p0_model = std::make_shared<ProbModel>(
      FitLogistic(GatherRows(table.x, rows0), s0, prob_cfg));
  auto cells = std::make_shared<CellRegressions>(
      CellRegressions::Fit(table, rows, cfg.outcome));

  NuisanceBundle b;
  b.clip_eps = cfg.clip_eps;
  b.pi = [pi_model](const Eigen::RowVectorXd& x) { return pi_model->ProbAt(x); };
  b.p1 = [p1_model](const Eigen::RowVectorXd& x) { return p1_model->ProbAt(x); };
  b.p0 = [p0_model](const Eigen::RowVectorXd& x) { return p0_model->ProbAt(x); };
  b.mu11 = [cells](const Eigen::RowVectorXd& x) { return cells->MuAt(1, 1, x); };
  b.mu10 = [cells](const Eigen::RowVectorXd& x) { return cells->MuAt(1, 0, x); };
  b.mu01 = [cells](const Eigen::RowVectorXd& x) { return cells->MuAt(0, 1, x); };
  b.mu00 = [cells](const Eigen::RowVectorXd& x) { return cells->MuAt(0, 0, x); };
  return b;
}

}  // namespace cpce

#include "declqr/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace declqr {

double spectral_norm(const Eigen::Ref<const MatrixXd>& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double min_singular_value(const Eigen::Ref<const MatrixXd>& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

double spectral_radius(const Eigen::Ref<const MatrixXd>& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_psd(const Eigen::Ref<const MatrixXd>& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  if (M.size() == 0) return true;
  const MatrixXd sym = 0.5 * (M + M.transpose());
  const double scale = std::max(spectral_norm(sym), 1e-300);
  if ((M - M.transpose()).norm() > 1e-8 * std::max(scale, 1.0)) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -rel_tol * scale;
}

bool is_pd(const Eigen::Ref<const MatrixXd>& M, double rel_tol) {
  if (M.rows() != M.cols() || M.size() == 0) return false;
  const MatrixXd sym = 0.5 * (M + M.transpose());
  if ((M - M.transpose()).norm() > rel_tol * std::max(sym.norm(), 1.0)) {
    return false;
  }
  Eigen::LLT<MatrixXd> llt(sym);
  return llt.info() == Eigen::Success;
}

MatrixXd gather(const Eigen::Ref<const MatrixXd>& M, std::span<const int> rows,
                std::span<const int> cols) {
  MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(r, c) = M(rows[r], cols[c]);
    }
  }
  return out;
}

VectorXd gather(const Eigen::Ref<const VectorXd>& v, std::span<const int> idx) {
  VectorXd out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

}  // namespace declqr

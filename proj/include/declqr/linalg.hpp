#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace declqr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Largest singular value (induced 2-norm).
double spectral_norm(const Eigen::Ref<const MatrixXd>& M);

/// Largest eigenvalue magnitude of a square matrix.
double spectral_radius(const Eigen::Ref<const MatrixXd>& M);

double min_singular_value(const Eigen::Ref<const MatrixXd>& M);

/// True when the symmetric part of M has smallest eigenvalue >= -rel_tol * ||M||.
bool is_psd(const Eigen::Ref<const MatrixXd>& M, double rel_tol = 1e-10);

/// True when M is symmetric to within rel_tol and strictly positive definite.
bool is_pd(const Eigen::Ref<const MatrixXd>& M, double rel_tol = 1e-10);

/// Gathers the rows/columns listed in `rows`/`cols` into a dense submatrix.
MatrixXd gather(const Eigen::Ref<const MatrixXd>& M, std::span<const int> rows,
                std::span<const int> cols);

VectorXd gather(const Eigen::Ref<const VectorXd>& v, std::span<const int> idx);

}  // namespace declqr

#pragma once

#include <utility>

#include <Eigen/Core>

namespace ltv {

// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

// Max absolute entry; the norm used for residual reporting.
double max_norm(const Eigen::MatrixXd& m);

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

// (lambda_min, lambda_max) of a symmetric matrix via a self-adjoint solver.
std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixXd& sym);

}  // namespace ltv

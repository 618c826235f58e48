#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace dat {

void require_square(const Eigen::MatrixXd& m, std::string_view name);
void require_symmetric(const Eigen::MatrixXd& m, std::string_view name, double tol = 1e-10);

bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-10);

// Cholesky-based definiteness test on the symmetric part.
bool is_spd(const Eigen::MatrixXd& m);

double min_eigenvalue_sym(const Eigen::MatrixXd& m);
double max_eigenvalue_sym(const Eigen::MatrixXd& m);

// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

}  // namespace dat

#pragma once

#include <Eigen/Dense>

namespace orblin::linalg {

struct SvdResult {
    Eigen::MatrixXd U;
    Eigen::VectorXd sigma;  // nonincreasing, nonnegative
    Eigen::MatrixXd V;
};

// Thin SVD, A = U * diag(sigma) * V^T.
SvdResult svd(const Eigen::MatrixXd& A);

// Moore-Penrose pseudoinverse; singular values below rcond * sigma_max are
// treated as zero.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& A, double rcond = 1e-10);

// Least-squares Koopman solve K = Phi_y * pinv(Phi_x). Both inputs hold one
// lifted snapshot per column.
Eigen::MatrixXd lstsq_koopman(const Eigen::MatrixXd& phi_x, const Eigen::MatrixXd& phi_y,
                              double rcond = 1e-10);

}  // namespace orblin::linalg

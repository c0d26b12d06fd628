#include "orblin/linalg.hpp"

#include <stdexcept>

namespace orblin::linalg {

SvdResult svd(const Eigen::MatrixXd& A) {
    if (!A.allFinite()) throw std::invalid_argument("svd: matrix has non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXd> solver(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& A, double rcond) {
    if (rcond <= 0.0 || rcond >= 1.0) throw std::invalid_argument("pinv: rcond must be in (0, 1)");
    const SvdResult s = svd(A);
    const double cutoff = s.sigma.size() > 0 ? rcond * s.sigma(0) : 0.0;
    Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(s.sigma.size());
    for (Eigen::Index i = 0; i < s.sigma.size(); ++i) {
        if (s.sigma(i) > cutoff) inv_sigma(i) = 1.0 / s.sigma(i);
    }
    return s.V * inv_sigma.asDiagonal() * s.U.transpose();
}

Eigen::MatrixXd lstsq_koopman(const Eigen::MatrixXd& phi_x, const Eigen::MatrixXd& phi_y,
                              double rcond) {
    if (phi_x.cols() != phi_y.cols())
        throw std::invalid_argument("lstsq_koopman: snapshot column counts differ");
    return phi_y * pinv(phi_x, rcond);
}

}  // namespace orblin::linalg

#include <doctest.h>

#include "orblin/linalg.hpp"
#include "orblin/rng.hpp"

using namespace orblin;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
    return m;
}

}  // namespace

TEST_CASE("svd of identity and diagonal matrices") {
    auto s = linalg::svd(Eigen::MatrixXd::Identity(3, 3));
    CHECK(s.sigma.isApprox(Eigen::Vector3d::Ones(), 1e-14));

    Eigen::MatrixXd d = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
    s = linalg::svd(d);
    CHECK(s.sigma(0) == doctest::Approx(3.0));
    CHECK(s.sigma(1) == doctest::Approx(2.0));
    CHECK(s.sigma(2) == doctest::Approx(1.0));
}

TEST_CASE("svd reconstruction and orthogonality on random matrices") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const Eigen::MatrixXd a = random_matrix(5, 3, seed);
        const auto s = linalg::svd(a);
        const Eigen::MatrixXd rec = s.U * s.sigma.asDiagonal() * s.V.transpose();
        CHECK((rec - a).norm() <= 1e-10 * a.norm());
        CHECK((s.U.transpose() * s.U - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <=
              1e-10);
        CHECK((s.V.transpose() * s.V - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <=
              1e-10);
        for (Eigen::Index i = 1; i < s.sigma.size(); ++i) CHECK(s.sigma(i) <= s.sigma(i - 1));
    }
}

TEST_CASE("pinv basics") {
    CHECK(linalg::pinv(Eigen::MatrixXd::Identity(4, 4))
              .isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-12));
    Eigen::MatrixXd one(1, 1);
    one << 2.0;
    CHECK(linalg::pinv(one)(0, 0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(linalg::pinv(one, 0.0), std::invalid_argument);
}

TEST_CASE("pinv satisfies Penrose conditions on a rank-deficient matrix") {
    Eigen::MatrixXd a = random_matrix(4, 6, 7);
    a.row(3) = a.row(0) + a.row(1);  // force rank deficiency
    const Eigen::MatrixXd ai = linalg::pinv(a);
    CHECK((a * ai * a - a).norm() <= 1e-8 * a.norm());
    CHECK((ai * a * ai - ai).norm() <= 1e-8 * ai.norm());
    CHECK(((a * ai) - (a * ai).transpose()).norm() <= 1e-8);
    CHECK(((ai * a) - (ai * a).transpose()).norm() <= 1e-8);
}

TEST_CASE("pinv property on large fixed-seed matrices") {
    const Eigen::MatrixXd a = random_matrix(120, 2000, 11);
    const Eigen::MatrixXd ai = linalg::pinv(a);
    CHECK((a * ai * a - a).norm() <= 1e-8 * a.norm());
}

TEST_CASE("lstsq_koopman recovers a known linear system") {
    Eigen::Matrix2d a_true;
    a_true << 0.9, 0.2, -0.1, 0.95;
    Eigen::MatrixXd x(2, 50), y(2, 50);
    Eigen::Vector2d s(1.0, 0.5);
    for (int k = 0; k < 50; ++k) {
        x.col(k) = s;
        s = a_true * s;
        y.col(k) = s;
    }
    const Eigen::MatrixXd k_fit = linalg::lstsq_koopman(x, y);
    CHECK((k_fit - a_true).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("lstsq_koopman acts as identity or scaling on the data span") {
    const Eigen::MatrixXd x = random_matrix(3, 40, 21);
    const Eigen::MatrixXd k_id = linalg::lstsq_koopman(x, x);
    CHECK((k_id * x - x).norm() <= 1e-10 * x.norm());
    const Eigen::MatrixXd k_half = linalg::lstsq_koopman(x, (0.5 * x).eval());
    CHECK((k_half * x - 0.5 * x).norm() <= 1e-10 * x.norm());
    CHECK_THROWS_AS(linalg::lstsq_koopman(x, random_matrix(3, 5, 22)), std::invalid_argument);
}

TEST_CASE("lstsq_koopman minimizes the Frobenius residual") {
    const Eigen::MatrixXd x = random_matrix(4, 60, 31);
    const Eigen::MatrixXd y = random_matrix(4, 60, 32);
    const Eigen::MatrixXd k = linalg::lstsq_koopman(x, y);
    const double base = (y - k * x).norm();
    for (std::uint64_t seed : {41u, 42u, 43u, 44u, 45u}) {
        Eigen::MatrixXd dk = random_matrix(4, 4, seed);
        dk *= 1e-3 / dk.norm();
        CHECK((y - (k + dk) * x).norm() >= base - 1e-12);
    }
}

#include "orblin/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace orblin::metrics {

double orbit_average(const Eigen::VectorXd& series) {
    if (series.size() == 0) throw std::invalid_argument("orbit_average: empty series");
    return series.mean();
}

Eigen::VectorXd relative_variation(const Eigen::VectorXd& series) {
    const double avg = orbit_average(series);
    if (avg == 0.0)
        throw std::invalid_argument("relative_variation: series average is zero; report raw values");
    return (series.array() / avg - 1.0).matrix();
}

InvariantReport circular_invariants(const Trajectory& traj) {
    if (traj.dim() != 4)
        throw std::invalid_argument("circular_invariants: expects a planar 2BP trajectory");
    const Eigen::Index m = traj.size();
    Eigen::VectorXd r(m), v(m), rv(m), lz(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = traj.states(0, i), y = traj.states(1, i);
        const double vx = traj.states(2, i), vy = traj.states(3, i);
        r(i) = std::hypot(x, y);
        v(i) = std::hypot(vx, vy);
        rv(i) = x * vx + y * vy;
        lz(i) = x * vy - y * vx;
    }
    InvariantReport rep;
    rep.xi_r = relative_variation(r);
    rep.xi_v = relative_variation(v);
    rep.r_dot_v = rv;
    rep.xi_lz = relative_variation(lz);
    rep.mean_r = orbit_average(r);
    rep.mean_v = orbit_average(v);
    rep.mean_lz = orbit_average(lz);
    rep.max_abs_xi_r = rep.xi_r.cwiseAbs().maxCoeff();
    rep.max_abs_xi_v = rep.xi_v.cwiseAbs().maxCoeff();
    rep.max_abs_xi_lz = rep.xi_lz.cwiseAbs().maxCoeff();
    rep.max_abs_r_dot_v = rep.r_dot_v.cwiseAbs().maxCoeff();
    return rep;
}

ErrorSeries rollout_errors(const koopman::KoopmanModel& model, const Trajectory& reference) {
    if (reference.dim() != model.n)
        throw std::invalid_argument("rollout_errors: dimension mismatch");
    const Eigen::Index m = reference.size();
    if (m < 2) throw std::invalid_argument("rollout_errors: reference too short");
    const int pos_dims = model.n == 4 ? 2 : 3;

    const Eigen::MatrixXd phi_true = koopman::lift(model, reference.states);
    ErrorSeries es;
    es.local.resize(m - 1);
    es.global.resize(m - 1);
    es.local_pos.resize(m - 1);
    es.global_pos.resize(m - 1);

    Eigen::VectorXd pred_state = reference.states.col(0);
    for (Eigen::Index k = 1; k < m; ++k) {
        const Eigen::VectorXd local_err =
            phi_true.col(k) - model.K * phi_true.col(k - 1);
        const Eigen::VectorXd lifted_pred = model.K * koopman::lift(model, pred_state);
        const Eigen::VectorXd global_err = phi_true.col(k) - lifted_pred;
        es.local(k - 1) = local_err.norm();
        es.global(k - 1) = global_err.norm();
        es.local_pos(k - 1) = local_err.head(pos_dims).norm();
        es.global_pos(k - 1) = global_err.head(pos_dims).norm();
        pred_state = lifted_pred.head(model.n);  // per-step correction
    }

    Eigen::VectorXd radii(m);
    for (Eigen::Index i = 0; i < m; ++i) radii(i) = reference.states.col(i).head(pos_dims).norm();
    es.mean_radius = orbit_average(radii);
    es.max_local_pos = es.local_pos.maxCoeff();
    es.max_global_pos = es.global_pos.maxCoeff();
    es.max_global_pos_pct = es.max_global_pos / es.mean_radius * 100.0;
    return es;
}

double jacobi_constant(const Vector6d& state, const dynamics::Cr3bpParams& params) {
    const double mu = params.mu_frac;
    const double x = state(0), y = state(1), z = state(2);
    const double r1 = std::sqrt((x + mu) * (x + mu) + y * y + z * z);
    const double r2 = std::sqrt((x - 1.0 + mu) * (x - 1.0 + mu) + y * y + z * z);
    if (r1 == 0.0 || r2 == 0.0) throw SingularityError("jacobi_constant: singular distance");
    const double v2 = state.tail<3>().squaredNorm();
    // Omega = 1 in nondimensional rotating-frame units.
    return (x * x + y * y) + 2.0 * (1.0 - mu) / r1 + 2.0 * mu / r2 - v2;
}

Eigen::VectorXd jacobi_series(const Trajectory& traj, const dynamics::Cr3bpParams& params) {
    if (traj.dim() != 6) throw std::invalid_argument("jacobi_series: expects a 6-state trajectory");
    Eigen::VectorXd out(traj.size());
    for (Eigen::Index i = 0; i < traj.size(); ++i)
        out(i) = jacobi_constant(traj.states.col(i), params);
    return out;
}

double max_relative_deviation(const Eigen::VectorXd& predicted, const Eigen::VectorXd& reference) {
    if (predicted.size() != reference.size())
        throw std::invalid_argument("max_relative_deviation: length mismatch");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < predicted.size(); ++i) {
        const double denom = std::abs(reference(i));
        if (denom == 0.0) throw std::invalid_argument("max_relative_deviation: zero reference value");
        worst = std::max(worst, std::abs(predicted(i) - reference(i)) / denom);
    }
    return worst;
}

}  // namespace orblin::metrics

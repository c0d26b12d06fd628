#pragma once

#include "orblin/dynamics.hpp"
#include "orblin/koopman.hpp"
#include "orblin/types.hpp"

namespace orblin::metrics {

// Arithmetic mean over all samples of one orbit.
double orbit_average(const Eigen::VectorXd& series);

// xi(t) = chi(t)/<chi> - 1. Errors out when the average is zero, which is why
// the r.v diagnostic is reported raw instead.
Eigen::VectorXd relative_variation(const Eigen::VectorXd& series);

// The four circular-orbit invariants: xi_r, xi_v, raw r.v, xi_Lz.
struct InvariantReport {
    Eigen::VectorXd xi_r;
    Eigen::VectorXd xi_v;
    Eigen::VectorXd r_dot_v;  // raw values
    Eigen::VectorXd xi_lz;
    double mean_r = 0.0;
    double mean_v = 0.0;
    double mean_lz = 0.0;
    double max_abs_xi_r = 0.0;
    double max_abs_xi_v = 0.0;
    double max_abs_xi_lz = 0.0;
    double max_abs_r_dot_v = 0.0;
};

InvariantReport circular_invariants(const Trajectory& traj);

// Lifted-space local and global rollout errors against a reference
// trajectory, plus projected position-only norms.
struct ErrorSeries {
    Eigen::VectorXd local;       // ||Phi(x_n) - K Phi(x_{n-1})||
    Eigen::VectorXd global;      // ||Phi(x_n) - K Phi_hat(x_{n-1})||
    Eigen::VectorXd local_pos;   // position components only
    Eigen::VectorXd global_pos;
    double mean_radius = 0.0;           // <r> of the reference
    double max_global_pos_pct = 0.0;    // max(global_pos) / <r> * 100
    double max_local_pos = 0.0;
    double max_global_pos = 0.0;
};

ErrorSeries rollout_errors(const koopman::KoopmanModel& model, const Trajectory& reference);

// Jacobi constant of a nondimensional rotating-frame state (Omega = 1).
double jacobi_constant(const Vector6d& state, const dynamics::Cr3bpParams& params);

Eigen::VectorXd jacobi_series(const Trajectory& traj, const dynamics::Cr3bpParams& params);

// Max |a_i - b_i| / |b_i| between a predicted and a reference series.
double max_relative_deviation(const Eigen::VectorXd& predicted, const Eigen::VectorXd& reference);

}  // namespace orblin::metrics

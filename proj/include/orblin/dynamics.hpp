#pragma once

#include "orblin/types.hpp"

#include <functional>
#include <optional>

namespace orblin::dynamics {

// Planar cannonball solar radiation pressure. pressure is the solar flux
// pressure in N/m^2; the resulting acceleration is returned in km/s^2.
struct SrpParams {
    double pressure = 4.56e-6;       // N/m^2
    double reflectivity = 1.3;       // C_R
    double area_to_mass = 0.01;      // m^2/kg
    Eigen::Vector2d sun_dir{-1.0, 0.0};  // unit vector toward the Sun
};

struct GravParams {
    double mu = 0.0;           // km^3/s^2, G*(M + m)
    double body_radius = 0.0;  // km
    double j2 = 0.0;
    std::optional<SrpParams> srp;

    void validate() const;

    static GravParams earth();
    static GravParams earth_perturbed();  // J2 + default SRP
    static GravParams moon();
    static GravParams jupiter();
};

struct Cr3bpParams {
    double m_star = 0.0;   // kg, total system mass
    double l_star = 0.0;   // km, primary-secondary separation
    double t_star = 0.0;   // s, sqrt(l_star^3 / (G * m_star))
    double mu_frac = 0.0;  // secondary mass / total mass

    void validate() const;

    static Cr3bpParams earth_moon();
};

struct OrbitSpec {
    enum class Kind { Circular, Elliptical, PerturbedCircular };
    Kind kind = Kind::Circular;
    double r_p = 0.0;  // perigee radius, km
    double e = 0.0;

    double semi_major_axis() const { return r_p / (1.0 - e); }
    void validate(const GravParams& params) const;
};

constexpr double kGravConstant = 6.674e-20;  // km^3 / (kg s^2)

// Two-body acceleration at the given planar state [x y vx vy], optionally
// including J2 and SRP.
Eigen::Vector2d two_body_accel(const Eigen::Vector4d& state, const GravParams& params,
                               bool include_perturbations);

// Full state derivative [vx vy ax ay] for the planar 2BP.
Eigen::Vector4d two_body_deriv(const Eigen::Vector4d& state, const GravParams& params,
                               bool include_perturbations);

// Rotating-frame CR3BP acceleration (xdd, ydd, zdd) in nondimensional units.
Eigen::Vector3d cr3bp_accel(const Vector6d& state, double mu_frac);

Vector6d cr3bp_deriv(const Vector6d& state, double mu_frac);

using Derivative = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// One classical RK4 step.
Eigen::VectorXd rk4_step(const Derivative& deriv, const Eigen::VectorXd& state, double dt);

// n_steps repeated RK4 steps from ic; returns n_steps + 1 states.
Trajectory propagate(const Eigen::VectorXd& ic, const Derivative& deriv, double dt, int n_steps,
                     UnitSystem units = UnitSystem::PhysicalKmS);

// Periapsis start: [r_p, 0, 0, sqrt(mu*(2/r_p - 1/a))].
Eigen::Vector4d make_2bp_ic(const OrbitSpec& spec, const GravParams& params);

double orbital_period(double a, double mu);

// Collinear L1 point x-coordinate between the primaries (bisection to 1e-12).
double l1_point(double mu_frac);

// Planar L1-oscillation initial condition. x0 = x_L1 * multiplier, y0 = 1/a,
// velocity on the center eigenspace of the L1 linearization.
Vector6d make_cr3bp_ic(const Cr3bpParams& params, double x_multiplier);

// In-plane center-eigenspace frequency and y/x amplitude ratio of the L1
// linearization; exposed for tests.
struct L1Oscillation {
    double omega;  // in-plane frequency
    double k;      // eta = -k * xi amplitude ratio
};
L1Oscillation l1_oscillation(double mu_frac);

}  // namespace orblin::dynamics

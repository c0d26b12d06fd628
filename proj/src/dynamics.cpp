#include "orblin/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace orblin::dynamics {

void GravParams::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("GravParams: mu must be positive");
    if (!(body_radius > 0.0)) throw std::invalid_argument("GravParams: body_radius must be positive");
    if (srp && std::abs(srp->sun_dir.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("GravParams: sun_dir must be a unit vector");
}

GravParams GravParams::earth() { return {398600.4418, 6378.14, 0.0, std::nullopt}; }

GravParams GravParams::earth_perturbed() {
    GravParams p = earth();
    p.j2 = 1.08263e-3;
    p.srp = SrpParams{};
    return p;
}

GravParams GravParams::moon() { return {4902.800066, 1737.4, 0.0, std::nullopt}; }

GravParams GravParams::jupiter() { return {1.26686534e8, 71492.0, 0.0, std::nullopt}; }

void Cr3bpParams::validate() const {
    if (!(mu_frac > 0.0 && mu_frac < 0.5))
        throw std::invalid_argument("Cr3bpParams: mu_frac must lie in (0, 0.5)");
    const double expected = std::sqrt(l_star * l_star * l_star / (kGravConstant * m_star));
    if (std::abs(t_star - expected) > 1e-12 * expected)
        throw std::invalid_argument("Cr3bpParams: t_star inconsistent with l_star and m_star");
}

Cr3bpParams Cr3bpParams::earth_moon() {
    const double m_earth = 5.9722e24;
    const double m_moon = 7.342e22;
    Cr3bpParams p;
    p.m_star = m_earth + m_moon;
    p.l_star = 384400.0;
    p.t_star = std::sqrt(p.l_star * p.l_star * p.l_star / (kGravConstant * p.m_star));
    p.mu_frac = m_moon / p.m_star;
    return p;
}

void OrbitSpec::validate(const GravParams& params) const {
    if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("OrbitSpec: e must lie in [0, 1)");
    if (!(r_p > params.body_radius))
        throw std::invalid_argument("OrbitSpec: perigee radius below body radius");
}

Eigen::Vector2d two_body_accel(const Eigen::Vector4d& state, const GravParams& params,
                               bool include_perturbations) {
    const Eigen::Vector2d r = state.head<2>();
    const double rn = r.norm();
    if (rn == 0.0) throw SingularityError("two_body_accel: |r| = 0");
    const double r3 = rn * rn * rn;
    Eigen::Vector2d a = -params.mu / r3 * r;
    if (include_perturbations) {
        if (params.j2 != 0.0) {
            // Planar (z = 0) J2: purely radial.
            const double re2 = params.body_radius * params.body_radius;
            a += -1.5 * params.j2 * params.mu * re2 / (r3 * rn * rn) * r;
        }
        if (params.srp) {
            const SrpParams& s = *params.srp;
            // N/m^2 * m^2/kg = m/s^2; convert to km/s^2.
            const double mag = s.pressure * s.reflectivity * s.area_to_mass * 1e-3;
            a += -mag * s.sun_dir;  // anti-sunward
        }
    }
    return a;
}

Eigen::Vector4d two_body_deriv(const Eigen::Vector4d& state, const GravParams& params,
                               bool include_perturbations) {
    Eigen::Vector4d d;
    d.head<2>() = state.tail<2>();
    d.tail<2>() = two_body_accel(state, params, include_perturbations);
    return d;
}

Eigen::Vector3d cr3bp_accel(const Vector6d& state, double mu_frac) {
    const double x = state(0), y = state(1), z = state(2);
    const double vx = state(3), vy = state(4);
    const double d = std::sqrt((x + mu_frac) * (x + mu_frac) + y * y + z * z);
    const double r = std::sqrt((x - 1.0 + mu_frac) * (x - 1.0 + mu_frac) + y * y + z * z);
    if (d == 0.0 || r == 0.0) throw SingularityError("cr3bp_accel: collision with a primary");
    const double d3 = d * d * d;
    const double r3 = r * r * r;
    Eigen::Vector3d a;
    a(0) = x + 2.0 * vy - (1.0 - mu_frac) * (x + mu_frac) / d3 - mu_frac * (x - 1.0 + mu_frac) / r3;
    a(1) = y - 2.0 * vx - (1.0 - mu_frac) * y / d3 - mu_frac * y / r3;
    a(2) = -(1.0 - mu_frac) * z / d3 - mu_frac * z / r3;
    return a;
}

Vector6d cr3bp_deriv(const Vector6d& state, double mu_frac) {
    Vector6d d;
    d.head<3>() = state.tail<3>();
    d.tail<3>() = cr3bp_accel(state, mu_frac);
    return d;
}

Eigen::VectorXd rk4_step(const Derivative& deriv, const Eigen::VectorXd& state, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
    const Eigen::VectorXd k1 = deriv(state);
    if (!k1.allFinite()) throw PropagationError("rk4_step: non-finite stage k1");
    const Eigen::VectorXd k2 = deriv(state + 0.5 * dt * k1);
    if (!k2.allFinite()) throw PropagationError("rk4_step: non-finite stage k2");
    const Eigen::VectorXd k3 = deriv(state + 0.5 * dt * k2);
    if (!k3.allFinite()) throw PropagationError("rk4_step: non-finite stage k3");
    const Eigen::VectorXd k4 = deriv(state + dt * k3);
    if (!k4.allFinite()) throw PropagationError("rk4_step: non-finite stage k4");
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory propagate(const Eigen::VectorXd& ic, const Derivative& deriv, double dt, int n_steps,
                     UnitSystem units) {
    if (n_steps < 1) throw std::invalid_argument("propagate: n_steps must be >= 1");
    Trajectory traj;
    traj.units = units;
    traj.times.resize(n_steps + 1);
    traj.states.resize(ic.size(), n_steps + 1);
    traj.states.col(0) = ic;
    traj.times(0) = 0.0;
    Eigen::VectorXd s = ic;
    for (int k = 1; k <= n_steps; ++k) {
        s = rk4_step(deriv, s, dt);
        traj.states.col(k) = s;
        traj.times(k) = k * dt;
    }
    return traj;
}

Eigen::Vector4d make_2bp_ic(const OrbitSpec& spec, const GravParams& params) {
    spec.validate(params);
    const double a = spec.semi_major_axis();
    const double vis_viva = params.mu * (2.0 / spec.r_p - 1.0 / a);
    if (vis_viva <= 0.0) throw std::invalid_argument("make_2bp_ic: non-elliptic energy");
    return {spec.r_p, 0.0, 0.0, std::sqrt(vis_viva)};
}

double orbital_period(double a, double mu) { return 2.0 * M_PI * std::sqrt(a * a * a / mu); }

namespace {

double l1_residual(double x, double mu) {
    const double s1 = x + mu;
    const double s2 = x - 1.0 + mu;
    return -(1.0 - mu) / (s1 * std::abs(s1)) - mu / (s2 * std::abs(s2)) + x;
}

}  // namespace

double l1_point(double mu_frac) {
    if (!(mu_frac > 0.0 && mu_frac < 0.5))
        throw std::invalid_argument("l1_point: mu_frac must lie in (0, 0.5)");
    double lo = -mu_frac + 1e-9;
    double hi = 1.0 - mu_frac - 1e-9;
    double flo = l1_residual(lo, mu_frac);
    double fhi = l1_residual(hi, mu_frac);
    if (flo * fhi > 0.0) throw std::runtime_error("l1_point: root not bracketed");
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        const double fm = l1_residual(mid, mu_frac);
        if (std::abs(fm) < 1e-13) return mid;
        if (flo * fm <= 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

L1Oscillation l1_oscillation(double mu_frac) {
    const double xl1 = l1_point(mu_frac);
    const double r1 = std::abs(xl1 + mu_frac);
    const double r2 = std::abs(xl1 - 1.0 + mu_frac);
    // c = sum of mu_i / r_i^3 at L1; Uxx = 1 + 2c, Uyy = 1 - c.
    const double c = (1.0 - mu_frac) / (r1 * r1 * r1) + mu_frac / (r2 * r2 * r2);
    // In-plane characteristic equation: lambda^4 + (2 - c) lambda^2 + (1 + 2c)(1 - c) = 0.
    const double disc = (2.0 - c) * (2.0 - c) - 4.0 * (1.0 + 2.0 * c) * (1.0 - c);
    const double lambda2 = 0.5 * ((c - 2.0) - std::sqrt(disc));  // center branch, negative
    const double omega = std::sqrt(-lambda2);
    const double k = (omega * omega + 1.0 + 2.0 * c) / (2.0 * omega);
    return {omega, k};
}

Vector6d make_cr3bp_ic(const Cr3bpParams& params, double x_multiplier) {
    params.validate();
    if (!(x_multiplier >= 1.0 && x_multiplier <= 1.05))
        throw std::domain_error("make_cr3bp_ic: x_multiplier must lie in [1, 1.05]");
    const double xl1 = l1_point(params.mu_frac);
    const L1Oscillation osc = l1_oscillation(params.mu_frac);
    const double x0 = xl1 * x_multiplier;
    const double y0 = 1.0 / params.l_star;
    // On the center eigenspace with xi(0) at max amplitude: xi = xi0 cos(wt),
    // eta = -k xi0 sin(wt), so vx(0) = 0 and vy(0) = -k w xi0.
    const double xi0 = x0 - xl1;
    Vector6d ic;
    ic << x0, y0, 0.0, 0.0, -osc.k * osc.omega * xi0, 0.0;
    return ic;
}

}  // namespace orblin::dynamics

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace orblin {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Unit system a state or trajectory is expressed in.
enum class UnitSystem {
    PhysicalKmS,   // km, km/s
    Canonical2bp,  // DU = semi-major axis, TU = sqrt(DU^3/mu)
    NondimCr3bp,   // rotating-frame CR3BP nondimensional units
};

std::string to_string(UnitSystem u);
UnitSystem unit_system_from_string(const std::string& s);

// Provenance of a single generated trajectory. Carries everything needed
// to rebuild the physical scaling (DU/TU) and to re-derive the IC.
struct GenRecord {
    std::string kind;        // circular | elliptical | perturbed-circular | cr3bp
    std::uint64_t seed = 0;  // per-IC stream seed
    double mu = 0.0;         // km^3/s^2 (2BP only)
    double body_radius = 0.0;
    double r_p = 0.0;        // km
    double e = 0.0;
    double a = 0.0;          // km
    double du = 0.0;         // canonical distance unit, km (2BP only)
    double tu = 0.0;         // canonical time unit, s (2BP only)
    bool perturbed = false;
    double mu_frac = 0.0;      // CR3BP mass fraction
    double multiplier = 0.0;   // CR3BP x-position multiplier
};

// Time-indexed state history. States are stored one column per sample.
struct Trajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;  // n x m
    UnitSystem units = UnitSystem::PhysicalKmS;
    GenRecord record;

    Eigen::Index dim() const { return states.rows(); }
    Eigen::Index size() const { return states.cols(); }
    double dt() const {
        if (times.size() < 2) throw std::logic_error("trajectory has no time step");
        return times(1) - times(0);
    }
};

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PropagationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, long step) : std::runtime_error(what), step(step) {}
    long step;
};

}  // namespace orblin

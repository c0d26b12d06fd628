#pragma once

#include "orblin/dynamics.hpp"
#include "orblin/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace orblin::datagen {

struct Dataset {
    std::vector<Trajectory> trajectories;
    double dt_scaled = 0.0;  // shared nondimensional time step
    int alpha = 25;          // prediction horizon used for truncation
    int n = 0;               // state dimension
    int dp = 1000;           // data points collected per IC before truncation
    UnitSystem units = UnitSystem::Canonical2bp;
    std::uint64_t master_seed = 0;
};

struct SnapshotPair {
    Eigen::MatrixXd X;   // states 0..M-2
    Eigen::MatrixXd Xp;  // states 1..M-1
};

struct TwoBodyGenConfig {
    int n_ic = 200;
    int dp = 1000;
    int alpha = 25;
    dynamics::OrbitSpec::Kind kind = dynamics::OrbitSpec::Kind::Circular;
    double alt_min = 200.0;  // km, perigee altitude range
    double alt_max = 5000.0;
    double e_min = 0.1;
    double e_max = 0.5;
    std::uint64_t seed = 0;
    dynamics::GravParams params = dynamics::GravParams::earth();
};

struct Cr3bpGenConfig {
    int n_ic = 500;
    int dp = 1000;
    int alpha = 25;
    double duration_hours = 90.0;
    std::uint64_t seed = 0;
    dynamics::Cr3bpParams params = dynamics::Cr3bpParams::earth_moon();
};

// Random circular/elliptical/perturbed 2BP trajectories, one period each,
// stored in the orbit's own canonical units so every trajectory shares
// dt_scaled = 2*pi/dp.
Dataset generate_2bp_dataset(const TwoBodyGenConfig& config);

// Planar L1-oscillation CR3BP trajectories in nondimensional units.
Dataset generate_cr3bp_dataset(const Cr3bpGenConfig& config);

// Canonical scaling of a single trajectory: DU = semi-major axis of the
// trajectory's own orbit, TU = sqrt(DU^3/mu).
Trajectory to_canonical(const Trajectory& traj, const dynamics::GravParams& params);
Trajectory from_canonical(const Trajectory& traj, const dynamics::GravParams& params);

SnapshotPair snapshots(const Trajectory& traj);

// Dataset directory format: `meta` JSON file plus one CSV per trajectory.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace orblin::datagen

#include "orblin/datagen.hpp"

#include "orblin/io.hpp"
#include "orblin/rng.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace orblin::datagen {

using dynamics::GravParams;
using dynamics::OrbitSpec;
using json = nlohmann::json;

namespace {

std::string kind_name(OrbitSpec::Kind kind) {
    switch (kind) {
        case OrbitSpec::Kind::Circular: return "circular";
        case OrbitSpec::Kind::Elliptical: return "elliptical";
        case OrbitSpec::Kind::PerturbedCircular: return "perturbed-circular";
    }
    throw std::logic_error("unknown orbit kind");
}

Trajectory truncate(const Trajectory& traj, int keep) {
    Trajectory out = traj;
    out.times = traj.times.head(keep).eval();
    out.states = traj.states.leftCols(keep).eval();
    return out;
}

void check_gen_config(int n_ic, int dp, int alpha) {
    if (n_ic < 1) throw std::invalid_argument("dataset config: n_ic must be >= 1");
    if (dp <= alpha + 1) throw std::invalid_argument("dataset config: dp must exceed alpha + 1");
}

}  // namespace

Dataset generate_2bp_dataset(const TwoBodyGenConfig& config) {
    check_gen_config(config.n_ic, config.dp, config.alpha);
    config.params.validate();
    const bool perturbed = config.kind == OrbitSpec::Kind::PerturbedCircular;

    Dataset ds;
    ds.alpha = config.alpha;
    ds.dp = config.dp;
    ds.n = 4;
    ds.units = UnitSystem::Canonical2bp;
    ds.master_seed = config.seed;
    ds.dt_scaled = 2.0 * M_PI / config.dp;
    ds.trajectories.reserve(config.n_ic);

    for (int i = 0; i < config.n_ic; ++i) {
        const std::uint64_t ic_seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
        Rng rng(ic_seed);
        OrbitSpec spec;
        spec.kind = config.kind;
        spec.r_p = config.params.body_radius + rng.uniform(config.alt_min, config.alt_max);
        spec.e = config.kind == OrbitSpec::Kind::Elliptical
                     ? rng.uniform(config.e_min, config.e_max)
                     : 0.0;

        const Eigen::Vector4d ic = dynamics::make_2bp_ic(spec, config.params);
        const double a = spec.semi_major_axis();
        const double period = dynamics::orbital_period(a, config.params.mu);
        const double dt = period / config.dp;
        const GravParams params = config.params;
        Trajectory traj = dynamics::propagate(
            ic,
            [&params, perturbed](const Eigen::VectorXd& s) -> Eigen::VectorXd {
                return dynamics::two_body_deriv(s, params, perturbed);
            },
            dt, config.dp);
        traj.record.kind = kind_name(config.kind);
        traj.record.seed = ic_seed;
        traj.record.mu = config.params.mu;
        traj.record.body_radius = config.params.body_radius;
        traj.record.r_p = spec.r_p;
        traj.record.e = spec.e;
        traj.record.a = a;
        traj.record.perturbed = perturbed;
        ds.trajectories.push_back(truncate(to_canonical(traj, config.params), config.dp - config.alpha));
    }
    return ds;
}

Dataset generate_cr3bp_dataset(const Cr3bpGenConfig& config) {
    check_gen_config(config.n_ic, config.dp, config.alpha);
    config.params.validate();

    Dataset ds;
    ds.alpha = config.alpha;
    ds.dp = config.dp;
    ds.n = 6;
    ds.units = UnitSystem::NondimCr3bp;
    ds.master_seed = config.seed;
    const double duration = config.duration_hours * 3600.0 / config.params.t_star;
    ds.dt_scaled = duration / config.dp;
    ds.trajectories.reserve(config.n_ic);

    const double mu_frac = config.params.mu_frac;
    for (int i = 0; i < config.n_ic; ++i) {
        const std::uint64_t ic_seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
        Rng rng(ic_seed);
        const double multiplier = rng.uniform(1.0, 1.05);
        const Vector6d ic = dynamics::make_cr3bp_ic(config.params, multiplier);
        Trajectory traj = dynamics::propagate(
            ic,
            [mu_frac](const Eigen::VectorXd& s) -> Eigen::VectorXd {
                return dynamics::cr3bp_deriv(s, mu_frac);
            },
            ds.dt_scaled, config.dp, UnitSystem::NondimCr3bp);
        traj.record.kind = "cr3bp";
        traj.record.seed = ic_seed;
        traj.record.mu_frac = mu_frac;
        traj.record.multiplier = multiplier;
        traj.record.a = config.params.l_star;
        ds.trajectories.push_back(truncate(traj, config.dp - config.alpha));
    }
    return ds;
}

Trajectory to_canonical(const Trajectory& traj, const GravParams& params) {
    if (traj.units == UnitSystem::Canonical2bp) {
        std::cerr << "to_canonical: trajectory already canonical; no-op\n";
        return traj;
    }
    if (traj.units != UnitSystem::PhysicalKmS)
        throw std::invalid_argument("to_canonical: expected physical units");
    if (!(traj.record.a > 0.0))
        throw std::invalid_argument("to_canonical: trajectory lacks a semi-major axis record");
    const double du = traj.record.a;
    const double tu = std::sqrt(du * du * du / params.mu);
    Trajectory out = traj;
    out.units = UnitSystem::Canonical2bp;
    out.times /= tu;
    out.states.topRows(2) /= du;
    out.states.bottomRows(2) /= du / tu;
    out.record.du = du;
    out.record.tu = tu;
    return out;
}

Trajectory from_canonical(const Trajectory& traj, const GravParams& params) {
    if (traj.units != UnitSystem::Canonical2bp)
        throw std::invalid_argument("from_canonical: expected canonical units");
    const double du = traj.record.du > 0.0 ? traj.record.du : traj.record.a;
    if (!(du > 0.0)) throw std::invalid_argument("from_canonical: trajectory lacks a scale record");
    const double tu = std::sqrt(du * du * du / params.mu);
    Trajectory out = traj;
    out.units = UnitSystem::PhysicalKmS;
    out.times *= tu;
    out.states.topRows(2) *= du;
    out.states.bottomRows(2) *= du / tu;
    return out;
}

SnapshotPair snapshots(const Trajectory& traj) {
    const Eigen::Index m = traj.size();
    if (m < 2) throw std::invalid_argument("snapshots: trajectory needs at least 2 states");
    return {traj.states.leftCols(m - 1), traj.states.rightCols(m - 1)};
}

namespace {

json record_to_json(const GenRecord& r) {
    return json{{"kind", r.kind},           {"seed", r.seed},
                {"mu", r.mu},               {"body_radius", r.body_radius},
                {"r_p", r.r_p},             {"e", r.e},
                {"a", r.a},                 {"du", r.du},
                {"tu", r.tu},               {"perturbed", r.perturbed},
                {"mu_frac", r.mu_frac},     {"multiplier", r.multiplier}};
}

GenRecord record_from_json(const json& j) {
    GenRecord r;
    r.kind = j.at("kind").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mu = j.at("mu").get<double>();
    r.body_radius = j.at("body_radius").get<double>();
    r.r_p = j.at("r_p").get<double>();
    r.e = j.at("e").get<double>();
    r.a = j.at("a").get<double>();
    r.du = j.at("du").get<double>();
    r.tu = j.at("tu").get<double>();
    r.perturbed = j.at("perturbed").get<bool>();
    r.mu_frac = j.at("mu_frac").get<double>();
    r.multiplier = j.at("multiplier").get<double>();
    return r;
}

std::vector<std::string> traj_header(int n) {
    if (n == 4) return {"t", "x", "y", "vx", "vy"};
    if (n == 6) return {"t", "x", "y", "z", "vx", "vy", "vz"};
    throw std::invalid_argument("unsupported state dimension " + std::to_string(n));
}

std::string traj_filename(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "traj_%05zu.csv", i);
    return buf;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json meta;
    meta["format_version"] = 1;
    meta["dt_scaled"] = ds.dt_scaled;
    meta["alpha"] = ds.alpha;
    meta["n"] = ds.n;
    meta["dp"] = ds.dp;
    meta["unit_system"] = to_string(ds.units);
    meta["master_seed"] = ds.master_seed;
    meta["n_trajectories"] = ds.trajectories.size();
    json records = json::array();
    for (const auto& t : ds.trajectories) records.push_back(record_to_json(t.record));
    meta["records"] = std::move(records);
    {
        std::ofstream out(dir / "meta");
        if (!out) throw std::runtime_error("write_dataset: cannot open meta file");
        out << meta.dump(2) << '\n';
    }
    const auto header = traj_header(ds.n);
    for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
        const Trajectory& t = ds.trajectories[i];
        std::vector<Eigen::VectorXd> cols;
        cols.push_back(t.times);
        for (int r = 0; r < ds.n; ++r) cols.push_back(t.states.row(r).transpose());
        io::write_csv(dir / traj_filename(i), header, cols);
    }
}

Dataset read_dataset(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "meta");
    if (!meta_in) throw ParseError("read_dataset: missing meta file in " + dir.string());
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw ParseError("read_dataset: malformed meta file: " + std::string(e.what()));
    }
    Dataset ds;
    ds.dt_scaled = meta.at("dt_scaled").get<double>();
    ds.alpha = meta.at("alpha").get<int>();
    ds.n = meta.at("n").get<int>();
    ds.dp = meta.at("dp").get<int>();
    ds.units = unit_system_from_string(meta.at("unit_system").get<std::string>());
    ds.master_seed = meta.at("master_seed").get<std::uint64_t>();
    const auto n_traj = meta.at("n_trajectories").get<std::size_t>();
    const auto& records = meta.at("records");
    if (records.size() != n_traj) throw ParseError("read_dataset: record count mismatch");

    const int cols_expected = ds.n + 1;
    for (std::size_t i = 0; i < n_traj; ++i) {
        const auto path = dir / traj_filename(i);
        std::ifstream in(path);
        if (!in) throw ParseError("read_dataset: missing trajectory file " + path.string());
        std::string line;
        std::getline(in, line);  // header
        std::vector<std::array<double, 7>> rows;
        std::array<double, 7> row{};
        long lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (static_cast<int>(cells.size()) != cols_expected)
                throw ParseError("read_dataset: wrong column count in " + path.string() +
                                 " line " + std::to_string(lineno));
            for (int c = 0; c < cols_expected; ++c) {
                try {
                    row[c] = std::stod(cells[c]);
                } catch (const std::exception&) {
                    throw ParseError("read_dataset: bad numeric value in " + path.string() +
                                     " line " + std::to_string(lineno));
                }
            }
            rows.push_back(row);
        }
        Trajectory t;
        t.units = ds.units;
        t.record = record_from_json(records.at(i));
        t.times.resize(rows.size());
        t.states.resize(ds.n, static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            t.times(static_cast<Eigen::Index>(r)) = rows[r][0];
            for (int c = 0; c < ds.n; ++c) t.states(c, static_cast<Eigen::Index>(r)) = rows[r][c + 1];
        }
        ds.trajectories.push_back(std::move(t));
    }
    return ds;
}

}  // namespace orblin::datagen

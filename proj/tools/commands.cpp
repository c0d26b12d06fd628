#include "commands.hpp"

#include "orblin/io.hpp"
#include "orblin/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace orblin::cli {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("config: '" + section + "' must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unknown key '" + item.key() + "' in " + section);
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + std::string(key) + "': " + e.what());
    }
}

dynamics::OrbitSpec::Kind kind_from_string(const std::string& s) {
    if (s == "circular") return dynamics::OrbitSpec::Kind::Circular;
    if (s == "elliptical") return dynamics::OrbitSpec::Kind::Elliptical;
    if (s == "perturbed-circular") return dynamics::OrbitSpec::Kind::PerturbedCircular;
    throw ConfigError("config: unknown orbit kind '" + s + "'");
}

dynamics::GravParams body_params(const std::string& body) {
    if (body == "earth") return dynamics::GravParams::earth();
    if (body == "moon") return dynamics::GravParams::moon();
    if (body == "jupiter") return dynamics::GravParams::jupiter();
    throw ConfigError("config: unknown body '" + body + "' (expected earth, moon or jupiter)");
}

void parse_gen(const json& g, RunConfig& cfg) {
    if (cfg.problem == "2bp") {
        check_keys(g, "gen", {"n_ic", "dp", "alpha", "kind", "alt_min_km", "alt_max_km",
                              "e_min", "e_max", "body"});
        read_into(g, "n_ic", cfg.gen2.n_ic);
        read_into(g, "dp", cfg.gen2.dp);
        read_into(g, "alpha", cfg.gen2.alpha);
        read_into(g, "alt_min_km", cfg.gen2.alt_min);
        read_into(g, "alt_max_km", cfg.gen2.alt_max);
        read_into(g, "e_min", cfg.gen2.e_min);
        read_into(g, "e_max", cfg.gen2.e_max);
        std::string kind = "circular", body = "earth";
        read_into(g, "kind", kind);
        read_into(g, "body", body);
        cfg.gen2.kind = kind_from_string(kind);
        if (cfg.gen2.kind == dynamics::OrbitSpec::Kind::PerturbedCircular) {
            if (body != "earth")
                throw ConfigError("config: perturbed generation is defined for earth only");
            cfg.gen2.params = dynamics::GravParams::earth_perturbed();
        } else {
            cfg.gen2.params = body_params(body);
        }
    } else {
        check_keys(g, "gen", {"n_ic", "dp", "alpha", "duration_hours"});
        read_into(g, "n_ic", cfg.gen3.n_ic);
        read_into(g, "dp", cfg.gen3.dp);
        read_into(g, "alpha", cfg.gen3.alpha);
        read_into(g, "duration_hours", cfg.gen3.duration_hours);
    }
}

void parse_train(const json& t, koopman::TrainConfig& train) {
    check_keys(t, "train",
               {"epochs", "batch_size", "batches_per_epoch", "learning_rate", "lr_final",
                "input_noise", "weight_decay",
                "alpha", "hidden_layers", "neurons_per_layer", "lifted_size", "gamma", "beta",
                "lambda1", "lambda2", "lambda_rv", "rcond"});
    read_into(t, "epochs", train.epochs);
    read_into(t, "batch_size", train.batch_size);
    read_into(t, "batches_per_epoch", train.batches_per_epoch);
    read_into(t, "learning_rate", train.learning_rate);
    read_into(t, "lr_final", train.lr_final);
    read_into(t, "input_noise", train.input_noise);
    read_into(t, "weight_decay", train.weight_decay);
    read_into(t, "alpha", train.alpha);
    read_into(t, "hidden_layers", train.hidden_layers);
    read_into(t, "neurons_per_layer", train.neurons_per_layer);
    read_into(t, "lifted_size", train.lifted_size);
    read_into(t, "gamma", train.weights.gamma);
    read_into(t, "beta", train.weights.beta);
    read_into(t, "lambda1", train.weights.lambda1);
    read_into(t, "lambda2", train.weights.lambda2);
    read_into(t, "lambda_rv", train.weights.lambda_rv);
    read_into(t, "rcond", train.rcond);
}

void parse_eval(const json& e, const std::string& problem, EvalScenario& eval) {
    if (problem == "2bp") {
        check_keys(e, "eval", {"body", "altitude_km", "e", "perturbed", "periods", "dp"});
        read_into(e, "body", eval.body);
        read_into(e, "altitude_km", eval.altitude_km);
        read_into(e, "e", eval.e);
        read_into(e, "perturbed", eval.perturbed);
        read_into(e, "periods", eval.periods);
        read_into(e, "dp", eval.dp);
    } else {
        check_keys(e, "eval", {"duration_hours", "multiplier"});
        read_into(e, "duration_hours", eval.duration_hours);
        read_into(e, "multiplier", eval.multiplier);
    }
}

// Hyperparameter defaults differ between the two problems; the CR3BP ones
// are applied before the file's train section so user keys still win.
void apply_cr3bp_train_defaults(koopman::TrainConfig& train) {
    train.batch_size = 16;
    train.learning_rate = 1e-6;
    train.hidden_layers = 13;
    train.neurons_per_layer = 105;
    train.lifted_size = 100;
    train.weights.gamma = 2.0;
    train.weights.lambda1 = 0.004;
    train.weights.lambda2 = 0.001;
    train.weights.lambda_rv = 0.0;
}

struct Reference {
    Trajectory traj;                // in the model's unit system
    dynamics::Cr3bpParams cr3bp;    // valid for cr3bp scenarios
};

// Builds the nonlinear reference trajectory for a scenario, sampled on the
// model's time grid so the linear rollout stays aligned.
Reference make_reference(const EvalScenario& eval, const koopman::KoopmanModel& model,
                         int n_steps) {
    Reference ref;
    if (model.units == UnitSystem::Canonical2bp) {
        dynamics::GravParams params = body_params(eval.body);
        if (eval.perturbed) {
            if (eval.body != "earth")
                throw ConfigError("config: perturbed evaluation is defined for earth only");
            params = dynamics::GravParams::earth_perturbed();
        }
        const double expected_dt = 2.0 * M_PI / eval.dp;
        if (std::abs(expected_dt - model.dt_scaled) > 1e-12 * model.dt_scaled)
            throw ConfigError("config: eval dp does not match the model's time step");

        dynamics::OrbitSpec spec;
        spec.kind = eval.perturbed ? dynamics::OrbitSpec::Kind::PerturbedCircular
                                   : (eval.e > 0.0 ? dynamics::OrbitSpec::Kind::Elliptical
                                                   : dynamics::OrbitSpec::Kind::Circular);
        spec.r_p = params.body_radius + eval.altitude_km;
        spec.e = eval.e;
        spec.validate(params);
        const Eigen::Vector4d ic = dynamics::make_2bp_ic(spec, params);
        const double a = spec.semi_major_axis();
        const double dt = dynamics::orbital_period(a, params.mu) / eval.dp;
        const bool perturbed = eval.perturbed;
        Trajectory traj = dynamics::propagate(
            ic,
            [&params, perturbed](const Eigen::VectorXd& s) -> Eigen::VectorXd {
                return dynamics::two_body_deriv(s, params, perturbed);
            },
            dt, n_steps);
        traj.record.kind = eval.perturbed ? "perturbed-circular"
                                          : (eval.e > 0.0 ? "elliptical" : "circular");
        traj.record.mu = params.mu;
        traj.record.body_radius = params.body_radius;
        traj.record.r_p = spec.r_p;
        traj.record.e = spec.e;
        traj.record.a = a;
        traj.record.perturbed = eval.perturbed;
        ref.traj = datagen::to_canonical(traj, params);
    } else if (model.units == UnitSystem::NondimCr3bp) {
        ref.cr3bp = dynamics::Cr3bpParams::earth_moon();
        const Vector6d ic = dynamics::make_cr3bp_ic(ref.cr3bp, eval.multiplier);
        const double mu_frac = ref.cr3bp.mu_frac;
        ref.traj = dynamics::propagate(
            ic,
            [mu_frac](const Eigen::VectorXd& s) -> Eigen::VectorXd {
                return dynamics::cr3bp_deriv(s, mu_frac);
            },
            model.dt_scaled, n_steps, UnitSystem::NondimCr3bp);
        ref.traj.record.kind = "cr3bp";
        ref.traj.record.mu_frac = mu_frac;
        ref.traj.record.multiplier = eval.multiplier;
    } else {
        throw ConfigError("config: model unit system has no evaluation scenario");
    }
    return ref;
}

int scenario_steps(const EvalScenario& eval, const koopman::KoopmanModel& model) {
    if (model.units == UnitSystem::Canonical2bp) {
        if (eval.periods < 0) throw ConfigError("config: eval periods must be >= 0");
        return eval.periods * eval.dp;
    }
    const dynamics::Cr3bpParams p = dynamics::Cr3bpParams::earth_moon();
    const double duration = eval.duration_hours * 3600.0 / p.t_star;
    return static_cast<int>(std::lround(duration / model.dt_scaled));
}

koopman::KoopmanModel load_model_checked(const std::filesystem::path& path) {
    try {
        return koopman::load_model(path);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
}

std::vector<std::string> state_names(int n) {
    if (n == 4) return {"x", "y", "vx", "vy"};
    return {"x", "y", "z", "vx", "vy", "vz"};
}

void write_csv_checked(const std::filesystem::path& path,
                       const std::vector<std::string>& header,
                       const std::vector<Eigen::VectorXd>& columns) {
    try {
        io::write_csv(path, header, columns);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    check_keys(doc, "top level", {"problem", "seed", "gen", "train", "eval"});

    RunConfig cfg;
    read_into(doc, "problem", cfg.problem);
    if (cfg.problem != "2bp" && cfg.problem != "cr3bp")
        throw ConfigError("config: problem must be '2bp' or 'cr3bp'");
    if (cfg.problem == "cr3bp") apply_cr3bp_train_defaults(cfg.train);
    read_into(doc, "seed", cfg.seed);
    if (doc.contains("gen")) parse_gen(doc.at("gen"), cfg);
    if (doc.contains("train")) parse_train(doc.at("train"), cfg.train);
    if (doc.contains("eval")) parse_eval(doc.at("eval"), cfg.problem, cfg.eval);
    if (seed_override) cfg.seed = *seed_override;
    cfg.gen2.seed = cfg.seed;
    cfg.gen3.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    return cfg;
}

int cmd_gen_data(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    datagen::Dataset ds;
    if (cfg.problem == "2bp")
        ds = datagen::generate_2bp_dataset(cfg.gen2);
    else
        ds = datagen::generate_cr3bp_dataset(cfg.gen3);

    try {
        datagen::write_dataset(ds, out_dir);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }

    std::printf("# initial conditions\n");
    if (cfg.problem == "2bp") {
        std::printf("%6s %-20s %12s %8s %12s\n", "index", "kind", "r_p_km", "e", "a_km");
        for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
            const auto& r = ds.trajectories[i].record;
            std::printf("%6zu %-20s %12.3f %8.4f %12.3f\n", i, r.kind.c_str(), r.r_p, r.e, r.a);
        }
    } else {
        std::printf("%6s %-8s %12s\n", "index", "kind", "multiplier");
        for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
            const auto& r = ds.trajectories[i].record;
            std::printf("%6zu %-8s %12.8f\n", i, r.kind.c_str(), r.multiplier);
        }
    }
    std::printf("wrote %zu trajectories of %lld samples to %s\n", ds.trajectories.size(),
                static_cast<long long>(ds.trajectories.empty() ? 0 : ds.trajectories[0].size()),
                out_dir.string().c_str());
    return kOk;
}

int cmd_train(const std::filesystem::path& dataset_dir, const RunConfig& cfg,
              const std::filesystem::path& out_dir) {
    datagen::Dataset ds;
    try {
        ds = datagen::read_dataset(dataset_dir);
    } catch (const datagen::ParseError& e) {
        throw IoError(e.what());
    }

    koopman::TrainResult result;
    try {
        result = koopman::train(ds, cfg.train);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    try {
        koopman::save_model(result.model, out_dir / "model.json");
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }

    const auto& h = result.history;
    const Eigen::Index m = static_cast<Eigen::Index>(h.size());
    Eigen::VectorXd epoch(m), recon(m), pred(m), l1(m), l2(m), rv(m), total(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        epoch(i) = static_cast<double>(i);
        recon(i) = h[i].recon;
        pred(i) = h[i].pred;
        l1(i) = h[i].l1;
        l2(i) = h[i].l2;
        rv(i) = h[i].rv;
        total(i) = h[i].total;
    }
    write_csv_checked(out_dir / "loss_history.csv",
                      {"epoch", "recon", "pred", "l1", "l2", "rv", "total"},
                      {epoch, recon, pred, l1, l2, rv, total});

    std::printf("trained %d epochs; K is %lldx%lld; final total loss %.6e\n", cfg.train.epochs,
                static_cast<long long>(result.model.K.rows()),
                static_cast<long long>(result.model.K.cols()),
                h.empty() ? 0.0 : h.back().total);
    std::printf("model written to %s\n", (out_dir / "model.json").string().c_str());
    return kOk;
}

int cmd_predict(const std::filesystem::path& model_path, const RunConfig& cfg,
                std::optional<int> n_steps, const std::filesystem::path& out_csv) {
    const koopman::KoopmanModel model = load_model_checked(model_path);
    const int steps = n_steps ? *n_steps : scenario_steps(cfg.eval, model);
    if (steps < 0) throw ConfigError("config: step count must be >= 0");

    // The propagator needs at least one step; a zero-step request is served
    // by truncating a one-step reference back to its initial sample.
    Reference ref = make_reference(cfg.eval, model, std::max(steps, 1));
    if (steps == 0) {
        ref.traj.times = ref.traj.times.head(1).eval();
        ref.traj.states = ref.traj.states.leftCols(1).eval();
    }
    const Trajectory pred = koopman::predict(model, ref.traj.states.col(0), steps);

    std::vector<std::string> header{"t"};
    std::vector<Eigen::VectorXd> cols{ref.traj.times};
    for (const auto& name : state_names(model.n)) header.push_back("pred_" + name);
    for (int r = 0; r < model.n; ++r) cols.push_back(pred.states.row(r).transpose());
    for (const auto& name : state_names(model.n)) header.push_back("ref_" + name);
    for (int r = 0; r < model.n; ++r) cols.push_back(ref.traj.states.row(r).transpose());
    write_csv_checked(out_csv, header, cols);

    std::printf("wrote %d predicted steps to %s\n", steps, out_csv.string().c_str());
    return kOk;
}

int cmd_eval(const std::filesystem::path& model_path, const RunConfig& cfg,
             const std::filesystem::path& out_dir) {
    const koopman::KoopmanModel model = load_model_checked(model_path);
    const int steps = scenario_steps(cfg.eval, model);
    if (steps < 1) throw ConfigError("config: evaluation scenario has no steps");

    const Reference ref = make_reference(cfg.eval, model, steps);
    const metrics::ErrorSeries es = metrics::rollout_errors(model, ref.traj);
    const Trajectory pred = koopman::predict(model, ref.traj.states.col(0), steps);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    write_csv_checked(out_dir / "errors.csv",
                      {"t", "local", "global", "local_pos", "global_pos"},
                      {ref.traj.times.tail(steps), es.local, es.global, es.local_pos,
                       es.global_pos});

    std::ofstream summary(out_dir / "summary.txt");
    if (!summary) throw IoError("cannot open " + (out_dir / "summary.txt").string());
    summary << "problem: " << cfg.problem << "\n";
    summary << "samples: " << ref.traj.size() << "\n";

    if (model.units == UnitSystem::Canonical2bp) {
        const metrics::InvariantReport inv = metrics::circular_invariants(pred);
        write_csv_checked(out_dir / "invariants.csv", {"t", "xi_r", "xi_v", "r_dot_v", "xi_lz"},
                          {pred.times, inv.xi_r, inv.xi_v, inv.r_dot_v, inv.xi_lz});
        summary << "scenario: body=" << cfg.eval.body << " altitude_km=" << cfg.eval.altitude_km
                << " e=" << cfg.eval.e << " perturbed=" << (cfg.eval.perturbed ? "true" : "false")
                << " periods=" << cfg.eval.periods << " dp=" << cfg.eval.dp << "\n";
        summary << "mean radius (canonical): " << io::format_double(es.mean_radius) << "\n";
        summary << "max local position error: " << io::format_double(es.max_local_pos) << "\n";
        summary << "max global position error: " << io::format_double(es.max_global_pos) << "\n";
        summary << "max global position error pct of mean radius: "
                << io::format_double(es.max_global_pos_pct) << "\n";
        summary << "max |xi_r| (predicted): " << io::format_double(inv.max_abs_xi_r) << "\n";
        summary << "max |xi_v| (predicted): " << io::format_double(inv.max_abs_xi_v) << "\n";
        summary << "max |r.v| (predicted): " << io::format_double(inv.max_abs_r_dot_v) << "\n";
        summary << "max |xi_Lz| (predicted): " << io::format_double(inv.max_abs_xi_lz) << "\n";
    } else {
        const Eigen::VectorXd cj_ref = metrics::jacobi_series(ref.traj, ref.cr3bp);
        const Eigen::VectorXd cj_pred = metrics::jacobi_series(pred, ref.cr3bp);
        const Eigen::VectorXd rel_err =
            ((cj_pred - cj_ref).array() / cj_ref.array()).abs().matrix();
        write_csv_checked(out_dir / "jacobi.csv", {"t", "c_ref", "c_pred", "rel_err"},
                          {ref.traj.times, cj_ref, cj_pred, rel_err});
        summary << "scenario: duration_hours=" << cfg.eval.duration_hours
                << " multiplier=" << cfg.eval.multiplier << "\n";
        summary << "max global position error: " << io::format_double(es.max_global_pos) << "\n";
        summary << "max global position error pct of mean radius: "
                << io::format_double(es.max_global_pos_pct) << "\n";
        summary << "max relative Jacobi deviation: "
                << io::format_double(metrics::max_relative_deviation(cj_pred, cj_ref)) << "\n";
    }
    if (!summary) throw IoError("write failed for " + (out_dir / "summary.txt").string());
    summary.close();

    std::ifstream echo(out_dir / "summary.txt");
    std::cout << echo.rdbuf();
    return kOk;
}

}  // namespace orblin::cli

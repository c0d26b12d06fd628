#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

// Shared flags; each is also settable through the ORBLIN_* environment.
void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "run configuration JSON file")
        ->envname("ORBLIN_CONFIG")
        ->required();
    cmd->add_option("--out", args.out, "output path")->envname("ORBLIN_OUT")->required();
    cmd->add_option("--seed", args.seed, "override the config file's master seed")
        ->envname("ORBLIN_SEED");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman/EDMD pipeline for two-body and CR3BP trajectories"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, predict_args, eval_args;
    std::string dataset_dir, model_path_predict, model_path_eval;
    std::optional<int> predict_steps;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a trajectory dataset");
    add_common(gen, gen_args);

    CLI::App* train = app.add_subcommand("train", "train a lifting network and Koopman matrix");
    train->add_option("dataset", dataset_dir, "dataset directory")->required();
    add_common(train, train_args);

    CLI::App* predict =
        app.add_subcommand("predict", "roll out a model next to the nonlinear reference");
    predict->add_option("model", model_path_predict, "model JSON file")->required();
    predict->add_option("--steps", predict_steps, "override the scenario step count");
    add_common(predict, predict_args);

    CLI::App* eval = app.add_subcommand("eval", "score a model on an evaluation scenario");
    eval->add_option("model", model_path_eval, "model JSON file")->required();
    add_common(eval, eval_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Normalize CLI11's parse-error codes to the documented usage code.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : orblin::cli::kUsage;
    }

    using namespace orblin;
    try {
        if (gen->parsed()) {
            const cli::RunConfig cfg = cli::load_run_config(gen_args.config, gen_args.seed);
            return cli::cmd_gen_data(cfg, gen_args.out);
        }
        if (train->parsed()) {
            const cli::RunConfig cfg = cli::load_run_config(train_args.config, train_args.seed);
            return cli::cmd_train(dataset_dir, cfg, train_args.out);
        }
        if (predict->parsed()) {
            const cli::RunConfig cfg =
                cli::load_run_config(predict_args.config, predict_args.seed);
            return cli::cmd_predict(model_path_predict, cfg, predict_steps, predict_args.out);
        }
        const cli::RunConfig cfg = cli::load_run_config(eval_args.config, eval_args.seed);
        return cli::cmd_eval(model_path_eval, cfg, eval_args.out);
    } catch (const cli::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return cli::kConfigError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return cli::kConfigError;
    } catch (const cli::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return cli::kIoError;
    } catch (const datagen::ParseError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return cli::kIoError;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "numerical divergence: %s\n", e.what());
        return cli::kDivergence;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cli::kUsage;
    }
}

#pragma once

#include "orblin/datagen.hpp"
#include "orblin/koopman.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace orblin::cli {

// Exit codes: 0 success, 1 usage, then one code per failure class.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfigError = 2,
    kIoError = 3,
    kDivergence = 4,
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation scenario: which reference orbit the model is scored against.
struct EvalScenario {
    std::string body = "earth";  // earth | moon | jupiter
    double altitude_km = 500.0;  // perigee altitude
    double e = 0.0;
    bool perturbed = false;
    int periods = 1;
    int dp = 1000;  // samples per period; must match the training grid
    double duration_hours = 10.0;  // cr3bp only
    double multiplier = 1.02;      // cr3bp only
};

// Full run configuration: problem selector plus the per-stage sections.
struct RunConfig {
    std::string problem = "2bp";  // 2bp | cr3bp
    std::uint64_t seed = 0;
    datagen::TwoBodyGenConfig gen2;
    datagen::Cr3bpGenConfig gen3;
    koopman::TrainConfig train;
    EvalScenario eval;
};

// Parses and schema-validates a RunConfig JSON file; unknown keys are
// rejected. An optional seed overrides the file's value.
RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override);

int cmd_gen_data(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_train(const std::filesystem::path& dataset_dir, const RunConfig& cfg,
              const std::filesystem::path& out_dir);
int cmd_predict(const std::filesystem::path& model_path, const RunConfig& cfg,
                std::optional<int> n_steps, const std::filesystem::path& out_csv);
int cmd_eval(const std::filesystem::path& model_path, const RunConfig& cfg,
             const std::filesystem::path& out_dir);

}  // namespace orblin::cli

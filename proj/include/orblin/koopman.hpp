#pragma once

#include "orblin/datagen.hpp"
#include "orblin/neuralnet.hpp"
#include "orblin/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace orblin::koopman {

struct LossWeights {
    double gamma = 0.8;
    double beta = 1.0;
    double lambda1 = 0.04;
    double lambda2 = 0.01;
    double lambda_rv = 0.001;  // 2BP only; ignored for 6-dimensional states
};

struct TrainConfig {
    int epochs = 5000;
    int batch_size = 128;
    int batches_per_epoch = 1;
    double learning_rate = 1e-4;
    double lr_final = 0.0;     // > 0 enables geometric decay toward this value
    double input_noise = 0.0;  // sigma of gaussian noise on each rollout start
    double weight_decay = 1e-5;
    int alpha = 25;
    int hidden_layers = 3;
    int neurons_per_layer = 25;
    int lifted_size = 6;  // N learned observables
    std::uint64_t seed = 0;
    LossWeights weights;
    double rcond = 1e-10;

    void validate() const;
};

// Trained lifting network plus the frozen Koopman matrix. The projection
// P = [I_n, 0] is implicit: project() takes the first n rows.
struct KoopmanModel {
    nn::Network encoder;
    Eigen::MatrixXd K;  // (n+N) x (n+N)
    int n = 0;
    int N = 0;
    UnitSystem units = UnitSystem::Canonical2bp;
    double dt_scaled = 0.0;

    int lifted_dim() const { return n + N; }
};

// Lifts a column batch of states: [x; encoder(x)]. The first n rows equal the
// input exactly.
Eigen::MatrixXd lift(const KoopmanModel& model, const Eigen::MatrixXd& states,
                     nn::Tape* tape = nullptr);

// P * lifted: extracts the original-state rows.
Eigen::MatrixXd project(const KoopmanModel& model, const Eigen::MatrixXd& lifted);

// EDMD solve on a snapshot batch: K = lift(Y) * pinv(lift(X)).
Eigen::MatrixXd compute_koopman(const KoopmanModel& model, const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y, double rcond = 1e-10);

// Corrected linear rollout: per step lift, apply K once, project, re-lift.
Trajectory predict(const KoopmanModel& model, const Eigen::VectorXd& ic, int n_steps);

struct LossTerms {
    double recon = 0.0;  // unweighted term values
    double pred = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double rv = 0.0;
    double total = 0.0;
};

// One training batch: segments of alpha+1 consecutive states, one per column
// block. All segments share the state dimension.
using Batch = std::vector<Eigen::MatrixXd>;

// Five-term loss on a batch under a fixed K (no gradient flows through K).
// When grads is non-null the encoder parameter gradients of the weighted
// total are accumulated into it.
LossTerms loss(const KoopmanModel& model, const Eigen::MatrixXd& K, const Batch& batch,
               const LossWeights& weights, int alpha, nn::Gradients* grads = nullptr);

struct TrainResult {
    KoopmanModel model;
    std::vector<LossTerms> history;  // one entry per epoch
};

TrainResult train(const datagen::Dataset& dataset, const TrainConfig& config);

void save_model(const KoopmanModel& model, const std::filesystem::path& path);
KoopmanModel load_model(const std::filesystem::path& path);

}  // namespace orblin::koopman

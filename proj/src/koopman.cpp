#include "orblin/koopman.hpp"

#include "orblin/linalg.hpp"
#include "orblin/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace orblin::koopman {

using json = nlohmann::json;

void TrainConfig::validate() const {
    if (epochs < 1 || batch_size < 1 || batches_per_epoch < 1 || alpha < 1 || lifted_size < 1 ||
        hidden_layers < 0 || neurons_per_layer < 1)
        throw std::invalid_argument("TrainConfig: all counts must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate <= 0");
    if (lr_final < 0.0) throw std::invalid_argument("TrainConfig: lr_final < 0");
    if (input_noise < 0.0) throw std::invalid_argument("TrainConfig: input_noise < 0");
    if (!(rcond > 0.0 && rcond < 1.0)) throw std::invalid_argument("TrainConfig: rcond out of range");
}

Eigen::MatrixXd lift(const KoopmanModel& model, const Eigen::MatrixXd& states, nn::Tape* tape) {
    if (states.rows() != model.n)
        throw std::invalid_argument("lift: state dimension does not match model");
    Eigen::MatrixXd lifted(model.lifted_dim(), states.cols());
    lifted.topRows(model.n) = states;
    lifted.bottomRows(model.N) = nn::forward(model.encoder, states, tape);
    return lifted;
}

Eigen::MatrixXd project(const KoopmanModel& model, const Eigen::MatrixXd& lifted) {
    if (lifted.rows() != model.lifted_dim())
        throw std::invalid_argument("project: lifted dimension does not match model");
    return lifted.topRows(model.n);
}

Eigen::MatrixXd compute_koopman(const KoopmanModel& model, const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y, double rcond) {
    if (X.cols() != Y.cols()) throw std::invalid_argument("compute_koopman: column mismatch");
    return linalg::lstsq_koopman(lift(model, X), lift(model, Y), rcond);
}

namespace {

constexpr double kDivergenceBound = 1e6;

}  // namespace

Trajectory predict(const KoopmanModel& model, const Eigen::VectorXd& ic, int n_steps) {
    if (ic.size() != model.n) throw std::invalid_argument("predict: IC dimension mismatch");
    Trajectory traj;
    traj.units = model.units;
    traj.times.resize(n_steps + 1);
    traj.states.resize(model.n, n_steps + 1);
    Eigen::VectorXd state = ic;
    traj.states.col(0) = state;
    traj.times(0) = 0.0;
    const auto pk = (model.K.topRows(model.n)).eval();  // P*K
    for (int k = 1; k <= n_steps; ++k) {
        state = pk * lift(model, state);
        if (!state.allFinite() || state.cwiseAbs().maxCoeff() > kDivergenceBound)
            throw DivergenceError("predict: rollout diverged at step " + std::to_string(k), k);
        traj.states.col(k) = state;
        traj.times(k) = k * model.dt_scaled;
    }
    return traj;
}

LossTerms loss(const KoopmanModel& model, const Eigen::MatrixXd& K, const Batch& batch,
               const LossWeights& weights, int alpha, nn::Gradients* grads) {
    if (batch.empty()) throw std::invalid_argument("loss: empty batch");
    const int n = model.n;
    const int N = model.N;
    const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
    for (const auto& seg : batch)
        if (seg.rows() != n || seg.cols() != alpha + 1)
            throw std::invalid_argument("loss: segment shape mismatch");

    const Eigen::MatrixXd pk = K.topRows(n);            // P*K, n x (n+N)
    const Eigen::MatrixXd a_block = pk.leftCols(n);     // acts on raw states
    const Eigen::MatrixXd b_block = pk.rightCols(N);    // acts on learned observables
    const bool use_rv = weights.lambda_rv > 0.0 && n == 4;
    const double pair_count = static_cast<double>(b * alpha);

    LossTerms terms;

    // One-step reconstruction over every consecutive pair in the batch.
    {
        Eigen::MatrixXd x_all(n, b * alpha), y_all(n, b * alpha);
        for (Eigen::Index i = 0; i < b; ++i) {
            x_all.middleCols(i * alpha, alpha) = batch[i].leftCols(alpha);
            y_all.middleCols(i * alpha, alpha) = batch[i].rightCols(alpha);
        }
        nn::Tape tape;
        const Eigen::MatrixXd phi = lift(model, x_all, grads ? &tape : nullptr);
        const Eigen::MatrixXd residual = pk * phi - y_all;
        terms.recon = residual.squaredNorm() / pair_count;
        if (grads) {
            const Eigen::MatrixXd out_grad =
                b_block.transpose() * (2.0 * weights.beta / pair_count * residual);
            nn::backward(model.encoder, tape, out_grad, *grads);
        }
    }

    // alpha-step corrected rollout from each segment start, with backprop
    // through the chain of project-and-re-lift steps.
    {
        Eigen::MatrixXd z(n, b);
        for (Eigen::Index i = 0; i < b; ++i) z.col(i) = batch[i].col(0);
        std::vector<nn::Tape> tapes(alpha);
        std::vector<Eigen::MatrixXd> rollout(alpha + 1);
        rollout[0] = z;
        for (int j = 1; j <= alpha; ++j) {
            Eigen::MatrixXd phi_enc =
                nn::forward(model.encoder, rollout[j - 1], grads ? &tapes[j - 1] : nullptr);
            rollout[j] = a_block * rollout[j - 1] + b_block * phi_enc;
        }
        for (int j = 1; j <= alpha; ++j) {
            Eigen::MatrixXd truth(n, b);
            for (Eigen::Index i = 0; i < b; ++i) truth.col(i) = batch[i].col(j);
            terms.pred += (rollout[j] - truth).squaredNorm() / pair_count;
            if (use_rv) {
                const auto& zj = rollout[j];
                for (Eigen::Index i = 0; i < b; ++i) {
                    const double rv = zj(0, i) * zj(2, i) + zj(1, i) * zj(3, i);
                    terms.rv += rv * rv / pair_count;
                }
            }
        }
        if (grads) {
            // Adjoint sweep: a_j = dTotal/d(rollout[j]).
            Eigen::MatrixXd adjoint = Eigen::MatrixXd::Zero(n, b);
            for (int j = alpha; j >= 1; --j) {
                Eigen::MatrixXd truth(n, b);
                for (Eigen::Index i = 0; i < b; ++i) truth.col(i) = batch[i].col(j);
                adjoint += 2.0 * weights.gamma / pair_count * (rollout[j] - truth);
                if (use_rv) {
                    const auto& zj = rollout[j];
                    for (Eigen::Index i = 0; i < b; ++i) {
                        const double rv = zj(0, i) * zj(2, i) + zj(1, i) * zj(3, i);
                        const double c = 2.0 * weights.lambda_rv / pair_count * rv;
                        adjoint(0, i) += c * zj(2, i);
                        adjoint(1, i) += c * zj(3, i);
                        adjoint(2, i) += c * zj(0, i);
                        adjoint(3, i) += c * zj(1, i);
                    }
                }
                const Eigen::MatrixXd input_grad = nn::backward(
                    model.encoder, tapes[j - 1], b_block.transpose() * adjoint, *grads);
                adjoint = (a_block.transpose() * adjoint + input_grad).eval();
            }
        }
    }

    for (const auto& layer : model.encoder.layers) {
        terms.l1 += layer.weights.cwiseAbs().sum();
        terms.l2 += layer.weights.squaredNorm();
    }
    if (grads) {
        for (std::size_t l = 0; l < model.encoder.layers.size(); ++l) {
            const auto& w = model.encoder.layers[l].weights;
            grads->layers[l].weights +=
                weights.lambda1 * w.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }) +
                2.0 * weights.lambda2 * w;
        }
    }

    terms.total = weights.gamma * terms.pred + weights.beta * terms.recon +
                  weights.lambda1 * terms.l1 + weights.lambda2 * terms.l2 +
                  (use_rv ? weights.lambda_rv * terms.rv : 0.0);
    return terms;
}

TrainResult train(const datagen::Dataset& dataset, const TrainConfig& config) {
    config.validate();
    if (dataset.trajectories.empty()) throw std::invalid_argument("train: empty dataset");
    if (config.alpha != dataset.alpha)
        throw std::invalid_argument("train: config alpha does not match dataset alpha");
    const int n = dataset.n;
    const Eigen::Index len = dataset.trajectories.front().size();
    for (const auto& t : dataset.trajectories)
        if (t.dim() != n || t.size() != len)
            throw std::invalid_argument("train: inconsistent trajectory shapes");
    if (len < config.alpha + 2) throw std::invalid_argument("train: trajectories shorter than alpha + 2");

    KoopmanModel model;
    model.n = n;
    model.N = config.lifted_size;
    model.units = dataset.units;
    model.dt_scaled = dataset.dt_scaled;
    model.encoder = nn::make_network(n, config.hidden_layers, config.neurons_per_layer,
                                     config.lifted_size, derive_seed(config.seed, 1));

    nn::AdamState adam = nn::AdamState::init(model.encoder, config.learning_rate,
                                             config.weight_decay);
    Rng sampler(derive_seed(config.seed, 2));
    const std::uint64_t n_traj = dataset.trajectories.size();
    const std::uint64_t max_start = static_cast<std::uint64_t>(len) - config.alpha - 1;

    TrainResult result;
    result.history.reserve(config.epochs);

    const double lr_end = config.lr_final > 0.0 ? config.lr_final : config.learning_rate;
    const double lr_ratio = lr_end / config.learning_rate;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Geometric learning-rate decay from learning_rate to lr_final.
        adam.learning_rate =
            config.learning_rate *
            std::pow(lr_ratio, config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1)
                                                 : 0.0);
        LossTerms epoch_terms;
        for (int bi = 0; bi < config.batches_per_epoch; ++bi) {
            Batch batch;
            batch.reserve(config.batch_size);
            Eigen::MatrixXd x_all(n, config.batch_size * config.alpha);
            Eigen::MatrixXd y_all(n, config.batch_size * config.alpha);
            for (int s = 0; s < config.batch_size; ++s) {
                const auto ti = sampler.next_u64() % n_traj;
                const auto start = sampler.next_u64() % (max_start + 1);
                const auto& states = dataset.trajectories[ti].states;
                batch.push_back(states.middleCols(static_cast<Eigen::Index>(start),
                                                  config.alpha + 1));
                // Perturbing the rollout start (targets stay exact) teaches
                // the corrected map to contract back onto the data manifold.
                if (config.input_noise > 0.0)
                    for (int r = 0; r < n; ++r)
                        batch.back()(r, 0) += config.input_noise * sampler.gaussian();
                x_all.middleCols(s * config.alpha, config.alpha) = batch.back().leftCols(config.alpha);
                y_all.middleCols(s * config.alpha, config.alpha) = batch.back().rightCols(config.alpha);
            }
            const Eigen::MatrixXd k_batch = compute_koopman(model, x_all, y_all, config.rcond);
            nn::Gradients grads = nn::Gradients::zeros_like(model.encoder);
            const LossTerms terms = loss(model, k_batch, batch, config.weights, config.alpha, &grads);
            if (!std::isfinite(terms.total)) {
                std::ostringstream msg;
                msg << "train: non-finite loss at epoch " << epoch << " batch " << bi
                    << " (recon=" << terms.recon << " pred=" << terms.pred << " l1=" << terms.l1
                    << " l2=" << terms.l2 << " rv=" << terms.rv << ")";
                throw std::runtime_error(msg.str());
            }
            nn::adam_step(model.encoder, grads, adam);
            epoch_terms.recon += terms.recon;
            epoch_terms.pred += terms.pred;
            epoch_terms.l1 += terms.l1;
            epoch_terms.l2 += terms.l2;
            epoch_terms.rv += terms.rv;
            epoch_terms.total += terms.total;
        }
        const double inv = 1.0 / config.batches_per_epoch;
        epoch_terms.recon *= inv;
        epoch_terms.pred *= inv;
        epoch_terms.l1 *= inv;
        epoch_terms.l2 *= inv;
        epoch_terms.rv *= inv;
        epoch_terms.total *= inv;
        result.history.push_back(epoch_terms);
    }

    // Freeze K from a full-dataset EDMD solve, not the last mini-batch.
    {
        const Eigen::Index pairs_per_traj = len - 1;
        Eigen::MatrixXd x_full(n, static_cast<Eigen::Index>(n_traj) * pairs_per_traj);
        Eigen::MatrixXd y_full(n, static_cast<Eigen::Index>(n_traj) * pairs_per_traj);
        for (std::uint64_t t = 0; t < n_traj; ++t) {
            const auto& states = dataset.trajectories[t].states;
            x_full.middleCols(static_cast<Eigen::Index>(t) * pairs_per_traj, pairs_per_traj) =
                states.leftCols(pairs_per_traj);
            y_full.middleCols(static_cast<Eigen::Index>(t) * pairs_per_traj, pairs_per_traj) =
                states.rightCols(pairs_per_traj);
        }
        model.K = compute_koopman(model, x_full, y_full, config.rcond);
    }

    result.model = std::move(model);
    return result;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.size();
    const auto cols = rows > 0 ? j.at(0).size() : 0;
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) throw std::runtime_error("model file: ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

constexpr int kModelFormatVersion = 1;

}  // namespace

void save_model(const KoopmanModel& model, const std::filesystem::path& path) {
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["n"] = model.n;
    doc["N"] = model.N;
    doc["unit_system"] = to_string(model.units);
    doc["dt_scaled"] = model.dt_scaled;
    json layers = json::array();
    for (const auto& layer : model.encoder.layers) {
        json l;
        l["weights"] = matrix_to_json(layer.weights);
        l["biases"] = matrix_to_json(layer.biases);
        layers.push_back(std::move(l));
    }
    doc["encoder"] = std::move(layers);
    doc["K"] = matrix_to_json(model.K);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
    out << doc.dump(1) << '\n';
    if (!out) throw std::runtime_error("save_model: write failed");
}

KoopmanModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_model: corrupt model file " + path.string() + ": " +
                                 e.what());
    }
    if (doc.value("format_version", -1) != kModelFormatVersion)
        throw std::runtime_error("load_model: unsupported model format version");
    KoopmanModel model;
    model.n = doc.at("n").get<int>();
    model.N = doc.at("N").get<int>();
    model.units = unit_system_from_string(doc.at("unit_system").get<std::string>());
    model.dt_scaled = doc.at("dt_scaled").get<double>();
    for (const auto& l : doc.at("encoder")) {
        nn::Layer layer;
        layer.weights = matrix_from_json(l.at("weights"));
        layer.biases = matrix_from_json(l.at("biases")).col(0);
        model.encoder.layers.push_back(std::move(layer));
    }
    model.K = matrix_from_json(doc.at("K"));
    if (model.K.rows() != model.lifted_dim() || model.K.cols() != model.lifted_dim())
        throw std::runtime_error("load_model: K dimension inconsistent with n + N");
    return model;
}

}  // namespace orblin::koopman

#include "orblin/neuralnet.hpp"

#include "orblin/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace orblin::nn {

double selu(double z) {
    return z > 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * (std::exp(z) - 1.0);
}

double selu_prime(double z) {
    return z > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(z);
}

Network make_network(int input_dim, int hidden_layers, int neurons_per_layer, int output_dim,
                     std::uint64_t seed) {
    if (input_dim < 1 || output_dim < 1 || hidden_layers < 0 ||
        (hidden_layers > 0 && neurons_per_layer < 1))
        throw std::invalid_argument("make_network: bad dimensions");
    Rng rng(seed);
    Network net;
    int fan_in = input_dim;
    auto add_layer = [&](int out) {
        Layer layer;
        layer.weights.resize(out, fan_in);
        const double stddev = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
                layer.weights(i, j) = stddev * rng.gaussian();
        layer.biases = Eigen::VectorXd::Zero(out);
        net.layers.push_back(std::move(layer));
        fan_in = out;
    };
    for (int h = 0; h < hidden_layers; ++h) add_layer(neurons_per_layer);
    add_layer(output_dim);
    return net;
}

Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& batch, Tape* tape) {
    if (batch.rows() != net.input_dim())
        throw std::invalid_argument("forward: batch row count does not match input dimension");
    if (tape) {
        tape->pre.clear();
        tape->act.clear();
        tape->act.push_back(batch);
    }
    Eigen::MatrixXd a = batch;
    const std::size_t last = net.layers.size() - 1;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Eigen::MatrixXd z = (net.layers[l].weights * a).colwise() + net.layers[l].biases;
        if (l < last) {
            a = z.unaryExpr([](double v) { return selu(v); });
        } else {
            a = z;
        }
        if (tape) {
            tape->pre.push_back(std::move(z));
            tape->act.push_back(a);
        }
    }
    return a;
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    g.layers.reserve(net.layers.size());
    for (const auto& layer : net.layers)
        g.layers.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                            Eigen::VectorXd::Zero(layer.biases.size())});
    return g;
}

void Gradients::scale(double s) {
    for (auto& layer : layers) {
        layer.weights *= s;
        layer.biases *= s;
    }
}

Eigen::MatrixXd backward(const Network& net, const Tape& tape, const Eigen::MatrixXd& output_grad,
                         Gradients& grads) {
    const std::size_t n_layers = net.layers.size();
    if (tape.pre.size() != n_layers || tape.act.size() != n_layers + 1)
        throw std::invalid_argument("backward: tape does not match network");
    if (grads.layers.size() != n_layers)
        throw std::invalid_argument("backward: gradient buffer does not match network");
    if (output_grad.rows() != net.output_dim() || output_grad.cols() != tape.act[0].cols())
        throw std::invalid_argument("backward: output gradient shape mismatch");

    Eigen::MatrixXd delta = output_grad;  // output layer is linear
    for (std::size_t l = n_layers; l-- > 0;) {
        grads.layers[l].weights.noalias() += delta * tape.act[l].transpose();
        grads.layers[l].biases.noalias() += delta.rowwise().sum();
        Eigen::MatrixXd upstream = net.layers[l].weights.transpose() * delta;
        if (l == 0) return upstream;
        delta = upstream.cwiseProduct(
            tape.pre[l - 1].unaryExpr([](double v) { return selu_prime(v); }));
    }
    return {};  // unreachable
}

AdamState AdamState::init(const Network& net, double learning_rate, double weight_decay) {
    AdamState s;
    auto zeros = Gradients::zeros_like(net);
    s.m = zeros.layers;
    s.v = zeros.layers;
    s.learning_rate = learning_rate;
    s.weight_decay = weight_decay;
    return s;
}

void adam_step(Network& net, const Gradients& grads, AdamState& state) {
    if (grads.layers.size() != net.layers.size() || state.m.size() != net.layers.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const double shrink = 1.0 - state.learning_rate * state.weight_decay;
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
        p.array() -= state.learning_rate * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + state.epsilon);
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        net.layers[l].weights *= shrink;  // decoupled weight decay, weights only
        update(net.layers[l].weights, grads.layers[l].weights, state.m[l].weights,
               state.v[l].weights);
        update(net.layers[l].biases, grads.layers[l].biases, state.m[l].biases,
               state.v[l].biases);
    }
}

}  // namespace orblin::nn

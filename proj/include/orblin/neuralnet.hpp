#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace orblin::nn {

// SELU constants (Klambauer et al. fixed-point values).
constexpr double kSeluLambda = 1.0507009873554805;
constexpr double kSeluAlpha = 1.6732632423543772;

double selu(double z);
double selu_prime(double z);

struct Layer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd biases;
};

// Fully connected feedforward net, SELU on hidden layers, linear output.
struct Network {
    std::vector<Layer> layers;

    int input_dim() const { return static_cast<int>(layers.front().weights.cols()); }
    int output_dim() const { return static_cast<int>(layers.back().weights.rows()); }
};

// LeCun-normal weights (Normal(0, 1/fan_in)), zero biases. hidden_layers may
// be zero, giving a single linear layer.
Network make_network(int input_dim, int hidden_layers, int neurons_per_layer, int output_dim,
                     std::uint64_t seed);

// Cached activations from one forward pass; act[0] is the input batch.
struct Tape {
    std::vector<Eigen::MatrixXd> pre;  // pre-activation per layer
    std::vector<Eigen::MatrixXd> act;  // post-activation, act[0] = input
};

// Forward pass on a column batch; fills the tape when given.
Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& batch, Tape* tape = nullptr);

struct Gradients {
    std::vector<Layer> layers;  // same shapes as the network

    static Gradients zeros_like(const Network& net);
    void scale(double s);
};

// Backpropagates output_grad through the tape. Parameter gradients are
// accumulated into grads (summed over batch columns); returns the gradient
// with respect to the input batch so rollout losses can chain through states.
Eigen::MatrixXd backward(const Network& net, const Tape& tape, const Eigen::MatrixXd& output_grad,
                         Gradients& grads);

struct AdamState {
    std::vector<Layer> m;  // first moments
    std::vector<Layer> v;  // second moments
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-4;
    double weight_decay = 1e-5;  // decoupled multiplicative shrink on weights

    static AdamState init(const Network& net, double learning_rate, double weight_decay);
};

void adam_step(Network& net, const Gradients& grads, AdamState& state);

}  // namespace orblin::nn

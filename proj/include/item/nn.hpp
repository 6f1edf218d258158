#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace item::nn {

enum class Output { Identity, Softmax };
enum class Loss { SquaredError, CrossEntropy };

// Fully connected network, ReLU hidden layers. Weights are row-major
// (out x in) per layer.
struct Mlp {
    std::vector<std::size_t> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    Output output = Output::Identity;

    std::size_t num_layers() const { return weights.size(); }
    std::size_t input_dim() const { return sizes.front(); }
    std::size_t output_dim() const { return sizes.back(); }

    std::vector<double> forward(const std::vector<double>& input) const;
};

// He-uniform initialization, seeded.
Mlp make_mlp(const std::vector<std::size_t>& sizes, Output output, std::uint64_t seed);

struct Grads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};
Grads zero_grads(const Mlp& net);

// Backprop through the network.
//  - Loss::SquaredError: `target_or_grad` is dL/dy at the output (caller
//    builds it, e.g. zeroed except the taken action). Accumulates into g.
//  - Loss::CrossEntropy: `target_or_grad` is the target distribution; the
//    network output must be Softmax. Accumulates softmax-CE gradients.
// Returns the loss value for the sample (0 for the raw-gradient path).
double backward(const Mlp& net, const std::vector<double>& input,
                const std::vector<double>& target_or_grad, Loss loss, Grads& g);

struct AdamState {
    std::uint64_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};
AdamState make_adam(const Mlp& net, double lr = 1e-3);

void adam_step(Mlp& net, const Grads& g, AdamState& state);

// Checkpoint: text header (version, sizes, activation) + raw little-endian
// 64-bit floats, layer by layer, weights then biases.
void save(const Mlp& net, const std::string& path);
Mlp load(const std::string& path);

std::size_t argmax(const std::vector<double>& v);  // ties -> lowest index

}  // namespace item::nn

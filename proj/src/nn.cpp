#include "item/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "item/kernels.hpp"

namespace item::nn {

namespace {

void check_shapes(const Mlp& net) {
    if (net.sizes.size() < 2) throw std::invalid_argument("Mlp: need >= 2 layers");
    if (net.weights.size() != net.sizes.size() - 1 ||
        net.biases.size() != net.sizes.size() - 1)
        throw std::invalid_argument("Mlp: inconsistent layer count");
}

void softmax_inplace(std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

}  // namespace

Mlp make_mlp(const std::vector<std::size_t>& sizes, Output output,
             std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need >= 2 layers");
    Mlp net;
    net.sizes = sizes;
    net.output = output;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t fan_in = sizes[l];
        const std::size_t fan_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-limit, limit);
        std::vector<double> w(fan_out * fan_in);
        for (double& x : w) x = u(rng);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

std::vector<double> Mlp::forward(const std::vector<double>& input) const {
    check_shapes(*this);
    if (input.size() != sizes.front())
        throw std::invalid_argument("forward: input dimension mismatch");
    std::vector<double> act = input;
    std::vector<double> next;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        next.assign(sizes[l + 1], 0.0);
        kernels::matvec(weights[l].data(), act.data(), biases[l].data(),
                        next.data(), sizes[l + 1], sizes[l]);
        if (l + 1 < weights.size()) kernels::relu(next.data(), next.size());
        act.swap(next);
    }
    if (output == Output::Softmax) softmax_inplace(act);
    return act;
}

Grads zero_grads(const Mlp& net) {
    Grads g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights.emplace_back(net.weights[l].size(), 0.0);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

double backward(const Mlp& net, const std::vector<double>& input,
                const std::vector<double>& target_or_grad, Loss loss, Grads& g) {
    check_shapes(net);
    if (input.size() != net.sizes.front())
        throw std::invalid_argument("backward: input dimension mismatch");
    if (target_or_grad.size() != net.sizes.back())
        throw std::invalid_argument("backward: target dimension mismatch");
    if (loss == Loss::CrossEntropy && net.output != Output::Softmax)
        throw std::invalid_argument("backward: cross-entropy requires softmax output");

    const std::size_t L = net.num_layers();
    // forward pass keeping pre-activations and activations
    std::vector<std::vector<double>> acts(L + 1);
    std::vector<std::vector<double>> pre(L);
    acts[0] = input;
    for (std::size_t l = 0; l < L; ++l) {
        pre[l].assign(net.sizes[l + 1], 0.0);
        kernels::matvec(net.weights[l].data(), acts[l].data(),
                        net.biases[l].data(), pre[l].data(), net.sizes[l + 1],
                        net.sizes[l]);
        acts[l + 1] = pre[l];
        if (l + 1 < L) kernels::relu(acts[l + 1].data(), acts[l + 1].size());
    }
    std::vector<double> out = acts[L];
    if (net.output == Output::Softmax) softmax_inplace(out);

    double loss_value = 0.0;
    std::vector<double> delta(net.sizes.back());
    if (loss == Loss::CrossEntropy) {
        // dL/dlogits = softmax - target
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta[i] = out[i] - target_or_grad[i];
            if (target_or_grad[i] > 0.0)
                loss_value -= target_or_grad[i] * std::log(std::max(out[i], 1e-300));
        }
    } else {
        // raw output gradient supplied by the caller (identity output path)
        delta = target_or_grad;
    }

    for (std::size_t l = L; l-- > 0;) {
        kernels::outer_acc(g.weights[l].data(), delta.data(), acts[l].data(),
                           net.sizes[l + 1], net.sizes[l]);
        kernels::axpy(1.0, delta.data(), g.biases[l].data(), delta.size());
        if (l == 0) break;
        std::vector<double> prev(net.sizes[l]);
        kernels::matvec_t(net.weights[l].data(), delta.data(), prev.data(),
                          net.sizes[l + 1], net.sizes[l]);
        kernels::relu_backward(pre[l - 1].data(), prev.data(), prev.size());
        delta.swap(prev);
    }
    return loss_value;
}

AdamState make_adam(const Mlp& net, double lr) {
    AdamState s;
    s.lr = lr;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        s.m_w.emplace_back(net.weights[l].size(), 0.0);
        s.v_w.emplace_back(net.weights[l].size(), 0.0);
        s.m_b.emplace_back(net.biases[l].size(), 0.0);
        s.v_b.emplace_back(net.biases[l].size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(std::vector<double>& p, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v,
                 const AdamState& s, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}

}  // namespace

void adam_step(Mlp& net, const Grads& g, AdamState& state) {
    if (g.weights.size() != net.weights.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        adam_update(net.weights[l], g.weights[l], state.m_w[l], state.v_w[l],
                    state, bc1, bc2);
        adam_update(net.biases[l], g.biases[l], state.m_b[l], state.v_b[l],
                    state, bc1, bc2);
    }
}

namespace {

constexpr const char* kCkptTag = "item-mlp v1";

void write_doubles_le(std::ofstream& out, const std::vector<double>& v) {
    static_assert(std::endian::native == std::endian::little,
                  "big-endian hosts need byte swapping here");
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles_le(std::ifstream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("mlp checkpoint truncated");
}

}  // namespace

void save(const Mlp& net, const std::string& path) {
    check_shapes(net);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << kCkptTag << "\n";
    out << "sizes";
    for (auto s : net.sizes) out << " " << s;
    out << "\n";
    out << "output " << (net.output == Output::Softmax ? "softmax" : "identity")
        << "\n";
    out << "data\n";
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        write_doubles_le(out, net.weights[l]);
        write_doubles_le(out, net.biases[l]);
    }
}

Mlp load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCkptTag)
        throw std::runtime_error(path + ": bad checkpoint version tag");
    if (!std::getline(in, line) || line.rfind("sizes ", 0) != 0)
        throw std::runtime_error(path + ": bad checkpoint header");
    Mlp net;
    {
        std::stringstream ss(line.substr(6));
        std::size_t s;
        while (ss >> s) net.sizes.push_back(s);
    }
    if (net.sizes.size() < 2) throw std::runtime_error(path + ": bad layer sizes");
    if (!std::getline(in, line) || line.rfind("output ", 0) != 0)
        throw std::runtime_error(path + ": bad checkpoint header");
    std::string act = line.substr(7);
    if (act == "softmax")
        net.output = Output::Softmax;
    else if (act == "identity")
        net.output = Output::Identity;
    else
        throw std::runtime_error(path + ": unknown activation tag");
    if (!std::getline(in, line) || line != "data")
        throw std::runtime_error(path + ": bad checkpoint header");
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
        net.weights.emplace_back(net.sizes[l + 1] * net.sizes[l]);
        net.biases.emplace_back(net.sizes[l + 1]);
        read_doubles_le(in, net.weights.back());
        read_doubles_le(in, net.biases.back());
    }
    for (const auto& w : net.weights)
        for (double x : w)
            if (!std::isfinite(x))
                throw std::runtime_error(path + ": non-finite parameter");
    return net;
}

std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace item::nn

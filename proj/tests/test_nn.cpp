#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "item/nn.hpp"

using namespace item::nn;
namespace fs = std::filesystem;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double s = 1.0) {
    std::normal_distribution<double> d(0.0, s);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

double sq_loss(const Mlp& net, const std::vector<double>& x,
               const std::vector<double>& t) {
    auto y = net.forward(x);
    double L = 0;
    for (std::size_t i = 0; i < y.size(); ++i) L += (y[i] - t[i]) * (y[i] - t[i]);
    return L;
}

double ce_loss(const Mlp& net, const std::vector<double>& x,
               const std::vector<double>& t) {
    auto y = net.forward(x);
    double L = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (t[i] > 0) L -= t[i] * std::log(y[i]);
    return L;
}

// Central finite differences over a sample of parameters.
void check_grads(Mlp net, const std::vector<double>& x,
                 const std::vector<double>& t, Loss loss) {
    auto g = zero_grads(net);
    if (loss == Loss::SquaredError) {
        auto y = net.forward(x);
        std::vector<double> dy(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) dy[i] = 2.0 * (y[i] - t[i]);
        backward(net, x, dy, loss, g);
    } else {
        backward(net, x, t, loss, g);
    }

    const double h = 1e-5;
    std::mt19937_64 probe(99);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t layer = probe() % net.num_layers();
        bool is_weight = probe() % 2 == 0;
        auto& vec = is_weight ? net.weights[layer] : net.biases[layer];
        auto& gvec = is_weight ? g.weights[layer] : g.biases[layer];
        std::size_t idx = probe() % vec.size();

        double orig = vec[idx];
        vec[idx] = orig + h;
        double lp = loss == Loss::SquaredError ? sq_loss(net, x, t) : ce_loss(net, x, t);
        vec[idx] = orig - h;
        double lm = loss == Loss::SquaredError ? sq_loss(net, x, t) : ce_loss(net, x, t);
        vec[idx] = orig;

        double fd = (lp - lm) / (2 * h);
        double an = gvec[idx];
        double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
        CHECK(std::abs(fd - an) / denom < 1e-4);
    }
}

}  // namespace

TEST_CASE("make_mlp: shapes, seeding, zero biases") {
    auto net = make_mlp({2, 8, 3}, Output::Identity, 42);
    REQUIRE(net.num_layers() == 2);
    CHECK(net.weights[0].size() == 16);
    CHECK(net.weights[1].size() == 24);
    for (double b : net.biases[0]) CHECK(b == 0.0);
    // He-uniform bound on layer 0: sqrt(6/2)
    double bound = std::sqrt(6.0 / 2.0);
    for (double w : net.weights[0]) CHECK(std::abs(w) <= bound);

    auto net2 = make_mlp({2, 8, 3}, Output::Identity, 42);
    CHECK(net.weights[0] == net2.weights[0]);
    auto net3 = make_mlp({2, 8, 3}, Output::Identity, 43);
    CHECK(net.weights[0] != net3.weights[0]);
}

TEST_CASE("forward: hand-built affine network") {
    Mlp net;
    net.sizes = {1, 1};
    net.weights = {{2.0}};
    net.biases = {{1.0}};
    net.output = Output::Identity;
    CHECK(net.forward({3.0})[0] == doctest::Approx(7.0));

    // Zero network outputs biases.
    Mlp z;
    z.sizes = {2, 2};
    z.weights = {{0, 0, 0, 0}};
    z.biases = {{0.5, -0.5}};
    z.output = Output::Identity;
    auto y = z.forward({10, -10});
    CHECK(y[0] == doctest::Approx(0.5));
    CHECK(y[1] == doctest::Approx(-0.5));
}

TEST_CASE("forward: softmax properties") {
    Mlp net;
    net.sizes = {3, 3};
    net.weights = {{1, 0, 0, 0, 1, 0, 0, 0, 1}};
    net.biases = {{0, 0, 0}};
    net.output = Output::Softmax;
    auto y = net.forward({0, 0, 0});
    for (double p : y) CHECK(p == doctest::Approx(1.0 / 3.0));

    auto y2 = net.forward({1000, 999, 998});  // max-shift keeps this finite
    double s = y2[0] + y2[1] + y2[2];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y2[0] > y2[1]);
    CHECK(y2[1] > y2[2]);
}

TEST_CASE("backward: gradient matches finite differences (squared error)") {
    std::mt19937_64 rng(7);
    auto net = make_mlp({2, 8, 3}, Output::Identity, 1);
    check_grads(net, random_vec(rng, 2), random_vec(rng, 3), Loss::SquaredError);

    auto deep = make_mlp({5, 64, 64, 8}, Output::Identity, 2);
    check_grads(deep, random_vec(rng, 5), random_vec(rng, 8), Loss::SquaredError);
}

TEST_CASE("backward: gradient matches finite differences (cross entropy)") {
    std::mt19937_64 rng(8);
    auto net = make_mlp({2, 16, 3}, Output::Softmax, 3);
    std::vector<double> t{0, 1, 0};
    check_grads(net, random_vec(rng, 2), t, Loss::CrossEntropy);
}

TEST_CASE("backward: cross-entropy loss value and near-zero grad at optimum") {
    // Softmax over identical logits with uniform target -> loss = log 3, grad ~ 0.
    Mlp net;
    net.sizes = {3, 3};
    net.weights = {std::vector<double>(9, 0.0)};
    net.biases = {{0, 0, 0}};
    net.output = Output::Softmax;
    auto g = zero_grads(net);
    std::vector<double> t{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double L = backward(net, {1, 2, 3}, t, Loss::CrossEntropy, g);
    CHECK(L == doctest::Approx(std::log(3.0)));
    for (double gb : g.biases[0]) CHECK(std::abs(gb) < 1e-12);
}

TEST_CASE("adam: first step magnitude and determinism") {
    Mlp net;
    net.sizes = {1, 1};
    net.weights = {{1.0}};
    net.biases = {{0.0}};
    net.output = Output::Identity;
    auto st = make_adam(net, 0.1);
    auto g = zero_grads(net);
    g.weights[0][0] = 3.7;  // any nonzero value: first step is -lr * sign(g)
    adam_step(net, g, st);
    CHECK(net.weights[0][0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));

    // Zero gradient leaves parameters fixed.
    Mlp net2;
    net2.sizes = {1, 1};
    net2.weights = {{2.0}};
    net2.biases = {{0.5}};
    auto st2 = make_adam(net2, 0.1);
    auto gz = zero_grads(net2);
    adam_step(net2, gz, st2);
    CHECK(net2.weights[0][0] == doctest::Approx(2.0));
    CHECK(net2.biases[0][0] == doctest::Approx(0.5));
}

TEST_CASE("training: linearly separable binary task reaches 100%") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    for (int i = 0; i < 200; ++i) {
        double a = u(rng), b = u(rng);
        if (std::abs(a + b) < 0.1) continue;  // margin
        xs.push_back({a, b});
        ys.push_back(a + b > 0 ? 1 : 0);
    }
    auto net = make_mlp({2, 16, 2}, Output::Softmax, 5);
    auto adam = make_adam(net, 1e-2);
    for (int step = 0; step < 2000; ++step) {
        auto g = zero_grads(net);
        std::size_t i = rng() % xs.size();
        std::vector<double> t(2, 0.0);
        t[ys[i]] = 1.0;
        backward(net, xs[i], t, Loss::CrossEntropy, g);
        adam_step(net, g, adam);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (argmax(net.forward(xs[i])) == ys[i]) ++correct;
    CHECK(correct == xs.size());
}

TEST_CASE("checkpoint round trip is bit-exact") {
    auto net = make_mlp({7, 64, 64, 8}, Output::Identity, 123);
    fs::path p = fs::temp_directory_path() / "mlp_rt.ckpt";
    save(net, p.string());
    auto net2 = load(p.string());
    CHECK(net2.sizes == net.sizes);
    CHECK(net2.output == net.output);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        CHECK(net2.weights[l] == net.weights[l]);
        CHECK(net2.biases[l] == net.biases[l]);
    }
    std::mt19937_64 rng(1);
    auto x = random_vec(rng, 7);
    CHECK(net.forward(x) == net2.forward(x));
}

TEST_CASE("checkpoint: corrupt files rejected") {
    fs::path p = fs::temp_directory_path() / "mlp_bad.ckpt";
    std::ofstream(p) << "wrong-tag v1\n";
    CHECK_THROWS(load(p.string()));

    auto net = make_mlp({3, 4, 2}, Output::Softmax, 1);
    fs::path full = fs::temp_directory_path() / "mlp_full.ckpt";
    save(net, full.string());
    // Truncate the payload.
    auto bytes = fs::file_size(full);
    fs::resize_file(full, bytes - 16);
    CHECK_THROWS(load(full.string()));
    CHECK_THROWS(load("/nonexistent/x.ckpt"));
}

TEST_CASE("argmax tie-break: lowest index") {
    CHECK(argmax({1.0, 3.0, 3.0, 2.0}) == 1);
    CHECK(argmax({5.0}) == 0);
    CHECK(argmax({-2.0, -2.0}) == 0);
}

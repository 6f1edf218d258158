#include "item/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace item::recognizer {

RecognitionDataset build_dataset(const std::vector<cycles::TripFeatures>& features,
                                 const std::vector<std::size_t>& labels,
                                 const clustering::ClusterModel& model,
                                 double val_fraction, std::uint64_t seed) {
    if (features.size() != labels.size())
        throw std::invalid_argument("build_dataset: features/labels length mismatch");
    if (features.size() < 10)
        throw std::invalid_argument("build_dataset: need at least 10 labeled trips");
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
        throw std::invalid_argument("build_dataset: val_fraction must be in (0,1)");

    std::vector<std::vector<std::size_t>> by_class(model.k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= model.k)
            throw std::invalid_argument("build_dataset: label out of range");
        by_class[labels[i]].push_back(i);
    }
    for (std::size_t c = 0; c < model.k; ++c)
        if (by_class[c].empty())
            throw std::invalid_argument("build_dataset: missing class " +
                                        std::to_string(c));

    RecognitionDataset ds;
    ds.seed = seed;
    ds.inputs.reserve(features.size());
    for (const auto& f : features) ds.inputs.push_back(model.normalize_one(f));
    ds.labels = labels;

    std::mt19937_64 rng(seed);
    for (auto& idx : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_val = static_cast<std::size_t>(
            std::llround(val_fraction * static_cast<double>(idx.size())));
        n_val = std::clamp<std::size_t>(n_val, 1, idx.size() - 1);
        ds.val_idx.insert(ds.val_idx.end(), idx.begin(),
                          idx.begin() + static_cast<long>(n_val));
        ds.train_idx.insert(ds.train_idx.end(),
                            idx.begin() + static_cast<long>(n_val), idx.end());
    }
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.val_idx.begin(), ds.val_idx.end());
    return ds;
}

double accuracy(const nn::Mlp& net, const std::vector<clustering::Point>& inputs,
                const std::vector<std::size_t>& labels,
                const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i : idx) {
        auto out = net.forward({inputs[i][0], inputs[i][1]});
        if (nn::argmax(out) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

TrainReport train_classifier(const RecognitionDataset& ds, const TrainConfig& cfg,
                             nn::Mlp& net_out) {
    std::size_t n_classes = 0;
    for (std::size_t l : ds.labels) n_classes = std::max(n_classes, l + 1);

    std::vector<std::size_t> sizes{2};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(n_classes);
    net_out = nn::make_mlp(sizes, nn::Output::Softmax, cfg.seed);
    auto adam = nn::make_adam(net_out, cfg.lr);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order = ds.train_idx;
    TrainReport rep;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch) {
            const std::size_t end = std::min(b + cfg.batch, order.size());
            auto g = nn::zero_grads(net_out);
            for (std::size_t j = b; j < end; ++j) {
                const std::size_t i = order[j];
                std::vector<double> target(n_classes, 0.0);
                target[ds.labels[i]] = 1.0;
                epoch_loss += nn::backward(net_out,
                                           {ds.inputs[i][0], ds.inputs[i][1]},
                                           target, nn::Loss::CrossEntropy, g);
            }
            const double inv = 1.0 / static_cast<double>(end - b);
            for (auto& w : g.weights)
                for (double& x : w) x *= inv;
            for (auto& bi : g.biases)
                for (double& x : bi) x *= inv;
            nn::adam_step(net_out, g, adam);
        }
        rep.final_loss = epoch_loss / static_cast<double>(order.size());
        if (!std::isfinite(rep.final_loss))
            throw std::runtime_error("train_classifier: non-finite loss at epoch " +
                                     std::to_string(epoch));
    }

    rep.train_accuracy = accuracy(net_out, ds.inputs, ds.labels, ds.train_idx);
    rep.val_accuracy = accuracy(net_out, ds.inputs, ds.labels, ds.val_idx);
    return rep;
}

SlidingRecognizer::SlidingRecognizer(double window_s, double dt,
                                     clustering::ClusterModel model, nn::Mlp net,
                                     UpdateMode mode)
    : dt_(dt),
      capacity_(static_cast<std::size_t>(std::floor(window_s / dt + 1e-9))),
      mode_(mode),
      cluster_model_(std::move(model)),
      net_(std::move(net)) {
    if (capacity_ < 2)
        throw std::invalid_argument("SlidingRecognizer: window shorter than 2 samples");
}

std::size_t SlidingRecognizer::classify_window() {
    cycles::MicroTrip trip;
    trip.samples.assign(buffer_.begin(), buffer_.end());
    auto f = cycles::extract_features(trip, dt_);
    auto p = cluster_model_.normalize_one(f);
    auto out = net_.forward({p[0], p[1]});
    return nn::argmax(out);
}

std::size_t SlidingRecognizer::step(double v_mps) {
    buffer_.push_back(v_mps);
    if (buffer_.size() > capacity_) buffer_.pop_front();
    ++samples_seen_;  
    if (buffer_.size() < capacity_) return current_label_;  // cold start: label 0

    if (mode_ == UpdateMode::EveryStep || samples_seen_ % capacity_ == 0)
        current_label_ = classify_window();
    return current_label_;
}

void save_bundle(const RecognizerBundle& b, const std::string& dir) {
    std::filesystem::create_directories(dir);
    clustering::save_model(b.cluster_model, dir + "/clusters.txt");
    nn::save(b.net, dir + "/recognizer.ckpt");
    nlohmann::json manifest{
        {"version", 1},
        {"window_s", b.window_s},
        {"update_mode", b.mode == UpdateMode::EveryStep ? "every-step" : "window-boundary"}};
    std::ofstream out(dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

RecognizerBundle load_bundle(const std::string& dir) {
    RecognizerBundle b;
    b.cluster_model = clustering::load_model(dir + "/clusters.txt");
    b.net = nn::load(dir + "/recognizer.ckpt");
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw std::runtime_error("cannot open recognizer manifest in " + dir);
    nlohmann::json manifest = nlohmann::json::parse(in);
    b.window_s = manifest.at("window_s").get<double>();
    b.mode = manifest.at("update_mode").get<std::string>() == "window-boundary"
                 ? UpdateMode::WindowBoundary
                 : UpdateMode::EveryStep;
    return b;
}

}  // namespace item::recognizer

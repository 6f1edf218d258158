#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "item/clustering.hpp"
#include "item/cycles.hpp"
#include "item/nn.hpp"

namespace item::recognizer {

struct RecognitionDataset {
    std::vector<clustering::Point> inputs;   // normalized feature pairs
    std::vector<std::size_t> labels;         // 0..k-1
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::uint64_t seed = 0;
};

// Stratified shuffle split; inputs normalized with the model's stored stats.
RecognitionDataset build_dataset(const std::vector<cycles::TripFeatures>& features,
                                 const std::vector<std::size_t>& labels,
                                 const clustering::ClusterModel& model,
                                 double val_fraction, std::uint64_t seed);

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch = 32;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    std::vector<std::size_t> hidden{16, 16};
};

struct TrainReport {
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double final_loss = 0.0;
};

TrainReport train_classifier(const RecognitionDataset& ds, const TrainConfig& cfg,
                             nn::Mlp& net_out);

double accuracy(const nn::Mlp& net, const std::vector<clustering::Point>& inputs,
                const std::vector<std::size_t>& labels,
                const std::vector<std::size_t>& idx);

enum class UpdateMode { EveryStep, WindowBoundary };

// Streaming driving-condition recognition over a trailing speed window.
class SlidingRecognizer {
public:
    SlidingRecognizer(double window_s, double dt, clustering::ClusterModel model,
                      nn::Mlp net, UpdateMode mode = UpdateMode::EveryStep);

    // Append one speed sample; returns the current driving-condition label.
    std::size_t step(double v_mps);

    std::size_t current_label() const { return current_label_; }
    bool buffer_full() const { return buffer_.size() >= capacity_; }
    const clustering::ClusterModel& cluster_model() const { return cluster_model_; }

private:
    std::size_t classify_window();

    double dt_;
    std::size_t capacity_;
    UpdateMode mode_;
    std::deque<double> buffer_;
    std::size_t samples_seen_ = 0;
    clustering::ClusterModel cluster_model_;
    nn::Mlp net_;
    std::size_t current_label_ = 0;
};

// Bundle persistence: cluster model + checkpoint + manifest in a directory.
struct RecognizerBundle {
    clustering::ClusterModel cluster_model;
    nn::Mlp net;
    double window_s = 20.0;
    UpdateMode mode = UpdateMode::EveryStep;
};
void save_bundle(const RecognizerBundle& b, const std::string& dir);
RecognizerBundle load_bundle(const std::string& dir);

}  // namespace item::recognizer

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "item/cycles.hpp"

namespace item::clustering {

using Point = std::array<double, 2>;  // normalized (avg_speed, max_accel)

struct ClusterModel {
    std::size_t k = 0;
    std::vector<Point> centers;      // normalized feature space
    Point feat_mean{0.0, 0.0};
    Point feat_scale{1.0, 1.0};      // population standard deviation
    double inertia = 0.0;

    Point normalize_one(const cycles::TripFeatures& f) const;
};

// Z-score normalization (population std). Throws on zero-variance columns.
struct Normalized {
    std::vector<Point> points;
    Point mean;
    Point scale;
};
Normalized normalize(const std::vector<cycles::TripFeatures>& features);

// Lloyd's algorithm with k-means++ seeding. Deterministic for fixed seed.
ClusterModel kmeans_fit(const std::vector<Point>& points, std::size_t k,
                        std::uint64_t seed, std::size_t max_iter = 300,
                        double tol = 1e-10);

// Convenience: normalize features, fit, and store the normalization constants.
ClusterModel fit_features(const std::vector<cycles::TripFeatures>& features,
                          std::size_t k, std::uint64_t seed);

// Nearest-center label in normalized space; ties broken by lowest index.
std::size_t assign(const ClusterModel& model, const cycles::TripFeatures& feature);
std::size_t assign_point(const ClusterModel& model, const Point& p);

std::vector<std::size_t> labels_for(const ClusterModel& model,
                                    const std::vector<cycles::TripFeatures>& features);

// Versioned text persistence.
void save_model(const ClusterModel& model, const std::string& path);
ClusterModel load_model(const std::string& path);

}  // namespace item::clustering

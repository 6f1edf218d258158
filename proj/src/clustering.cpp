#include "item/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace item::clustering {

namespace {

double sq_dist(const Point& a, const Point& b) {
    double dx = a[0] - b[0];
    double dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

std::size_t nearest(const std::vector<Point>& centers, const Point& p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        double d = sq_dist(centers[j], p);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

}  // namespace

Point ClusterModel::normalize_one(const cycles::TripFeatures& f) const {
    return {(f.avg_speed - feat_mean[0]) / feat_scale[0],
            (f.max_accel - feat_mean[1]) / feat_scale[1]};
}

Normalized normalize(const std::vector<cycles::TripFeatures>& features) {
    if (features.size() < 2)
        throw std::invalid_argument("normalize: need at least 2 samples");
    const auto n = static_cast<double>(features.size());
    Point mean{0.0, 0.0};
    for (const auto& f : features) {
        mean[0] += f.avg_speed;
        mean[1] += f.max_accel;
    }
    mean[0] /= n;
    mean[1] /= n;
    Point var{0.0, 0.0};
    for (const auto& f : features) {
        var[0] += (f.avg_speed - mean[0]) * (f.avg_speed - mean[0]);
        var[1] += (f.max_accel - mean[1]) * (f.max_accel - mean[1]);
    }
    var[0] /= n;
    var[1] /= n;
    if (var[0] <= 0.0 || var[1] <= 0.0)
        throw std::invalid_argument("normalize: zero-variance feature column");
    Point scale{std::sqrt(var[0]), std::sqrt(var[1])};
    Normalized out;
    out.mean = mean;
    out.scale = scale;
    out.points.reserve(features.size());
    for (const auto& f : features)
        out.points.push_back({(f.avg_speed - mean[0]) / scale[0],
                              (f.max_accel - mean[1]) / scale[1]});
    return out;
}

ClusterModel kmeans_fit(const std::vector<Point>& points, std::size_t k,
                        std::uint64_t seed, std::size_t max_iter, double tol) {
    if (k < 1) throw std::invalid_argument("kmeans_fit: k must be >= 1");
    if (points.size() < k)
        throw std::invalid_argument("kmeans_fit: fewer points than clusters");

    std::mt19937_64 rng(seed);

    // k-means++ seeding
    std::vector<Point> centers;
    centers.reserve(k);
    {
        std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
        centers.push_back(points[first(rng)]);
        std::vector<double> d2(points.size());
        while (centers.size() < k) {
            double total = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& c : centers) best = std::min(best, sq_dist(c, points[i]));
                d2[i] = best;
                total += best;
            }
            if (total <= 0.0) {
                // all remaining mass at existing centers; pick any point
                std::uniform_int_distribution<std::size_t> any(0, points.size() - 1);
                centers.push_back(points[any(rng)]);
                continue;
            }
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            std::size_t pick = points.size() - 1;
            double acc = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                acc += d2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
            centers.push_back(points[pick]);
        }
    }

    std::vector<std::size_t> labels(points.size(), 0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    double inertia = 0.0;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        inertia = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            labels[i] = nearest(centers, points[i]);
            inertia += sq_dist(centers[labels[i]], points[i]);
        }
        if (inertia > prev_inertia + 1e-12)
            throw std::logic_error("kmeans_fit: inertia increased");
        prev_inertia = inertia;

        std::vector<Point> next(k, Point{0.0, 0.0});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            next[labels[i]][0] += points[i][0];
            next[labels[i]][1] += points[i][1];
            ++counts[labels[i]];
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) {
                // empty-cluster repair: reseed at the point farthest from its center
                std::size_t far_i = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < points.size(); ++i) {
                    double d = sq_dist(centers[labels[i]], points[i]);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                next[j] = points[far_i];
                prev_inertia = std::numeric_limits<double>::infinity();
            } else {
                next[j][0] /= static_cast<double>(counts[j]);
                next[j][1] /= static_cast<double>(counts[j]);
            }
        }

        double shift = 0.0;
        for (std::size_t j = 0; j < k; ++j) shift += sq_dist(centers[j], next[j]);
        centers = std::move(next);
        if (shift < tol) break;
    }

    // final assignment pass with the converged centers
    inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        inertia += sq_dist(centers[nearest(centers, points[i])], points[i]);

    // stable labeling: clusters ordered by center avg-speed component
    std::sort(centers.begin(), centers.end(),
              [](const Point& a, const Point& b) {
                  return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
              });

    ClusterModel model;
    model.k = k;
    model.centers = std::move(centers);
    model.inertia = inertia;
    return model;
}

ClusterModel fit_features(const std::vector<cycles::TripFeatures>& features,
                          std::size_t k, std::uint64_t seed) {
    auto norm = normalize(features);
    ClusterModel model = kmeans_fit(norm.points, k, seed);
    model.feat_mean = norm.mean;
    model.feat_scale = norm.scale;
    return model;
}

std::size_t assign_point(const ClusterModel& model, const Point& p) {
    if (model.centers.empty()) throw std::logic_error("assign: model not fitted");
    return nearest(model.centers, p);
}

std::size_t assign(const ClusterModel& model, const cycles::TripFeatures& feature) {
    return assign_point(model, model.normalize_one(feature));
}

std::vector<std::size_t> labels_for(const ClusterModel& model,
                                    const std::vector<cycles::TripFeatures>& features) {
    std::vector<std::size_t> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(assign(model, f));
    return out;
}

namespace {
constexpr const char* kModelTag = "item-cluster-model v1";
}

void save_model(const ClusterModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cluster model: " + path);
    out.precision(17);
    out << kModelTag << "\n";
    out << "k " << model.k << "\n";
    out << "mean " << model.feat_mean[0] << " " << model.feat_mean[1] << "\n";
    out << "scale " << model.feat_scale[0] << " " << model.feat_scale[1] << "\n";
    out << "inertia " << model.inertia << "\n";
    for (const auto& c : model.centers) out << "center " << c[0] << " " << c[1] << "\n";
}

ClusterModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cluster model: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kModelTag)
        throw std::runtime_error(path + ": bad cluster model version tag");
    ClusterModel m;
    std::string key;
    in >> key >> m.k;
    if (key != "k") throw std::runtime_error(path + ": corrupt cluster model");
    in >> key >> m.feat_mean[0] >> m.feat_mean[1];
    if (key != "mean") throw std::runtime_error(path + ": corrupt cluster model");
    in >> key >> m.feat_scale[0] >> m.feat_scale[1];
    if (key != "scale") throw std::runtime_error(path + ": corrupt cluster model");
    in >> key >> m.inertia;
    if (key != "inertia") throw std::runtime_error(path + ": corrupt cluster model");
    for (std::size_t j = 0; j < m.k; ++j) {
        Point c;
        in >> key >> c[0] >> c[1];
        if (!in || key != "center")
            throw std::runtime_error(path + ": corrupt cluster model");
        m.centers.push_back(c);
    }
    return m;
}

}  // namespace item::clustering

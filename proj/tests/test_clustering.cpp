#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <vector>

#include "item/clustering.hpp"

using namespace item::clustering;
using item::cycles::TripFeatures;
namespace fs = std::filesystem;

namespace {

double sq_dist(const Point& a, const Point& b) {
    double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

double partition_cost(const std::vector<Point>& pts,
                      const std::vector<std::size_t>& labels, std::size_t k) {
    std::vector<Point> c(k, {0, 0});
    std::vector<std::size_t> n(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        c[labels[i]][0] += pts[i][0];
        c[labels[i]][1] += pts[i][1];
        ++n[labels[i]];
    }
    for (std::size_t j = 0; j < k; ++j)
        if (n[j]) {
            c[j][0] /= n[j];
            c[j][1] /= n[j];
        }
    double cost = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) cost += sq_dist(pts[i], c[labels[i]]);
    return cost;
}

}  // namespace

TEST_CASE("normalize: z-score with population std") {
    std::vector<TripFeatures> f{{0.0, 0.0}, {2.0, 2.0}};
    auto n = normalize(f);
    CHECK(n.mean[0] == doctest::Approx(1.0));
    CHECK(n.scale[0] == doctest::Approx(1.0));  // population std of {0,2}
    CHECK(n.points[0][0] == doctest::Approx(-1.0));
    CHECK(n.points[1][1] == doctest::Approx(1.0));

    std::vector<TripFeatures> f4{{1, 10}, {3, 20}, {5, 30}, {7, 40}};
    auto n4 = normalize(f4);
    CHECK(n4.mean[0] == doctest::Approx(4.0));
    CHECK(n4.scale[0] == doctest::Approx(std::sqrt(5.0)));
    double s = 0, ss = 0;
    for (const auto& p : n4.points) {
        s += p[0];
        ss += p[0] * p[0];
    }
    CHECK(s == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ss / 4.0 == doctest::Approx(1.0));
}

TEST_CASE("normalize: zero-variance column rejected") {
    std::vector<TripFeatures> f{{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}};
    CHECK_THROWS(normalize(f));
}

TEST_CASE("kmeans: k == n gives zero inertia") {
    std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}};
    auto m = kmeans_fit(pts, 3, 1);
    CHECK(m.inertia == doctest::Approx(0.0).epsilon(1e-12));
    std::set<std::size_t> labels;
    for (const auto& p : pts) labels.insert(assign_point(m, p));
    CHECK(labels.size() == 3);
}

TEST_CASE("kmeans: matches brute-force optimum on a small instance") {
    // Three tight pairs; the optimal 3-partition is unambiguous.
    std::vector<Point> pts{{0, 0}, {0.1, 0}, {5, 5}, {5.1, 5}, {10, 0}, {10, 0.1}};
    auto m = kmeans_fit(pts, 3, 7);

    // Brute force all 3^6 labelings.
    double best = 1e300;
    for (int code = 0; code < 729; ++code) {
        std::vector<std::size_t> lab(6);
        int c = code;
        std::set<std::size_t> used;
        for (int i = 0; i < 6; ++i) {
            lab[i] = c % 3;
            used.insert(lab[i]);
            c /= 3;
        }
        if (used.size() != 3) continue;
        best = std::min(best, partition_cost(pts, lab, 3));
    }
    CHECK(m.inertia == doctest::Approx(best).epsilon(1e-9));

    // The pairs land in the same cluster.
    CHECK(assign_point(m, pts[0]) == assign_point(m, pts[1]));
    CHECK(assign_point(m, pts[2]) == assign_point(m, pts[3]));
    CHECK(assign_point(m, pts[4]) == assign_point(m, pts[5]));
    CHECK(assign_point(m, pts[0]) != assign_point(m, pts[2]));
}

TEST_CASE("kmeans: deterministic for fixed seed, centers sorted by first axis") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(0, 0.3);
    std::vector<Point> pts;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 50; ++i)
            pts.push_back({3.0 * c + d(rng), d(rng)});

    auto m1 = kmeans_fit(pts, 3, 11);
    auto m2 = kmeans_fit(pts, 3, 11);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(m1.centers[j][0] == m2.centers[j][0]);
        CHECK(m1.centers[j][1] == m2.centers[j][1]);
    }
    CHECK(m1.centers[0][0] < m1.centers[1][0]);
    CHECK(m1.centers[1][0] < m1.centers[2][0]);
}

TEST_CASE("assign: agrees with a linear-scan oracle, ties to lowest index") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    std::vector<Point> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng)});
    auto m = kmeans_fit(pts, 4, 2);

    for (int i = 0; i < 1000; ++i) {
        Point p{u(rng), u(rng)};
        std::size_t best = 0;
        double bd = sq_dist(p, m.centers[0]);
        for (std::size_t j = 1; j < m.centers.size(); ++j) {
            double d = sq_dist(p, m.centers[j]);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        CHECK(assign_point(m, p) == best);
    }

    // Equidistant point between two centers -> lowest index.
    ClusterModel tie;
    tie.k = 2;
    tie.centers = {{-1, 0}, {1, 0}};
    CHECK(assign_point(tie, {0, 0}) == 0);
}

TEST_CASE("fit_features end to end with normalization baked into assign") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> d(0, 0.08);
    std::vector<TripFeatures> feats;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 40; ++i)
            feats.push_back({5.0 * (c + 1) + d(rng), 0.5 * (c + 1) + d(rng)});
    auto m = fit_features(feats, 3, 7);
    auto labs = labels_for(m, feats);
    // Each true cluster should map to one label, in speed order.
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 40; ++i)
            CHECK(labs[c * 40 + i] == static_cast<std::size_t>(c));
}

TEST_CASE("model persistence round trip") {
    std::vector<TripFeatures> feats;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 20);
    for (int i = 0; i < 60; ++i) feats.push_back({u(rng), u(rng) / 10.0});
    auto m = fit_features(feats, 3, 7);

    fs::path p = fs::temp_directory_path() / "cluster_model.txt";
    save_model(m, p.string());
    auto m2 = load_model(p.string());
    CHECK(m2.k == m.k);
    CHECK(m2.inertia == doctest::Approx(m.inertia).epsilon(1e-12));
    for (std::size_t j = 0; j < m.k; ++j) {
        CHECK(m2.centers[j][0] == doctest::Approx(m.centers[j][0]).epsilon(1e-15));
        CHECK(m2.centers[j][1] == doctest::Approx(m.centers[j][1]).epsilon(1e-15));
    }
    for (const auto& f : feats) CHECK(assign(m2, f) == assign(m, f));

    fs::path bad = fs::temp_directory_path() / "cluster_bad.txt";
    std::ofstream(bad) << "not-a-model v9\n";
    CHECK_THROWS(load_model(bad.string()));
    CHECK_THROWS(load_model("/nonexistent/model.txt"));
}

TEST_CASE("kmeans input validation") {
    std::vector<Point> pts{{0, 0}, {1, 1}};
    CHECK_THROWS(kmeans_fit(pts, 3, 1));  // k > n
    CHECK_THROWS(kmeans_fit(pts, 0, 1));
}

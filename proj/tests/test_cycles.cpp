#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "item/cycles.hpp"

using namespace item::cycles;
namespace fs = std::filesystem;

namespace {

std::string write_tmp(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p);
    f << content;
    return p.string();
}

}  // namespace

TEST_CASE("load_cycle: basic file, dt inferred, grade optional") {
    auto path = write_tmp("cyc_basic.csv",
                          "# a comment\n"
                          "t_s,v_mps\n"
                          "0,0\n"
                          "1,5\n"
                          "2,10\n");
    auto c = load_cycle(path);
    CHECK(c.dt == doctest::Approx(1.0));
    REQUIRE(c.speed.size() == 3);
    CHECK(c.speed[1] == doctest::Approx(5.0));
    CHECK(c.grade.empty());
    CHECK(c.grade_at(2) == 0.0);
    CHECK(c.duration() == doctest::Approx(2.0));
}

TEST_CASE("load_cycle: grade column parsed") {
    auto path = write_tmp("cyc_grade.csv",
                          "t_s,v_mps,grade_rad\n"
                          "0,0,0.00\n"
                          "0.5,2,0.01\n"
                          "1.0,4,0.02\n");
    auto c = load_cycle(path);
    CHECK(c.dt == doctest::Approx(0.5));
    REQUIRE(c.grade.size() == 3);
    CHECK(c.grade_at(1) == doctest::Approx(0.01));
}

TEST_CASE("load_cycle: error cases") {
    CHECK_THROWS(load_cycle(write_tmp("cyc_empty.csv", "t_s,v_mps\n")));
    CHECK_THROWS(load_cycle(write_tmp("cyc_badhdr.csv", "time,speed\n0,0\n1,1\n")));
    CHECK_THROWS(load_cycle(write_tmp("cyc_nonuni.csv",
                                      "t_s,v_mps\n0,0\n1,1\n2.5,2\n")));
    CHECK_THROWS(load_cycle(write_tmp("cyc_neg.csv", "t_s,v_mps\n0,0\n1,-3\n")));
    CHECK_THROWS(load_cycle(write_tmp("cyc_garbled.csv", "t_s,v_mps\n0,abc\n")));
    CHECK_THROWS(load_cycle("/nonexistent/nope.csv"));
}

TEST_CASE("save/load round trip") {
    DriveCycle c;
    c.name = "rt";
    c.dt = 1.0;
    c.speed = {0.0, 3.25, 7.5, 7.5, 2.0};
    c.grade = {0.0, 0.005, 0.01, 0.0, -0.005};
    fs::path p = fs::temp_directory_path() / "cyc_rt.csv";
    save_cycle(c, p.string());
    auto c2 = load_cycle(p.string());
    REQUIRE(c2.speed.size() == c.speed.size());
    for (std::size_t i = 0; i < c.speed.size(); ++i) {
        CHECK(c2.speed[i] == doctest::Approx(c.speed[i]).epsilon(1e-12));
        CHECK(c2.grade[i] == doctest::Approx(c.grade[i]).epsilon(1e-12));
    }
}

TEST_CASE("resample: linear interpolation") {
    DriveCycle c;
    c.dt = 1.0;
    c.speed = {0.0, 10.0};
    auto r = resample(c, 0.5);
    REQUIRE(r.speed.size() == 3);
    CHECK(r.speed[1] == doctest::Approx(5.0));

    DriveCycle tri;
    tri.dt = 3.0;
    tri.speed = {0.0, 6.0, 0.0};
    auto t2 = resample(tri, 1.5);
    REQUIRE(t2.speed.size() == 5);
    CHECK(t2.speed[1] == doctest::Approx(3.0));
    CHECK(t2.speed[2] == doctest::Approx(6.0));
    CHECK(t2.speed[3] == doctest::Approx(3.0));

    // identity resample
    auto same = resample(tri, 3.0);
    REQUIRE(same.speed.size() == tri.speed.size());
    for (std::size_t i = 0; i < tri.speed.size(); ++i)
        CHECK(same.speed[i] == doctest::Approx(tri.speed[i]).epsilon(1e-12));

    CHECK_THROWS(resample(tri, 0.0));
    CHECK_THROWS(resample(tri, -1.0));
}

TEST_CASE("resample round trip at original grid points") {
    DriveCycle c;
    c.dt = 1.0;
    c.speed = {0, 2, 5, 9, 14, 11, 6, 3, 0};
    auto fine = resample(c, 0.25);
    auto back = resample(fine, 1.0);
    REQUIRE(back.speed.size() == c.speed.size());
    for (std::size_t i = 0; i < c.speed.size(); ++i)
        CHECK(back.speed[i] == doctest::Approx(c.speed[i]).epsilon(1e-9));
}

TEST_CASE("segment: window math and remainder drop") {
    DriveCycle c;
    c.dt = 1.0;
    c.speed.assign(100, 5.0);
    auto trips = segment(c, 20.0);
    CHECK(trips.size() == 5);
    for (const auto& t : trips) CHECK(t.samples.size() == 20);
    CHECK(trips[2].start_index == 40);

    // 19 s of data at 1 Hz can't fill a 20 s window
    DriveCycle short_c;
    short_c.dt = 1.0;
    short_c.speed.assign(19, 5.0);
    CHECK(segment(short_c, 20.0).empty());

    // 110 samples: remainder of 10 dropped
    DriveCycle c2;
    c2.dt = 1.0;
    c2.speed.assign(110, 5.0);
    CHECK(segment(c2, 20.0).size() == 5);

    CHECK_THROWS(segment(c, 0.5));  // fewer than 2 samples per window
}

TEST_CASE("segment: windows partition the kept prefix") {
    DriveCycle c;
    c.dt = 1.0;
    for (int i = 0; i < 73; ++i) c.speed.push_back(static_cast<double>(i % 17));
    auto trips = segment(c, 20.0);
    REQUIRE(trips.size() == 3);
    std::size_t pos = 0;
    for (const auto& t : trips) {
        CHECK(t.start_index == pos);
        for (std::size_t j = 0; j < t.samples.size(); ++j)
            CHECK(t.samples[j] == c.speed[pos + j]);
        pos += t.samples.size();
    }
}

TEST_CASE("extract_features: hand-computed oracles") {
    MicroTrip flat{"", 0, {10.0, 10.0, 10.0}};
    auto f = extract_features(flat, 1.0);
    CHECK(f.avg_speed == doctest::Approx(10.0));
    CHECK(f.max_accel == doctest::Approx(0.0));

    MicroTrip up{"", 0, {0.0, 2.0, 6.0}};
    auto fu = extract_features(up, 1.0);
    CHECK(fu.avg_speed == doctest::Approx(8.0 / 3.0));
    CHECK(fu.max_accel == doctest::Approx(4.0));  // forward difference

    MicroTrip down{"", 0, {6.0, 4.0, 2.0}};
    auto fd = extract_features(down, 1.0);
    CHECK(fd.avg_speed == doctest::Approx(4.0));
    CHECK(fd.max_accel == doctest::Approx(-2.0));

    // dt scales the difference
    auto fh = extract_features(up, 0.5);
    CHECK(fh.max_accel == doctest::Approx(8.0));

    MicroTrip tiny{"", 0, {1.0}};
    CHECK_THROWS(extract_features(tiny, 1.0));
}

TEST_CASE("bundled cycles load and segment") {
    auto c = load_cycle(std::string(ITEM_SOURCE_DIR) + "/data/cycles/urban_1.csv");
    CHECK(c.dt == doctest::Approx(1.0));
    CHECK(c.speed.size() > 100);
    auto trips = segment(c, 20.0);
    CHECK(trips.size() == c.speed.size() / 20);
    for (const auto& t : trips) {
        auto f = extract_features(t, c.dt);
        CHECK(f.avg_speed >= 0.0);
    }
}

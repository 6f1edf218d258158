#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "item/report.hpp"

using namespace item;
using namespace item::report;
using TP = agents::EpisodeMetrics::TracePoint;
namespace fs = std::filesystem;

namespace {

Trace make_trace(std::size_t n, double fuel_rate, double p_tm, double t_cab) {
    Trace tr;
    for (std::size_t i = 0; i < n; ++i) {
        TP p{};
        p.t_s = static_cast<double>(i);
        p.fuel_rate_gps = fuel_rate;
        p.p_tm_w = p_tm;
        p.t_cab_c = t_cab;
        p.soc = 0.65 - 1e-5 * static_cast<double>(i);
        p.soh = 1.0 - 1e-9 * static_cast<double>(i);
        p.fuel_g = fuel_rate * static_cast<double>(i);
        tr.push_back(p);
    }
    return tr;
}

agents::EpisodeMetrics metrics(double fuel, double tm, double e_cab = 0.5,
                               double soc_final = 0.68) {
    agents::EpisodeMetrics m;
    m.fuel_g = fuel;
    m.tm_energy_wh = tm;
    m.mean_abs_e_cab = e_cab;
    m.soc_initial = 0.65;
    m.soc_final = soc_final;
    m.soh_loss = 1e-6;
    return m;
}

}  // namespace

TEST_CASE("aggregate: hand-computed integrals") {
    AggregateConfig cfg;
    cfg.warmup_s = 0.0;
    // 1 g/s over 100 steps of 1 s -> 100 g; 360 W -> 10 Wh.
    auto s = aggregate(make_trace(100, 1.0, 360.0, 22.0), cfg);
    CHECK(s.fuel_g == doctest::Approx(100.0));
    CHECK(s.tm_energy_wh == doctest::Approx(10.0));
    CHECK(s.mean_abs_e_cab == doctest::Approx(0.0));
    CHECK(s.comfort_fraction == doctest::Approx(1.0));
    CHECK(s.soc_initial == doctest::Approx(0.65));

    CHECK_THROWS(aggregate({}, cfg));
}

TEST_CASE("aggregate: comfort statistics respect warm-up and band") {
    AggregateConfig cfg;
    cfg.warmup_s = 120.0;
    cfg.comfort_band_c = 2.0;
    // 200 points: cabin at 25 C (error 3) throughout.
    auto s = aggregate(make_trace(200, 0.0, 0.0, 25.0), cfg);
    CHECK(s.mean_abs_e_cab == doctest::Approx(3.0));
    CHECK(s.comfort_fraction == doctest::Approx(0.0));

    // In-band case.
    auto s2 = aggregate(make_trace(200, 0.0, 0.0, 23.0), cfg);
    CHECK(s2.mean_abs_e_cab == doctest::Approx(1.0));
    CHECK(s2.comfort_fraction == doctest::Approx(1.0));

    // Half the post-warm-up points out of band.
    Trace mixed = make_trace(200, 0.0, 0.0, 23.0);
    for (std::size_t i = 120; i < 160; ++i) mixed[i].t_cab_c = 27.0;
    auto s3 = aggregate(mixed, cfg);
    CHECK(s3.comfort_fraction == doctest::Approx(0.5));
    CHECK(s3.mean_abs_e_cab == doctest::Approx(0.5 * 1.0 + 0.5 * 5.0));
}

TEST_CASE("aggregate: invariant to splitting the trace into chunks") {
    AggregateConfig cfg;
    cfg.warmup_s = 0.0;
    Trace tr = make_trace(300, 0.7, 123.0, 24.0);
    auto whole = aggregate(tr, cfg);
    Trace first(tr.begin(), tr.begin() + 130);
    Trace second(tr.begin() + 130, tr.end());
    auto a = aggregate(first, cfg);
    auto b = aggregate(second, cfg);
    CHECK(a.fuel_g + b.fuel_g == doctest::Approx(whole.fuel_g).epsilon(1e-12));
    CHECK(a.tm_energy_wh + b.tm_energy_wh ==
          doctest::Approx(whole.tm_energy_wh).epsilon(1e-12));
}

TEST_CASE("compare: delta percentages, reference figures reproduced") {
    VariantMetrics aware{"aware", {metrics(419.3, 91.78)}};
    VariantMetrics blind{"blind", {metrics(500.0, 100.0)}};
    auto r = compare(aware, blind, std::nullopt, "cycle.csv", {1});
    CHECK(r.fuel_delta_pct == doctest::Approx(16.14));
    CHECK(r.tm_delta_pct == doctest::Approx(8.22));

    auto j = comparison_to_json(r);
    CHECK(j.find("\"fuel_reduction_pct\": 16.14") != std::string::npos);
    CHECK(j.find("reference_reported") != std::string::npos);
}

TEST_CASE("compare: means over seeds, self-comparison, antisymmetry") {
    VariantMetrics a{"aware", {metrics(100, 10), metrics(120, 12), metrics(80, 8)}};
    VariantMetrics b{"blind", {metrics(150, 15), metrics(150, 15), metrics(150, 15)}};
    auto r = compare(a, b, std::nullopt, "c", {1, 2, 3});
    // mean aware fuel 100 vs blind 150 -> 33.33% reduction
    CHECK(r.fuel_delta_pct == doctest::Approx(100.0 / 3.0));
    CHECK(r.tm_delta_pct == doctest::Approx(100.0 / 3.0));

    auto self = compare(a, a, std::nullopt, "c", {1, 2, 3});
    CHECK(self.fuel_delta_pct == doctest::Approx(0.0));
    CHECK(self.tm_delta_pct == doctest::Approx(0.0));

    // Swapping variants flips the sign of the numerator (not the exact value,
    // since the denominator changes): signs must oppose.
    auto rev = compare(b, a, std::nullopt, "c", {1, 2, 3});
    CHECK(rev.fuel_delta_pct < 0.0);
    CHECK(r.fuel_delta_pct > 0.0);

    // Validation errors.
    VariantMetrics short_v{"x", {metrics(1, 1)}};
    CHECK_THROWS(compare(a, short_v, std::nullopt, "c", {1, 2, 3}));
    CHECK_THROWS(compare(a, b, std::nullopt, "c", {1, 2}));
    VariantMetrics empty{"e", {}};
    CHECK_THROWS(compare(empty, empty, std::nullopt, "c", {}));
}

TEST_CASE("emit_plots: six panels with matching row counts") {
    Trace aware = make_trace(50, 0.5, 100.0, 22.5);
    Trace blind = make_trace(50, 0.6, 120.0, 23.5);
    fs::path dir = fs::temp_directory_path() / "item_plots_test";
    fs::remove_all(dir);
    emit_plots(aware, blind, dir.string());

    const char* names[] = {"battery_temp.csv", "engine_temp.csv", "cabin_temp.csv",
                           "soc.csv",          "soh.csv",         "fuel.csv"};
    for (const char* n : names) {
        fs::path p = dir / n;
        REQUIRE(fs::exists(p));
        std::ifstream in(p);
        std::string line;
        std::getline(in, line);
        CHECK(line == "time_s,aware,blind");
        std::size_t rows = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 50);
    }

    // Spot-check one value in the cabin panel.
    std::ifstream in(dir / "cabin_temp.csv");
    std::string hdr, first;
    std::getline(in, hdr);
    std::getline(in, first);
    CHECK(first == "0,22.5,23.5");
}

TEST_CASE("save_trace_csv: header and row count") {
    Trace tr = make_trace(10, 0.1, 50.0, 22.0);
    fs::path p = fs::temp_directory_path() / "trace_test.csv";
    save_trace_csv(tr, p.string());
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "t_s,v_mps,t_bat_c,t_cl_c,t_cab_c,soc,soh,fuel_g,p_ice_w,p_tm_w,"
          "fuel_rate_gps,dc_label,a_ems,a_cab");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 10);
}

TEST_CASE("manifest round trip") {
    RunManifest m;
    m.command = "compare";
    m.config_hash = "deadbeef01234567";
    m.seeds = {1, 2, 3};
    m.cycles = {"data/cycles/city_eval.csv"};
    m.checkpoints = {"runs/aware/seed_1/ems.ckpt"};
    m.artifacts = {"comparison.json"};
    m.timestamp = "2026-08-23T00:00:00Z";
    fs::path p = fs::temp_directory_path() / "manifest_test.json";
    save_manifest(m, p.string());
    auto m2 = load_manifest(p.string());
    CHECK(m2.command == m.command);
    CHECK(m2.config_hash == m.config_hash);
    CHECK(m2.seeds == m.seeds);
    CHECK(m2.cycles == m.cycles);
    CHECK(m2.checkpoints == m.checkpoints);
    CHECK(m2.artifacts == m.artifacts);
    CHECK(m2.timestamp == m.timestamp);

    CHECK_THROWS(load_manifest("/nonexistent/manifest.json"));
    fs::path bad = fs::temp_directory_path() / "manifest_bad.json";
    std::ofstream(bad) << "{\"command\": \"x\"}";
    CHECK_THROWS(load_manifest(bad.string()));
}

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "item/agents.hpp"

namespace item::report {

using Trace = std::vector<agents::EpisodeMetrics::TracePoint>;

struct AggregateConfig {
    double dt_s = 1.0;
    double warmup_s = 120.0;
    double comfort_band_c = 2.0;
    double target_c = 22.0;
};

struct Summary {
    double fuel_g = 0.0;
    double tm_energy_wh = 0.0;
    double mean_abs_e_cab = 0.0;
    double comfort_fraction = 0.0;
    double soc_initial = 0.0;
    double soc_final = 0.0;
    double soh_loss = 0.0;
};

// Integrates rates over a per-step trace; invariant to chunking.
Summary aggregate(const Trace& trace, const AggregateConfig& cfg);

struct VariantMetrics {
    std::string name;
    std::vector<agents::EpisodeMetrics> per_seed;
};

struct ComparisonReport {
    std::string cycle;
    std::vector<std::uint64_t> seeds;
    VariantMetrics aware, blind;
    std::optional<VariantMetrics> baseline;
    // 100*(blind-aware)/blind for cost metrics; positive means aware is better
    double fuel_delta_pct = 0.0;
    double tm_delta_pct = 0.0;
    double mean_abs_e_cab_aware = 0.0, mean_abs_e_cab_blind = 0.0;
    double soc_final_aware = 0.0, soc_final_blind = 0.0;
    double soh_loss_aware = 0.0, soh_loss_blind = 0.0;
};

ComparisonReport compare(const VariantMetrics& aware, const VariantMetrics& blind,
                         const std::optional<VariantMetrics>& baseline,
                         const std::string& cycle,
                         const std::vector<std::uint64_t>& seeds);

std::string comparison_to_json(const ComparisonReport& r);
void save_comparison(const ComparisonReport& r, const std::string& path);

// One CSV per panel (battery temp, engine temp, cabin temp, SOC, SOH,
// cumulative fuel) with columns time_s,aware,blind.
void emit_plots(const Trace& aware, const Trace& blind, const std::string& dir);

void save_trace_csv(const Trace& trace, const std::string& path);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> cycles;
    std::vector<std::string> checkpoints;
    std::vector<std::string> artifacts;
    std::string timestamp;
};

void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

}  // namespace item::report

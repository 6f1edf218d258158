#include "item/report.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace item::report {

using nlohmann::json;

Summary aggregate(const Trace& trace, const AggregateConfig& cfg) {
    if (trace.empty()) throw std::invalid_argument("aggregate: empty trace");
    Summary s;
    s.soc_initial = trace.front().soc;
    s.soc_final = trace.back().soc;
    s.soh_loss = trace.front().soh - trace.back().soh;

    double sum_abs = 0.0;
    std::size_t in_band = 0, n_comfort = 0;
    for (const auto& p : trace) {
        s.fuel_g += p.fuel_rate_gps * cfg.dt_s;
        s.tm_energy_wh += p.p_tm_w * cfg.dt_s / 3600.0;
        if (p.t_s >= cfg.warmup_s) {
            const double e = p.t_cab_c - cfg.target_c;
            sum_abs += std::abs(e);
            if (std::abs(e) <= cfg.comfort_band_c) ++in_band;
            ++n_comfort;
        }
    }
    if (n_comfort > 0) {
        s.mean_abs_e_cab = sum_abs / static_cast<double>(n_comfort);
        s.comfort_fraction = static_cast<double>(in_band) /
                             static_cast<double>(n_comfort);
    }
    return s;
}

namespace {

double mean_of(const std::vector<agents::EpisodeMetrics>& ms,
               double agents::EpisodeMetrics::*field) {
    double sum = 0.0;
    for (const auto& m : ms) sum += m.*field;
    return ms.empty() ? 0.0 : sum / static_cast<double>(ms.size());
}

double delta_pct(double blind, double aware) {
    if (blind == 0.0) return 0.0;
    return 100.0 * (blind - aware) / blind;
}

json variant_to_json(const VariantMetrics& v) {
    json rows = json::array();
    for (const auto& m : v.per_seed) {
        rows.push_back({{"fuel_g", m.fuel_g},
                        {"tm_energy_wh", m.tm_energy_wh},
                        {"soc_initial", m.soc_initial},
                        {"soc_final", m.soc_final},
                        {"soh_loss", m.soh_loss},
                        {"mean_abs_e_cab", m.mean_abs_e_cab},
                        {"comfort_fraction", m.comfort_fraction},
                        {"traction_violations", m.traction_violations},
                        {"terminated_early", m.terminated_early}});
    }
    return json{{"name", v.name}, {"per_seed", rows}};
}

}  // namespace

ComparisonReport compare(const VariantMetrics& aware, const VariantMetrics& blind,
                         const std::optional<VariantMetrics>& baseline,
                         const std::string& cycle,
                         const std::vector<std::uint64_t>& seeds) {
    if (aware.per_seed.size() != blind.per_seed.size() || aware.per_seed.empty())
        throw std::invalid_argument("compare: per-seed metric counts must match");
    if (seeds.size() != aware.per_seed.size())
        throw std::invalid_argument("compare: seeds/metrics length mismatch");

    ComparisonReport r;
    r.cycle = cycle;
    r.seeds = seeds;
    r.aware = aware;
    r.blind = blind;
    r.baseline = baseline;

    const double fuel_a = mean_of(aware.per_seed, &agents::EpisodeMetrics::fuel_g);
    const double fuel_b = mean_of(blind.per_seed, &agents::EpisodeMetrics::fuel_g);
    const double tm_a = mean_of(aware.per_seed, &agents::EpisodeMetrics::tm_energy_wh);
    const double tm_b = mean_of(blind.per_seed, &agents::EpisodeMetrics::tm_energy_wh);
    r.fuel_delta_pct = delta_pct(fuel_b, fuel_a);
    r.tm_delta_pct = delta_pct(tm_b, tm_a);
    r.mean_abs_e_cab_aware =
        mean_of(aware.per_seed, &agents::EpisodeMetrics::mean_abs_e_cab);
    r.mean_abs_e_cab_blind =
        mean_of(blind.per_seed, &agents::EpisodeMetrics::mean_abs_e_cab);
    r.soc_final_aware = mean_of(aware.per_seed, &agents::EpisodeMetrics::soc_final);
    r.soc_final_blind = mean_of(blind.per_seed, &agents::EpisodeMetrics::soc_final);
    r.soh_loss_aware = mean_of(aware.per_seed, &agents::EpisodeMetrics::soh_loss);
    r.soh_loss_blind = mean_of(blind.per_seed, &agents::EpisodeMetrics::soh_loss);
    return r;
}

std::string comparison_to_json(const ComparisonReport& r) {
    json j{{"cycle", r.cycle},
           {"seeds", r.seeds},
           {"aware", variant_to_json(r.aware)},
           {"blind", variant_to_json(r.blind)},
           {"deltas",
            {{"fuel_reduction_pct", r.fuel_delta_pct},
             {"tm_energy_reduction_pct", r.tm_delta_pct},
             {"mean_abs_e_cab_aware", r.mean_abs_e_cab_aware},
             {"mean_abs_e_cab_blind", r.mean_abs_e_cab_blind},
             {"soc_final_aware", r.soc_final_aware},
             {"soc_final_blind", r.soc_final_blind},
             {"soh_loss_aware", r.soh_loss_aware},
             {"soh_loss_blind", r.soh_loss_blind}}},
           {"reference_reported",
            {{"fuel_reduction_pct", 16.14}, {"tm_energy_reduction_pct", 8.22}}}};
    if (r.baseline) j["baseline"] = variant_to_json(*r.baseline);
    return j.dump(2);
}

void save_comparison(const ComparisonReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << comparison_to_json(r) << "\n";
}

namespace {

void emit_panel(const Trace& aware, const Trace& blind, const std::string& path,
                double agents::EpisodeMetrics::TracePoint::*field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plot file: " + path);
    out.precision(12);
    out << "time_s,aware,blind\n";
    const std::size_t n = std::min(aware.size(), blind.size());
    for (std::size_t i = 0; i < n; ++i)
        out << aware[i].t_s << "," << aware[i].*field << "," << blind[i].*field
            << "\n";
}

}  // namespace

void emit_plots(const Trace& aware, const Trace& blind, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    using TP = agents::EpisodeMetrics::TracePoint;
    emit_panel(aware, blind, dir + "/battery_temp.csv", &TP::t_bat_c);
    emit_panel(aware, blind, dir + "/engine_temp.csv", &TP::t_cl_c);
    emit_panel(aware, blind, dir + "/cabin_temp.csv", &TP::t_cab_c);
    emit_panel(aware, blind, dir + "/soc.csv", &TP::soc);
    emit_panel(aware, blind, dir + "/soh.csv", &TP::soh);
    emit_panel(aware, blind, dir + "/fuel.csv", &TP::fuel_g);
}

void save_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    out.precision(12);
    out << "t_s,v_mps,t_bat_c,t_cl_c,t_cab_c,soc,soh,fuel_g,p_ice_w,p_tm_w,"
           "fuel_rate_gps,dc_label,a_ems,a_cab\n";
    for (const auto& p : trace)
        out << p.t_s << "," << p.v_mps << "," << p.t_bat_c << "," << p.t_cl_c
            << "," << p.t_cab_c << "," << p.soc << "," << p.soh << "," << p.fuel_g
            << "," << p.p_ice_w << "," << p.p_tm_w << "," << p.fuel_rate_gps << ","
            << p.dc_label << "," << p.a_ems << "," << p.a_cab << "\n";
}

void save_manifest(const RunManifest& m, const std::string& path) {
    json j{{"version", 1},
           {"command", m.command},
           {"config_hash", m.config_hash},
           {"seeds", m.seeds},
           {"cycles", m.cycles},
           {"checkpoints", m.checkpoints},
           {"artifacts", m.artifacts},
           {"timestamp", m.timestamp}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    json j = json::parse(in);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.cycles = j.at("cycles").get<std::vector<std::string>>();
    m.checkpoints = j.at("checkpoints").get<std::vector<std::string>>();
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    m.timestamp = j.at("timestamp").get<std::string>();
    return m;
}

}  // namespace item::report

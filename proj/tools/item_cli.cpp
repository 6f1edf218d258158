// Command-line front end for the ITEM workbench: drive-cycle preparation,
// clustering, recognizer training, plant simulation, agent training, and the
// recognition-aware vs recognition-blind comparison.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "item/agents.hpp"
#include "item/clustering.hpp"
#include "item/config.hpp"
#include "item/control.hpp"
#include "item/cycles.hpp"
#include "item/nn.hpp"
#include "item/plant.hpp"
#include "item/recognizer.hpp"
#include "item/report.hpp"

namespace fs = std::filesystem;
using namespace item;

namespace {

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream os;
    os << std::put_time(std::gmtime(&t), "%FT%TZ");
    return os.str();
}

config::WorkbenchConfig load_config(const std::string& path) {
    if (path.empty()) return config::defaults();
    return config::load(path);
}

std::vector<cycles::DriveCycle> load_roster(const std::vector<std::string>& paths) {
    std::vector<cycles::DriveCycle> out;
    for (const auto& p : paths) out.push_back(cycles::load_cycle(p));
    return out;
}

struct FeatureSet {
    std::vector<cycles::TripFeatures> features;
    std::vector<std::string> parents;
};

FeatureSet features_of(const std::vector<cycles::DriveCycle>& roster, double window_s) {
    FeatureSet fs;
    for (const auto& c : roster) {
        for (const auto& trip : cycles::segment(c, window_s)) {
            fs.features.push_back(cycles::extract_features(trip, c.dt));
            fs.parents.push_back(trip.parent);
        }
    }
    return fs;
}

void write_manifest(const std::string& dir, const std::string& command,
                    const config::WorkbenchConfig& cfg,
                    std::vector<std::uint64_t> seeds,
                    std::vector<std::string> cycle_paths,
                    std::vector<std::string> checkpoints,
                    std::vector<std::string> artifacts) {
    report::RunManifest m;
    m.command = command;
    m.config_hash = config::hash(cfg);
    m.seeds = std::move(seeds);
    m.cycles = std::move(cycle_paths);
    m.checkpoints = std::move(checkpoints);
    m.artifacts = std::move(artifacts);
    m.timestamp = now_iso8601();
    report::save_manifest(m, dir + "/manifest.json");
}

recognizer::RecognizerBundle train_recognizer_pipeline(
    const config::WorkbenchConfig& cfg, recognizer::TrainReport* rep_out) {
    auto roster = load_roster(cfg.train_cycles);
    auto fs = features_of(roster, cfg.recognizer.window_s);
    auto model = clustering::fit_features(fs.features, cfg.recognizer.k,
                                          cfg.recognizer.kmeans_seed);
    auto labels = clustering::labels_for(model, fs.features);
    auto ds = recognizer::build_dataset(fs.features, labels, model,
                                        cfg.recognizer.val_fraction,
                                        cfg.recognizer.seed);
    recognizer::TrainConfig tc;
    tc.epochs = cfg.recognizer.epochs;
    tc.batch = cfg.recognizer.batch;
    tc.lr = cfg.recognizer.lr;
    tc.seed = cfg.recognizer.seed;
    nn::Mlp net;
    auto rep = recognizer::train_classifier(ds, tc, net);
    if (rep_out) *rep_out = rep;

    recognizer::RecognizerBundle bundle;
    bundle.cluster_model = model;
    bundle.net = std::move(net);
    bundle.window_s = cfg.recognizer.window_s;
    bundle.mode = cfg.recognizer.boundary_mode ? recognizer::UpdateMode::WindowBoundary
                                               : recognizer::UpdateMode::EveryStep;
    return bundle;
}

struct TrainedVariant {
    std::string dir;
};

void train_agents_run(const config::WorkbenchConfig& cfg_in, bool dc_enabled,
                      std::uint64_t seed, const std::string& out_dir,
                      bool quiet = false) {
    config::WorkbenchConfig cfg = cfg_in;
    cfg.training.agent.seed = seed;
    cfg.training.rollout.dc_enabled = dc_enabled;

    fs::create_directories(out_dir);
    auto bundle = train_recognizer_pipeline(cfg, nullptr);
    recognizer::save_bundle(bundle, out_dir + "/recognizer");

    auto train_cycles = load_roster(cfg.train_cycles);
    auto eval_cycle = cycles::load_cycle(cfg.eval_cycle);

    agents::DqnAgent ems(agents::kObsDim, control::kEmsActionCount, cfg.training.agent);
    agents::AgentConfig cab_cfg = cfg.training.agent;
    cab_cfg.seed = cfg.training.agent.seed ^ 0x51ed2701u;
    agents::DqnAgent cab(agents::kObsDim, cfg.training.rollout.cab_action_space,
                         cab_cfg);

    auto result = agents::train(cfg.training, cfg.plant, train_cycles, eval_cycle,
                                &bundle, ems, cab);

    nn::save(result.best_ems, out_dir + "/ems.ckpt");
    nn::save(result.best_cab, out_dir + "/cab.ckpt");
    config::save(cfg, out_dir + "/config.json");

    std::ofstream curve(out_dir + "/curves.csv");
    curve << "episode,return_ems,return_cab,fuel_g,tm_energy_wh,soc_final,is_eval\n";
    for (const auto& p : result.curve)
        curve << p.episode << "," << p.return_ems << "," << p.return_cab << ","
              << p.fuel_g << "," << p.tm_energy_wh << "," << p.soc_final << ","
              << (p.is_eval ? 1 : 0) << "\n";

    write_manifest(out_dir, "train-agents", cfg, {seed},
                   cfg.train_cycles,
                   {out_dir + "/ems.ckpt", out_dir + "/cab.ckpt"},
                   {out_dir + "/curves.csv", out_dir + "/config.json"});
    if (!quiet)
        std::cout << "trained " << (dc_enabled ? "aware" : "blind") << " seed "
                  << seed << ": best eval fuel " << result.best_eval.fuel_g
                  << " g, soc_final " << result.best_eval.soc_final << "\n";
}

agents::EpisodeMetrics evaluate_checkpoint(const std::string& ckpt_dir,
                                           const cycles::DriveCycle& cycle) {
    auto cfg = config::load(ckpt_dir + "/config.json");
    auto bundle = recognizer::load_bundle(ckpt_dir + "/recognizer");

    agents::DqnAgent ems(agents::kObsDim, control::kEmsActionCount, cfg.training.agent);
    agents::DqnAgent cab(agents::kObsDim, cfg.training.rollout.cab_action_space,
                         cfg.training.agent);
    ems.set_online(nn::load(ckpt_dir + "/ems.ckpt"));
    cab.set_online(nn::load(ckpt_dir + "/cab.ckpt"));

    plant::Plant plant(cfg.plant);
    recognizer::SlidingRecognizer recog(bundle.window_s,
                                        cfg.training.rollout.control_dt_s,
                                        bundle.cluster_model, bundle.net, bundle.mode);
    return agents::rollout_episode(cycle, plant, &recog, ems, cab,
                                   cfg.training.rollout, agents::RolloutMode::Eval);
}

int run_compare(const std::string& cycle_path, const std::string& aware_dir,
                const std::string& blind_dir, std::size_t n_seeds,
                const std::string& out_dir, const std::string& cfg_path) {
    auto cfg = load_config(cfg_path);
    auto cycle = cycles::load_cycle(cycle_path);
    fs::create_directories(out_dir);

    auto eval_variant = [&](const std::string& dir, const std::string& name) {
        report::VariantMetrics v;
        v.name = name;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            std::string seed_dir = dir + "/seed_" + std::to_string(s);
            if (!fs::exists(seed_dir)) seed_dir = dir;
            v.per_seed.push_back(evaluate_checkpoint(seed_dir, cycle));
        }
        return v;
    };

    auto aware = eval_variant(aware_dir, "aware");
    auto blind = eval_variant(blind_dir, "blind");
    std::vector<std::uint64_t> seeds(n_seeds);
    for (std::size_t s = 0; s < n_seeds; ++s) seeds[s] = s;

    auto rep = report::compare(aware, blind, std::nullopt, cycle.name, seeds);
    report::save_comparison(rep, out_dir + "/comparison.json");
    report::emit_plots(aware.per_seed.front().trace, blind.per_seed.front().trace,
                       out_dir + "/plots");
    report::save_trace_csv(aware.per_seed.front().trace, out_dir + "/trace_aware.csv");
    report::save_trace_csv(blind.per_seed.front().trace, out_dir + "/trace_blind.csv");

    write_manifest(out_dir, "compare", cfg, seeds, {cycle_path},
                   {aware_dir, blind_dir},
                   {out_dir + "/comparison.json", out_dir + "/trace_aware.csv",
                    out_dir + "/trace_blind.csv"});

    std::cout << "fuel reduction (aware vs blind): " << rep.fuel_delta_pct
              << " % (reported reference: 16.14 %)\n"
              << "TM energy reduction:             " << rep.tm_delta_pct
              << " % (reported reference: 8.22 %)\n"
              << "final SOC aware/blind: " << rep.soc_final_aware << " / "
              << rep.soc_final_blind << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driving-condition-aware integrated thermal and energy "
                 "management workbench"};
    app.require_subcommand(1);
    app.fallthrough();  // allow --config after the subcommand name

    std::string cfg_path;
    app.add_option("--config", cfg_path, "JSON configuration file");

    // segment
    auto* seg = app.add_subcommand("segment", "Segment cycles into micro-trips");
    double window_s = 20.0;
    std::vector<std::string> seg_cycles;
    std::string seg_out = "runs/segment";
    seg->add_option("--window", window_s, "Window length [s]");
    seg->add_option("--cycles", seg_cycles, "Cycle CSV paths")->required();
    seg->add_option("--out", seg_out, "Output directory");

    // cluster
    auto* clu = app.add_subcommand("cluster", "K-means over micro-trip features");
    std::vector<std::string> clu_cycles;
    std::string clu_out = "runs/cluster";
    std::uint64_t clu_seed = 7;
    std::size_t clu_k = 3;
    clu->add_option("--cycles", clu_cycles, "Cycle CSV paths")->required();
    clu->add_option("--out", clu_out, "Output directory");
    clu->add_option("--seed", clu_seed, "k-means seed");
    clu->add_option("--k", clu_k, "Cluster count");
    clu->add_option("--window", window_s, "Window length [s]");

    // train-recognizer
    auto* trr = app.add_subcommand("train-recognizer",
                                   "Cluster + train the condition classifier");
    std::string trr_out = "runs/recognizer";
    trr->add_option("--out", trr_out, "Output directory");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Rule-based plant simulation");
    std::string sim_cycle, sim_out = "runs/simulate", sim_policy = "baseline";
    sim->add_option("--cycle", sim_cycle, "Cycle CSV path")->required();
    sim->add_option("--policy", sim_policy, "baseline | engine-off | track-demand");
    sim->add_option("--out", sim_out, "Output directory");

    // train-agents
    auto* tra = app.add_subcommand("train-agents", "Train the two DRL agents");
    std::string tra_out = "runs/agents";
    std::uint64_t tra_seed = 1;
    bool tra_blind = false;
    tra->add_option("--out", tra_out, "Output directory");
    tra->add_option("--seed", tra_seed, "Training seed");
    tra->add_flag("--blind", tra_blind, "Disable the driving-condition input");

    // evaluate
    auto* evl = app.add_subcommand("evaluate", "Greedy rollout of a checkpoint");
    std::string evl_ckpt, evl_cycle, evl_out = "runs/evaluate";
    evl->add_option("--ckpt", evl_ckpt, "Checkpoint directory")->required();
    evl->add_option("--cycle", evl_cycle, "Cycle CSV path")->required();
    evl->add_option("--out", evl_out, "Output directory");

    // compare
    auto* cmp = app.add_subcommand("compare", "Aware vs blind comparison");
    std::string cmp_cycle, cmp_aware, cmp_blind, cmp_out = "runs/compare";
    std::size_t cmp_seeds = 1;
    cmp->add_option("--cycle", cmp_cycle, "Cycle CSV path")->required();
    cmp->add_option("--aware", cmp_aware, "Aware checkpoint dir")->required();
    cmp->add_option("--blind", cmp_blind, "Blind checkpoint dir")->required();
    cmp->add_option("--seeds", cmp_seeds, "Number of per-seed checkpoints");
    cmp->add_option("--out", cmp_out, "Output directory");

    // report
    auto* rpt = app.add_subcommand("report", "Re-run a compare from its manifest");
    std::string rpt_manifest, rpt_out = "runs/report";
    rpt->add_option("--manifest", rpt_manifest, "compare manifest.json")->required();
    rpt->add_option("--out", rpt_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors -> exit 2
    }

    try {
        if (*seg) {
            auto cfg = load_config(cfg_path);
            fs::create_directories(seg_out);
            auto roster = load_roster(seg_cycles);
            std::ofstream out(seg_out + "/microtrips.csv");
            out << "parent,start_index,avg_speed_mps,max_accel_mps2\n";
            std::size_t count = 0;
            for (const auto& c : roster) {
                for (const auto& t : cycles::segment(c, window_s)) {
                    auto f = cycles::extract_features(t, c.dt);
                    out << t.parent << "," << t.start_index << "," << f.avg_speed
                        << "," << f.max_accel << "\n";
                    ++count;
                }
            }
            write_manifest(seg_out, "segment", cfg, {}, seg_cycles, {},
                           {seg_out + "/microtrips.csv"});
            std::cout << count << " micro-trips\n";
        } else if (*clu) {
            auto cfg = load_config(cfg_path);
            fs::create_directories(clu_out);
            auto roster = load_roster(clu_cycles);
            auto fset = features_of(roster, window_s);
            auto model = clustering::fit_features(fset.features, clu_k, clu_seed);
            clustering::save_model(model, clu_out + "/clusters.txt");
            auto labels = clustering::labels_for(model, fset.features);
            std::ofstream out(clu_out + "/labels.csv");
            out << "parent,avg_speed_mps,max_accel_mps2,label\n";
            for (std::size_t i = 0; i < labels.size(); ++i)
                out << fset.parents[i] << "," << fset.features[i].avg_speed << ","
                    << fset.features[i].max_accel << "," << labels[i] << "\n";
            write_manifest(clu_out, "cluster", cfg, {clu_seed}, clu_cycles, {},
                           {clu_out + "/clusters.txt", clu_out + "/labels.csv"});
            std::cout << fset.features.size() << " micro-trips, inertia "
                      << model.inertia << "\n";
        } else if (*trr) {
            auto cfg = load_config(cfg_path);
            if (cfg.train_cycles.empty())
                throw std::runtime_error("train-recognizer: config lists no train_cycles");
            recognizer::TrainReport rep;
            auto bundle = train_recognizer_pipeline(cfg, &rep);
            recognizer::save_bundle(bundle, trr_out);
            write_manifest(trr_out, "train-recognizer", cfg,
                           {cfg.recognizer.kmeans_seed, cfg.recognizer.seed},
                           cfg.train_cycles, {trr_out + "/recognizer.ckpt"},
                           {trr_out + "/clusters.txt"});
            std::cout << "train accuracy " << rep.train_accuracy
                      << ", validation accuracy " << rep.val_accuracy << "\n";
        } else if (*sim) {
            auto cfg = load_config(cfg_path);
            fs::create_directories(sim_out);
            auto cycle = cycles::load_cycle(sim_cycle);
            plant::Plant plant(cfg.plant);
            control::BaselineEmsConfig base;
            auto policy = [&](const plant::PlantState& st, double v, double a) {
                plant::PlantActions act;
                if (sim_policy == "engine-off") {
                    act.p_ice_w = 0.0;
                } else if (sim_policy == "track-demand") {
                    auto d = plant::demand(v, a, 0.0, cfg.plant.vehicle);
                    act.p_ice_w = std::max(d.power_ps_w, 0.0) + cfg.plant.maps.p_bat_aux_w;
                } else {
                    act.p_ice_w = control::apply_ems_action(
                        st.p_ice_w, control::baseline_ems(st.soc, st.p_ice_w, base),
                        cfg.plant.maps.p_engine_idle_w, cfg.plant.maps.p_engine_max_w);
                }
                act.ac_on = st.t_cab_c > cfg.plant.thermal.hvac.target_c ? 1 : 0;
                act.heater_on = st.t_cab_c < cfg.plant.thermal.hvac.target_c - 1.0 ? 1 : 0;
                return act;
            };
            auto m = agents::rollout_policy(cycle, plant, cfg.training.rollout, policy);
            report::save_trace_csv(m.trace, sim_out + "/trace.csv");
            write_manifest(sim_out, "simulate", cfg, {}, {sim_cycle}, {},
                           {sim_out + "/trace.csv"});
            std::cout << "fuel " << m.fuel_g << " g, TM " << m.tm_energy_wh
                      << " Wh, final SOC " << m.soc_final << "\n";
        } else if (*tra) {
            auto cfg = load_config(cfg_path);
            if (cfg.train_cycles.empty() || cfg.eval_cycle.empty())
                throw std::runtime_error("train-agents: config must list train_cycles and eval_cycle");
            train_agents_run(cfg, !tra_blind, tra_seed, tra_out);
        } else if (*evl) {
            fs::create_directories(evl_out);
            auto cycle = cycles::load_cycle(evl_cycle);
            auto m = evaluate_checkpoint(evl_ckpt, cycle);
            report::save_trace_csv(m.trace, evl_out + "/trace.csv");
            nlohmann::json j{{"fuel_g", m.fuel_g},
                             {"tm_energy_wh", m.tm_energy_wh},
                             {"soc_initial", m.soc_initial},
                             {"soc_final", m.soc_final},
                             {"soh_loss", m.soh_loss},
                             {"mean_abs_e_cab", m.mean_abs_e_cab},
                             {"comfort_fraction", m.comfort_fraction}};
            std::ofstream out(evl_out + "/metrics.json");
            out << j.dump(2) << "\n";
            std::cout << j.dump(2) << "\n";
        } else if (*cmp) {
            return run_compare(cmp_cycle, cmp_aware, cmp_blind, cmp_seeds, cmp_out,
                               cfg_path);
        } else if (*rpt) {
            auto m = report::load_manifest(rpt_manifest);
            if (m.command != "compare")
                throw std::runtime_error("report: manifest is not from a compare run");
            if (m.cycles.size() != 1 || m.checkpoints.size() != 2)
                throw std::runtime_error("report: malformed compare manifest");
            return run_compare(m.cycles[0], m.checkpoints[0], m.checkpoints[1],
                               m.seeds.size(), rpt_out, cfg_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

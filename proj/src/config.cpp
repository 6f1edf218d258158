#include "item/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace item::config {

using nlohmann::json;

WorkbenchConfig defaults() {
    WorkbenchConfig cfg;
    cfg.plant = plant::default_params();
    return cfg;
}

namespace {

json table_to_json(const Table1D& t) {
    return json{{"x", t.breakpoints()}, {"y", t.values()}};
}

Table1D table_from_json(const json& j) {
    return Table1D(j.at("x").get<std::vector<double>>(),
                   j.at("y").get<std::vector<double>>());
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void get_table(const json& j, const char* key, Table1D& out) {
    if (j.contains(key)) out = table_from_json(j.at(key));
}

void apply_plant(const json& j, plant::PlantParams& p) {
    if (j.contains("vehicle")) {
        const auto& v = j.at("vehicle");
        get_if(v, "mass_kg", p.vehicle.mass_kg);
        get_if(v, "air_density", p.vehicle.air_density);
        get_if(v, "drag_coeff", p.vehicle.drag_coeff);
        get_if(v, "frontal_area_m2", p.vehicle.frontal_area_m2);
        get_if(v, "rolling_coeff", p.vehicle.rolling_coeff);
        get_if(v, "gravity", p.vehicle.gravity);
        get_if(v, "wheel_radius_m", p.vehicle.wheel_radius_m);
        get_if(v, "final_drive_ratio", p.vehicle.final_drive_ratio);
        get_if(v, "wheel_eff", p.vehicle.wheel_eff);
        get_if(v, "driveline_eff", p.vehicle.driveline_eff);
        get_if(v, "planetary_ratio", p.vehicle.planetary_ratio);
        get_if(v, "coupler_ratio", p.vehicle.coupler_ratio);
    }
    if (j.contains("maps")) {
        const auto& m = j.at("maps");
        get_table(m, "ool_speed_radps", p.maps.ool_speed_radps);
        get_table(m, "ool_torque_nm", p.maps.ool_torque_nm);
        get_table(m, "ool_fuel_gps", p.maps.ool_fuel_gps);
        get_if(m, "p_engine_max_w", p.maps.p_engine_max_w);
        get_if(m, "p_engine_idle_w", p.maps.p_engine_idle_w);
        get_table(m, "motor1_eff", p.maps.motor1_eff);
        get_table(m, "motor2_eff", p.maps.motor2_eff);
        get_if(m, "motor1_torque_max_nm", p.maps.motor1_torque_max_nm);
        get_if(m, "motor2_torque_max_nm", p.maps.motor2_torque_max_nm);
        get_if(m, "p_bat_aux_w", p.maps.p_bat_aux_w);
        get_table(m, "cold_fuel_mult", p.maps.cold_fuel_mult);
    }
    if (j.contains("battery")) {
        const auto& b = j.at("battery");
        get_if(b, "n_cells", p.battery.n_cells);
        get_if(b, "capacity_ah", p.battery.capacity_ah);
        get_table(b, "ocv_v", p.battery.ocv_v);
        get_table(b, "r0_ohm", p.battery.r0_ohm);
        get_table(b, "r1_ohm", p.battery.r1_ohm);
        get_table(b, "c1_f", p.battery.c1_f);
        get_if(b, "cp_j_per_kgc", p.battery.cp_j_per_kgc);
        get_if(b, "hc_w_per_m2c", p.battery.hc_w_per_m2c);
        get_if(b, "area_m2", p.battery.area_m2);
        get_if(b, "cell_mass_kg", p.battery.cell_mass_kg);
        get_if(b, "lumped_capacity_j_per_c", p.battery.lumped_capacity_j_per_c);
        get_table(b, "aging_m", p.battery.aging_m);
        get_if(b, "activation_energy_j_per_mol", p.battery.activation_energy_j_per_mol);
        get_if(b, "gas_constant", p.battery.gas_constant);
        get_if(b, "aging_z", p.battery.aging_z);
        get_if(b, "fan_heat_w_per_cell", p.battery.fan_heat_w_per_cell);
        get_if(b, "coolant_heat_w_per_cell", p.battery.coolant_heat_w_per_cell);
        get_if(b, "fan_power_w", p.battery.fan_power_w);
        get_if(b, "coolant_power_w", p.battery.coolant_power_w);
    }
    if (j.contains("thermal")) {
        const auto& t = j.at("thermal");
        if (t.contains("engine")) {
            const auto& e = t.at("engine");
            get_if(e, "cs_j_per_kgc", p.thermal.engine.cs_j_per_kgc);
            get_if(e, "engine_mass_kg", p.thermal.engine.engine_mass_kg);
            get_if(e, "lhv_j_per_g", p.thermal.engine.lhv_j_per_g);
            get_if(e, "exhaust_fraction", p.thermal.engine.exhaust_fraction);
            get_if(e, "ua_convection_w_per_c", p.thermal.engine.ua_convection_w_per_c);
            get_if(e, "radiator_max_w", p.thermal.engine.radiator_max_w);
            get_if(e, "thermostat_c", p.thermal.engine.thermostat_c);
            get_if(e, "heat_storage_w", p.thermal.engine.heat_storage_w);
        }
        if (t.contains("cabin")) {
            const auto& c = t.at("cabin");
            get_if(c, "air_mass_kg", p.thermal.cabin.air_mass_kg);
            get_if(c, "heat_capacity_j_per_kgc", p.thermal.cabin.heat_capacity_j_per_kgc);
            get_if(c, "sun_load_w", p.thermal.cabin.sun_load_w);
            get_if(c, "ua_roof_w_per_c", p.thermal.cabin.ua_roof_w_per_c);
            get_if(c, "ua_window_w_per_c", p.thermal.cabin.ua_window_w_per_c);
            get_if(c, "ua_transmission_w_per_c", p.thermal.cabin.ua_transmission_w_per_c);
        }
        if (t.contains("hvac")) {
            const auto& h = t.at("hvac");
            get_if(h, "target_c", p.thermal.hvac.target_c);
            get_if(h, "ac_capacity_w", p.thermal.hvac.ac_capacity_w);
            get_if(h, "ac_cop", p.thermal.hvac.ac_cop);
            get_if(h, "heater_core_max_w", p.thermal.hvac.heater_core_max_w);
            get_if(h, "heater_electric_max_w", p.thermal.hvac.heater_electric_max_w);
            get_if(h, "heater_min_supply_c", p.thermal.hvac.heater_min_supply_c);
            get_if(h, "blower_w", p.thermal.hvac.blower_w);
        }
        if (t.contains("battery_tm")) {
            const auto& h = t.at("battery_tm");
            get_if(h, "fan_on_c", p.thermal.battery_tm.fan_on_c);
            get_if(h, "fan_off_c", p.thermal.battery_tm.fan_off_c);
            get_if(h, "coolant_on_c", p.thermal.battery_tm.coolant_on_c);
            get_if(h, "coolant_off_c", p.thermal.battery_tm.coolant_off_c);
        }
    }
    get_if(j, "ambient_c", p.ambient_c);
    get_if(j, "substep_dt_s", p.substep_dt_s);
}

void apply_training(const json& j, agents::TrainConfig& t) {
    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        get_if(a, "gamma", t.agent.gamma);
        get_if(a, "eps_start", t.agent.eps_start);
        get_if(a, "eps_end", t.agent.eps_end);
        get_if(a, "eps_decay_steps", t.agent.eps_decay_steps);
        get_if(a, "batch", t.agent.batch);
        get_if(a, "buffer_capacity", t.agent.buffer_capacity);
        get_if(a, "target_sync_interval", t.agent.target_sync_interval);
        get_if(a, "warmup_transitions", t.agent.warmup_transitions);
        get_if(a, "lr", t.agent.lr);
        get_if(a, "seed", t.agent.seed);
        get_if(a, "hidden", t.agent.hidden);
    }
    if (j.contains("rollout")) {
        const auto& r = j.at("rollout");
        get_if(r, "control_dt_s", t.rollout.control_dt_s);
        get_if(r, "warmup_s", t.rollout.warmup_s);
        get_if(r, "comfort_band_c", t.rollout.comfort_band_c);
        get_if(r, "dc_enabled", t.rollout.dc_enabled);
        get_if(r, "cab_action_space", t.rollout.cab_action_space);
        if (r.contains("ranges")) {
            const auto& g = r.at("ranges");
            get_if(g, "v_max", t.rollout.ranges.v_max);
            get_if(g, "a_max", t.rollout.ranges.a_max);
            get_if(g, "t_cab_lo", t.rollout.ranges.t_cab_lo);
            get_if(g, "t_cab_hi", t.rollout.ranges.t_cab_hi);
            get_if(g, "e_cab_max", t.rollout.ranges.e_cab_max);
            get_if(g, "dsoc_max", t.rollout.ranges.dsoc_max);
        }
        if (r.contains("rewards")) {
            const auto& w = r.at("rewards");
            get_if(w, "alpha1", t.rollout.rewards.alpha1);
            get_if(w, "alpha2", t.rollout.rewards.alpha2);
            get_if(w, "beta1", t.rollout.rewards.beta1);
            get_if(w, "beta2", t.rollout.rewards.beta2);
            get_if(w, "soc_ref", t.rollout.rewards.soc_ref);
            get_if(w, "violation_penalty", t.rollout.rewards.violation_penalty);
        }
        if (r.contains("initial_state")) {
            const auto& s = r.at("initial_state");
            get_if(s, "soc", t.rollout.initial_state.soc);
            get_if(s, "t_bat_c", t.rollout.initial_state.t_bat_c);
            get_if(s, "t_cl_c", t.rollout.initial_state.t_cl_c);
            get_if(s, "t_cab_c", t.rollout.initial_state.t_cab_c);
            get_if(s, "soh", t.rollout.initial_state.soh);
        }
    }
    get_if(j, "episodes", t.episodes);
    get_if(j, "eval_interval", t.eval_interval);
    get_if(j, "divergence_loss", t.divergence_loss);
    get_if(j, "divergence_patience", t.divergence_patience);
}

void apply_recognizer(const json& j, RecognizerConfig& r) {
    get_if(j, "window_s", r.window_s);
    get_if(j, "k", r.k);
    get_if(j, "kmeans_seed", r.kmeans_seed);
    get_if(j, "val_fraction", r.val_fraction);
    get_if(j, "epochs", r.epochs);
    get_if(j, "batch", r.batch);
    get_if(j, "lr", r.lr);
    get_if(j, "seed", r.seed);
    get_if(j, "boundary_mode", r.boundary_mode);
}

}  // namespace

WorkbenchConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in);

    WorkbenchConfig cfg = defaults();
    for (const auto& [key, _] : j.items()) {
        if (key != "version" && key != "plant" && key != "training" &&
            key != "recognizer" && key != "train_cycles" && key != "eval_cycle")
            throw std::runtime_error(path + ": unknown config key: " + key);
    }
    get_if(j, "version", cfg.version);
    if (cfg.version != 1)
        throw std::runtime_error(path + ": unsupported config version");
    if (j.contains("plant")) apply_plant(j.at("plant"), cfg.plant);
    if (j.contains("training")) apply_training(j.at("training"), cfg.training);
    if (j.contains("recognizer")) apply_recognizer(j.at("recognizer"), cfg.recognizer);
    get_if(j, "train_cycles", cfg.train_cycles);
    get_if(j, "eval_cycle", cfg.eval_cycle);
    return cfg;
}

std::string to_json(const WorkbenchConfig& cfg) {
    const auto& p = cfg.plant;
    const auto& t = cfg.training;
    const auto& r = cfg.recognizer;
    json j{
        {"version", cfg.version},
        {"plant",
         {{"vehicle",
           {{"mass_kg", p.vehicle.mass_kg},
            {"air_density", p.vehicle.air_density},
            {"drag_coeff", p.vehicle.drag_coeff},
            {"frontal_area_m2", p.vehicle.frontal_area_m2},
            {"rolling_coeff", p.vehicle.rolling_coeff},
            {"gravity", p.vehicle.gravity},
            {"wheel_radius_m", p.vehicle.wheel_radius_m},
            {"final_drive_ratio", p.vehicle.final_drive_ratio},
            {"wheel_eff", p.vehicle.wheel_eff},
            {"driveline_eff", p.vehicle.driveline_eff},
            {"planetary_ratio", p.vehicle.planetary_ratio},
            {"coupler_ratio", p.vehicle.coupler_ratio}}},
          {"maps",
           {{"ool_speed_radps", table_to_json(p.maps.ool_speed_radps)},
            {"ool_torque_nm", table_to_json(p.maps.ool_torque_nm)},
            {"ool_fuel_gps", table_to_json(p.maps.ool_fuel_gps)},
            {"p_engine_max_w", p.maps.p_engine_max_w},
            {"p_engine_idle_w", p.maps.p_engine_idle_w},
            {"motor1_eff", table_to_json(p.maps.motor1_eff)},
            {"motor2_eff", table_to_json(p.maps.motor2_eff)},
            {"motor1_torque_max_nm", p.maps.motor1_torque_max_nm},
            {"motor2_torque_max_nm", p.maps.motor2_torque_max_nm},
            {"p_bat_aux_w", p.maps.p_bat_aux_w},
            {"cold_fuel_mult", table_to_json(p.maps.cold_fuel_mult)}}},
          {"battery",
           {{"n_cells", p.battery.n_cells},
            {"capacity_ah", p.battery.capacity_ah},
            {"ocv_v", table_to_json(p.battery.ocv_v)},
            {"r0_ohm", table_to_json(p.battery.r0_ohm)},
            {"r1_ohm", table_to_json(p.battery.r1_ohm)},
            {"c1_f", table_to_json(p.battery.c1_f)},
            {"cp_j_per_kgc", p.battery.cp_j_per_kgc},
            {"hc_w_per_m2c", p.battery.hc_w_per_m2c},
            {"area_m2", p.battery.area_m2},
            {"cell_mass_kg", p.battery.cell_mass_kg},
            {"lumped_capacity_j_per_c", p.battery.lumped_capacity_j_per_c},
            {"aging_m", table_to_json(p.battery.aging_m)},
            {"activation_energy_j_per_mol", p.battery.activation_energy_j_per_mol},
            {"gas_constant", p.battery.gas_constant},
            {"aging_z", p.battery.aging_z},
            {"fan_heat_w_per_cell", p.battery.fan_heat_w_per_cell},
            {"coolant_heat_w_per_cell", p.battery.coolant_heat_w_per_cell},
            {"fan_power_w", p.battery.fan_power_w},
            {"coolant_power_w", p.battery.coolant_power_w}}},
          {"thermal",
           {{"engine",
             {{"cs_j_per_kgc", p.thermal.engine.cs_j_per_kgc},
              {"engine_mass_kg", p.thermal.engine.engine_mass_kg},
              {"lhv_j_per_g", p.thermal.engine.lhv_j_per_g},
              {"exhaust_fraction", p.thermal.engine.exhaust_fraction},
              {"ua_convection_w_per_c", p.thermal.engine.ua_convection_w_per_c},
              {"radiator_max_w", p.thermal.engine.radiator_max_w},
              {"thermostat_c", p.thermal.engine.thermostat_c},
              {"heat_storage_w", p.thermal.engine.heat_storage_w}}},
            {"cabin",
             {{"air_mass_kg", p.thermal.cabin.air_mass_kg},
              {"heat_capacity_j_per_kgc", p.thermal.cabin.heat_capacity_j_per_kgc},
              {"sun_load_w", p.thermal.cabin.sun_load_w},
              {"ua_roof_w_per_c", p.thermal.cabin.ua_roof_w_per_c},
              {"ua_window_w_per_c", p.thermal.cabin.ua_window_w_per_c},
              {"ua_transmission_w_per_c", p.thermal.cabin.ua_transmission_w_per_c}}},
            {"hvac",
             {{"target_c", p.thermal.hvac.target_c},
              {"ac_capacity_w", p.thermal.hvac.ac_capacity_w},
              {"ac_cop", p.thermal.hvac.ac_cop},
              {"heater_core_max_w", p.thermal.hvac.heater_core_max_w},
              {"heater_electric_max_w", p.thermal.hvac.heater_electric_max_w},
              {"heater_min_supply_c", p.thermal.hvac.heater_min_supply_c},
              {"blower_w", p.thermal.hvac.blower_w}}},
            {"battery_tm",
             {{"fan_on_c", p.thermal.battery_tm.fan_on_c},
              {"fan_off_c", p.thermal.battery_tm.fan_off_c},
              {"coolant_on_c", p.thermal.battery_tm.coolant_on_c},
              {"coolant_off_c", p.thermal.battery_tm.coolant_off_c}}}}},
          {"ambient_c", p.ambient_c},
          {"substep_dt_s", p.substep_dt_s}}},
        {"training",
         {{"agent",
           {{"gamma", t.agent.gamma},
            {"eps_start", t.agent.eps_start},
            {"eps_end", t.agent.eps_end},
            {"eps_decay_steps", t.agent.eps_decay_steps},
            {"batch", t.agent.batch},
            {"buffer_capacity", t.agent.buffer_capacity},
            {"target_sync_interval", t.agent.target_sync_interval},
            {"warmup_transitions", t.agent.warmup_transitions},
            {"lr", t.agent.lr},
            {"seed", t.agent.seed},
            {"hidden", t.agent.hidden}}},
          {"rollout",
           {{"control_dt_s", t.rollout.control_dt_s},
            {"warmup_s", t.rollout.warmup_s},
            {"comfort_band_c", t.rollout.comfort_band_c},
            {"dc_enabled", t.rollout.dc_enabled},
            {"cab_action_space", t.rollout.cab_action_space},
            {"ranges",
             {{"v_max", t.rollout.ranges.v_max},
              {"a_max", t.rollout.ranges.a_max},
              {"t_cab_lo", t.rollout.ranges.t_cab_lo},
              {"t_cab_hi", t.rollout.ranges.t_cab_hi},
              {"e_cab_max", t.rollout.ranges.e_cab_max},
              {"dsoc_max", t.rollout.ranges.dsoc_max}}},
            {"rewards",
             {{"alpha1", t.rollout.rewards.alpha1},
              {"alpha2", t.rollout.rewards.alpha2},
              {"beta1", t.rollout.rewards.beta1},
              {"beta2", t.rollout.rewards.beta2},
              {"soc_ref", t.rollout.rewards.soc_ref},
              {"violation_penalty", t.rollout.rewards.violation_penalty}}},
            {"initial_state",
             {{"soc", t.rollout.initial_state.soc},
              {"t_bat_c", t.rollout.initial_state.t_bat_c},
              {"t_cl_c", t.rollout.initial_state.t_cl_c},
              {"t_cab_c", t.rollout.initial_state.t_cab_c},
              {"soh", t.rollout.initial_state.soh}}}}},
          {"episodes", t.episodes},
          {"eval_interval", t.eval_interval},
          {"divergence_loss", t.divergence_loss},
          {"divergence_patience", t.divergence_patience}}},
        {"recognizer",
         {{"window_s", r.window_s},
          {"k", r.k},
          {"kmeans_seed", r.kmeans_seed},
          {"val_fraction", r.val_fraction},
          {"epochs", r.epochs},
          {"batch", r.batch},
          {"lr", r.lr},
          {"seed", r.seed},
          {"boundary_mode", r.boundary_mode}}},
        {"train_cycles", cfg.train_cycles},
        {"eval_cycle", cfg.eval_cycle}};
    return j.dump(2);
}

void save(const WorkbenchConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << to_json(cfg) << "\n";
}

std::string hash(const WorkbenchConfig& cfg) {
    // FNV-1a over the canonical JSON dump
    const std::string s = to_json(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace item::config

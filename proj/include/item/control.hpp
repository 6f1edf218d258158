#pragma once

#include <cstddef>

namespace item::control {

struct PidController {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double out_lo = 0.0;
    double out_hi = 0.0;
    double integral_limit = 0.0;  // anti-windup clamp on ki*integral

    double integral = 0.0;
    double prev_error = 0.0;
    bool has_prev = false;

    void reset() {
        integral = 0.0;
        prev_error = 0.0;
        has_prev = false;
    }
};

double pid_step(PidController& c, double error, double dt);

// Capacities and electrical characteristics of the cabin HVAC hardware.
struct HvacParams {
    double target_c = 22.0;
    double ac_capacity_w = 3000.0;      // max cooling heat flow
    double ac_cop = 2.5;
    double heater_core_max_w = 5000.0;  // heat extractable from engine coolant
    double heater_electric_max_w = 2000.0;
    double heater_min_supply_c = 40.0;  // coolant must be warmer to supply heat
    double blower_w = 100.0;
};

struct HvacCommand {
    double q_hvac_w = 0.0;          // signed: + heat into cabin, - cooling
    double q_from_coolant_w = 0.0;  // portion of heating drawn from the coolant loop
    double p_electric_w = 0.0;      // AC + electric heater + blower
    bool conflict_ignored = false;  // both modes requested; heater took precedence
};

// Binary heater/AC modes supervise two PIDs tracking the cabin target.
HvacCommand hvac_actuate(double t_cab_c, double t_cl_c, int a_h, int a_ac,
                         PidController& heater_pid, PidController& ac_pid,
                         const HvacParams& p, double dt);

// Discrete engine-power action set: {+10kW,+5kW,+1kW,+500W,0,-1kW,-5kW,off}.
inline constexpr std::size_t kEmsActionCount = 8;
inline constexpr std::size_t kEmsHoldAction = 4;
inline constexpr std::size_t kEmsOffAction = 7;

double apply_ems_action(double p_ice_prev_w, std::size_t action_index,
                        double idle_min_w, double p_max_w);

struct TmThresholds {
    double fan_on_c = 33.0;
    double fan_off_c = 31.0;
    double coolant_on_c = 38.0;
    double coolant_off_c = 36.0;
};

struct TmCommand {
    bool fan_on = false;
    bool coolant_on = false;
};

// Hysteresis rule on battery temperature; `prev` carries the retained state.
TmCommand battery_tm_rule(double t_bat_c, const TmThresholds& th, TmCommand prev);

struct BaselineEmsConfig {
    double soc_low = 0.60;
    double soc_high = 0.70;
    double target_power_w = 15000.0;
};

// Thermostatic charge-sustaining rule expressed through the discrete action set.
std::size_t baseline_ems(double soc, double p_ice_prev_w,
                         const BaselineEmsConfig& cfg);

}  // namespace item::control

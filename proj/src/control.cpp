#include "item/control.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace item::control {

double pid_step(PidController& c, double error, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("pid_step: dt must be > 0");
    c.integral += error * dt;
    if (c.ki > 0.0 && c.integral_limit > 0.0) {
        const double bound = c.integral_limit / c.ki;
        c.integral = std::clamp(c.integral, -bound, bound);
    }
    double deriv = 0.0;
    if (c.has_prev) deriv = (error - c.prev_error) / dt;
    c.prev_error = error;
    c.has_prev = true;
    const double raw = c.kp * error + c.ki * c.integral + c.kd * deriv;
    return std::clamp(raw, c.out_lo, c.out_hi);
}

HvacCommand hvac_actuate(double t_cab_c, double t_cl_c, int a_h, int a_ac,
                         PidController& heater_pid, PidController& ac_pid,
                         const HvacParams& p, double dt) {
    HvacCommand cmd;
    if (a_h != 0 && a_ac != 0) {
        cmd.conflict_ignored = true;
        a_ac = 0;  // heater precedence
    }
    if (a_h != 0) {
        // heating: positive error when the cabin is below target
        const double request = pid_step(heater_pid, p.target_c - t_cab_c, dt);
        double heat = std::max(0.0, request);
        double from_coolant = 0.0;
        if (t_cl_c >= p.heater_min_supply_c)
            from_coolant = std::min(heat, p.heater_core_max_w);
        const double electric = std::min(heat - from_coolant, p.heater_electric_max_w);
        heat = from_coolant + electric;
        cmd.q_hvac_w = heat;
        cmd.q_from_coolant_w = from_coolant;
        cmd.p_electric_w = electric + p.blower_w;
    } else if (a_ac != 0) {
        const double request = pid_step(ac_pid, t_cab_c - p.target_c, dt);
        const double cooling = std::clamp(request, 0.0, p.ac_capacity_w);
        cmd.q_hvac_w = -cooling;
        cmd.p_electric_w = cooling / p.ac_cop + p.blower_w;
    }
    return cmd;
}

double apply_ems_action(double p_ice_prev_w, std::size_t action_index,
                        double idle_min_w, double p_max_w) {
    static constexpr std::array<double, kEmsActionCount> deltas{
        10000.0, 5000.0, 1000.0, 500.0, 0.0, -1000.0, -5000.0, 0.0};
    if (action_index >= kEmsActionCount)
        throw std::invalid_argument("apply_ems_action: invalid action index");
    if (action_index == kEmsOffAction) return 0.0;

    const double delta = deltas[action_index];
    double p = p_ice_prev_w;
    if (p <= 0.0) {
        if (delta <= 0.0) return 0.0;  // engine stays off
        p = idle_min_w;                // start at idle, then add the increment
    }
    p += delta;
    // only the explicit off action shuts the engine down
    return std::clamp(p, idle_min_w, p_max_w);
}

TmCommand battery_tm_rule(double t_bat_c, const TmThresholds& th, TmCommand prev) {
    TmCommand cmd = prev;
    if (t_bat_c >= th.fan_on_c)
        cmd.fan_on = true;
    else if (t_bat_c <= th.fan_off_c)
        cmd.fan_on = false;
    if (t_bat_c >= th.coolant_on_c)
        cmd.coolant_on = true;
    else if (t_bat_c <= th.coolant_off_c)
        cmd.coolant_on = false;
    return cmd;
}

std::size_t baseline_ems(double soc, double p_ice_prev_w,
                         const BaselineEmsConfig& cfg) {
    if (soc > cfg.soc_high) return kEmsOffAction;
    if (soc < cfg.soc_low) {
        const double gap = cfg.target_power_w - p_ice_prev_w;
        if (gap > 5000.0) return 0;   // +10 kW
        if (gap > 1000.0) return 1;   // +5 kW
        if (gap > 500.0) return 2;    // +1 kW
        if (gap > 0.0) return 3;      // +500 W
        return kEmsHoldAction;
    }
    return kEmsHoldAction;
}

}  // namespace item::control

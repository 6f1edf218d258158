#include "item/plant.hpp"

#include <algorithm>
#include <cmath>

namespace item::plant {

PlantParams default_params() {
    PlantParams p;

    // Engine optimal operating line; torque follows from P = T * omega.
    std::vector<double> pw{5000, 10000, 15000, 20000, 25000, 30000,
                           35000, 40000, 45000, 50000, 57000};
    std::vector<double> omega{105, 120, 140, 160, 180, 200, 225, 250, 280, 320, 360};
    std::vector<double> eff{0.28, 0.31, 0.33, 0.34, 0.345, 0.35,
                            0.35, 0.348, 0.345, 0.34, 0.33};
    std::vector<double> torque(pw.size()), fuel(pw.size());
    const double lhv = 43000.0;
    for (std::size_t i = 0; i < pw.size(); ++i) {
        torque[i] = pw[i] / omega[i];
        fuel[i] = pw[i] / (lhv * eff[i]);
    }
    p.maps.ool_speed_radps = Table1D(pw, omega);
    p.maps.ool_torque_nm = Table1D(pw, torque);
    p.maps.ool_fuel_gps = Table1D(pw, fuel);
    p.maps.p_engine_max_w = 57000.0;
    p.maps.p_engine_idle_w = 5000.0;
    p.maps.motor1_eff = Table1D::constant(0.90);
    p.maps.motor2_eff = Table1D::constant(0.90);
    p.maps.cold_fuel_mult = Table1D({20.0, 70.0}, {1.15, 1.0});

    p.battery.ocv_v = Table1D({0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0},
                              {3.00, 3.45, 3.55, 3.60, 3.65, 3.75, 4.10});
    p.battery.r0_ohm = Table1D::constant(0.012);
    p.battery.r1_ohm = Table1D::constant(0.015);
    p.battery.c1_f = Table1D::constant(5.0 / 0.015);  // RC time constant 5 s
    p.battery.aging_m = Table1D({0.5, 2.0, 6.0, 10.0},
                                {31630.0, 21681.0, 12934.0, 15512.0});
    return p;
}

LongitudinalDemand demand(double v_mps, double a_mps2, double grade_rad,
                          const VehicleParams& p) {
    LongitudinalDemand d;
    const double f_air = 0.5 * p.air_density * p.drag_coeff * p.frontal_area_m2 *
                         v_mps * v_mps;
    const double f_roll = p.mass_kg * p.gravity * p.rolling_coeff *
                          std::cos(grade_rad);
    const double f_grade = p.mass_kg * p.gravity * std::sin(grade_rad);
    const double f_accel = p.mass_kg * a_mps2;
    d.force_n = f_air + f_roll + f_grade + f_accel;
    d.power_w = d.force_n * v_mps;

    const double eta = p.wheel_eff * p.driveline_eff;
    const double eta_pow = d.power_w >= 0.0 ? eta : 1.0 / eta;  // eta^sgn(P)
    d.torque_ps_nm = d.force_n * p.wheel_radius_m / (p.final_drive_ratio * eta_pow);
    d.power_ps_w = d.power_w / eta_pow;
    return d;
}

ShaftSet powersplit_solve(double t_ps_nm, double v_mps, double p_ice_w,
                          const PowertrainMaps& maps, const VehicleParams& p) {
    ShaftSet s;
    const double rg = p.planetary_ratio;
    const double w_ring = p.final_drive_ratio * v_mps / p.wheel_radius_m;

    if (p_ice_w > 0.0) {
        s.w_engine_radps = maps.ool_speed_radps(p_ice_w);
        s.t_engine_nm = maps.ool_torque_nm(p_ice_w);
    }
    s.w_m2_radps = (1.0 + rg) * s.w_engine_radps - rg * w_ring;
    // ring receives r_g*T_e/(1+r_g); the generator reaction torque is
    // -T_e/(1+r_g). Chosen so P_e = P_ring + P_m2 holds identically.
    const double t_ring_gear = rg * s.t_engine_nm / (1.0 + rg);
    s.t_m2_nm = -s.t_engine_nm / (1.0 + rg);
    if (std::abs(s.t_m2_nm) > maps.motor2_torque_max_nm) {
        s.t_m2_nm = std::copysign(maps.motor2_torque_max_nm, s.t_m2_nm);
        s.saturated = true;
    }

    const double t_ring_coupler = t_ps_nm - t_ring_gear;
    s.w_m1_radps = p.coupler_ratio * w_ring;
    s.t_m1_nm = t_ring_coupler / p.coupler_ratio;
    if (s.t_m1_nm > maps.motor1_torque_max_nm) {
        s.t_m1_nm = maps.motor1_torque_max_nm;
        s.saturated = true;  // traction shortfall
    } else if (s.t_m1_nm < -maps.motor1_torque_max_nm) {
        // regen limit: the remainder goes to friction brakes, not a violation
        s.t_m1_nm = -maps.motor1_torque_max_nm;
    }
    return s;
}

namespace {

double motor_dc_power(double torque_nm, double omega_radps, const Table1D& eff_map) {
    const double p_mech = torque_nm * omega_radps;
    const double eta = eff_map(std::abs(omega_radps));
    return p_mech >= 0.0 ? p_mech / eta : p_mech * eta;
}

}  // namespace

ElectricalBalance electrical_balance(const ShaftSet& s, const PowertrainMaps& maps,
                                     double p_tm_electric_w, double n_cells) {
    ElectricalBalance eb;
    eb.p_bat_w = motor_dc_power(s.t_m1_nm, s.w_m1_radps, maps.motor1_eff) +
                 motor_dc_power(s.t_m2_nm, s.w_m2_radps, maps.motor2_eff) +
                 maps.p_bat_aux_w + p_tm_electric_w;
    eb.p_cell_w = eb.p_bat_w / n_cells;
    return eb;
}

double max_cell_power(double v_ocv, double v1, double r0) {
    const double e = v_ocv - v1;
    return e * e / (4.0 * r0);
}

double cell_current(double p_cell_w, double v_ocv, double v1, double r0) {
    const double e = v_ocv - v1;
    double disc = e * e - 4.0 * r0 * p_cell_w;
    if (disc < 0.0) {
        // tolerate round-off when the request sits exactly at the limit
        if (disc > -1e-9 * e * e)
            disc = 0.0;
        else
            throw PowerLimitError("cell power exceeds deliverable maximum");
    }
    return (e - std::sqrt(disc)) / (2.0 * r0);
}

Plant::Plant(PlantParams params) : params_(std::move(params)) {
    const auto& hv = params_.thermal.hvac;
    heater_pid_ = {400.0, 10.0, 0.0, 0.0,
                   hv.heater_core_max_w + hv.heater_electric_max_w,
                   hv.heater_core_max_w + hv.heater_electric_max_w};
    ac_pid_ = {400.0, 10.0, 0.0, 0.0, hv.ac_capacity_w, hv.ac_capacity_w};
}

void Plant::reset(const PlantState& state) {
    state_ = state;
    heater_pid_.reset();
    ac_pid_.reset();
    tm_command_ = {};
}

void Plant::battery_step(double p_cell_w, double dt, StepOutputs& out) {
    const auto& b = params_.battery;
    const double soc = state_.soc;
    const double v_ocv = b.ocv_v(soc);
    const double r0 = b.r0_ohm(soc);
    const double r1 = b.r1_ohm(soc);
    const double c1 = b.c1_f(soc);

    double p_cell = p_cell_w;
    const double p_max = max_cell_power(v_ocv, state_.v1, r0);
    if (p_cell > p_max) {
        p_cell = p_max;
        out.power_limited = true;
    }
    const double i = cell_current(p_cell, v_ocv, state_.v1, r0);

    state_.v1 += dt * (-state_.v1 / (r1 * c1) + i / c1);
    state_.soc += dt * (-i / (3600.0 * (b.capacity_ah - state_.capacity_loss_ah)));
    if (state_.soc < 0.0 || state_.soc > 1.0)
        throw ConstraintViolation("SOC left [0,1]");

    const double q_gen = i * i * r0 + state_.v1 * state_.v1 / r1;
    const double q_air = tm_command_.fan_on ? b.fan_heat_w_per_cell : 0.0;
    const double q_cool = tm_command_.coolant_on ? b.coolant_heat_w_per_cell : 0.0;
    const double c_th = b.thermal_capacity();
    state_.t_bat_c += dt * ((q_gen - q_air - q_cool) +
                            b.hc_w_per_m2c * b.area_m2 *
                                (params_.ambient_c - state_.t_bat_c)) /
                      c_th;

    // semi-empirical throughput-based aging
    const double abs_i = std::abs(i);
    if (abs_i > 0.0) {
        const double c_rate = abs_i / b.capacity_ah;
        const double t_kelvin = state_.t_bat_c + 273.15;
        const double factor =
            b.aging_m(c_rate) *
            std::exp(-b.activation_energy_j_per_mol / (b.gas_constant * t_kelvin));
        const double a_tol = std::pow(20.0 / factor, 1.0 / b.aging_z);
        const double n_cycles = 3600.0 * a_tol / b.capacity_ah;
        const double dah = abs_i * dt / 3600.0;
        state_.soh -= dah / (2.0 * n_cycles * b.capacity_ah);
        state_.throughput_ah += dah;
        state_.capacity_loss_ah = 2.0 * b.capacity_ah * (1.0 - state_.soh);
    }

    out.i_cell_a = i;
    out.q_gen_w = q_gen;
}

void Plant::engine_thermal_step(double p_ice_w, double fuel_gps,
                                double q_cab_extract_w, double dt,
                                StepOutputs* out) {
    const auto& e = params_.thermal.engine;
    const double q_fuel = fuel_gps * e.lhv_j_per_g;
    const double q_work = p_ice_w;
    const double q_exhaust = e.exhaust_fraction * q_fuel;
    const double q_conv = e.ua_convection_w_per_c * (state_.t_cl_c - params_.ambient_c);
    const double q_rad = state_.t_cl_c > e.thermostat_c ? e.radiator_max_w : 0.0;
    const double net = q_fuel - q_work - q_exhaust - q_conv - q_rad -
                       q_cab_extract_w + e.heat_storage_w;
    const double c_th = e.cs_j_per_kgc * e.engine_mass_kg;
    const double t_prev = state_.t_cl_c;
    state_.t_cl_c += dt * net / c_th;
    if (out) {
        out->q_coolant_residual_w =
            net - c_th * (state_.t_cl_c - t_prev) / dt;
    }
}

void Plant::cabin_thermal_step(double q_hvac_w, double dt) {
    const auto& c = params_.thermal.cabin;
    const double ua = c.ua_roof_w_per_c + c.ua_window_w_per_c +
                      c.ua_transmission_w_per_c;
    const double net = q_hvac_w + c.sun_load_w + ua * (params_.ambient_c - state_.t_cab_c);
    state_.t_cab_c += dt * net / (c.air_mass_kg * c.heat_capacity_j_per_kgc);
}

StepOutputs Plant::step(double v_mps, double a_mps2, double grade_rad,
                        const PlantActions& actions, double dt) {
    StepOutputs out;

    double p_ice = actions.p_ice_w;
    if (p_ice > 0.0)
        p_ice = std::clamp(p_ice, params_.maps.p_engine_idle_w,
                           params_.maps.p_engine_max_w);
    else
        p_ice = 0.0;

    const auto dem = demand(v_mps, a_mps2, grade_rad, params_.vehicle);
    out.shafts = powersplit_solve(dem.torque_ps_nm, v_mps, p_ice, params_.maps,
                                  params_.vehicle);
    out.traction_saturated = out.shafts.saturated;

    out.hvac = control::hvac_actuate(state_.t_cab_c, state_.t_cl_c,
                                     actions.heater_on, actions.ac_on,
                                     heater_pid_, ac_pid_, params_.thermal.hvac, dt);
    tm_command_ = control::battery_tm_rule(state_.t_bat_c,
                                           params_.thermal.battery_tm, tm_command_);
    out.battery_tm = tm_command_;

    double p_tm = out.hvac.p_electric_w;
    if (tm_command_.fan_on) p_tm += params_.battery.fan_power_w;
    if (tm_command_.coolant_on) p_tm += params_.battery.coolant_power_w;
    out.p_tm_w = p_tm;

    const auto eb = electrical_balance(out.shafts, params_.maps, p_tm,
                                       params_.battery.n_cells);
    out.p_bat_w = eb.p_bat_w;

    double fuel_gps = 0.0;
    if (p_ice > 0.0)
        fuel_gps = params_.maps.cold_fuel_mult(state_.t_cl_c) *
                   params_.maps.ool_fuel_gps(p_ice);
    out.fuel_rate_gps = fuel_gps;

    const double h = std::min(params_.substep_dt_s, dt);
    const auto n_sub = static_cast<std::size_t>(std::llround(dt / h));
    for (std::size_t k = 0; k < n_sub; ++k) {
        battery_step(eb.p_cell_w, h, out);
        engine_thermal_step(p_ice, fuel_gps, out.hvac.q_from_coolant_w, h, &out);
        cabin_thermal_step(out.hvac.q_hvac_w, h);
    }

    state_.fuel_g += fuel_gps * dt;
    state_.p_ice_w = p_ice;
    return out;
}

}  // namespace item::plant

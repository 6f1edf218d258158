#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "item/control.hpp"
#include "item/table.hpp"

namespace item::plant {

struct VehicleParams {
    double mass_kg = 1530.0;
    double air_density = 1.2;        // kg/m^3
    double drag_coeff = 0.26;
    double frontal_area_m2 = 2.25;
    double rolling_coeff = 0.015;
    double gravity = 9.81;
    double wheel_radius_m = 0.3;
    double final_drive_ratio = 4.0;
    double wheel_eff = 0.95;
    double driveline_eff = 0.95;
    double planetary_ratio = 2.6;    // ring/sun
    double coupler_ratio = 1.0;
};

// Engine optimal operating line indexed by commanded power.
struct PowertrainMaps {
    Table1D ool_speed_radps;   // P_e [W] -> omega_e
    Table1D ool_torque_nm;     // P_e [W] -> T_e
    Table1D ool_fuel_gps;      // P_e [W] -> warm fuel rate
    double p_engine_max_w = 57000.0;
    double p_engine_idle_w = 5000.0;
    Table1D motor1_eff;        // |omega| -> efficiency
    Table1D motor2_eff;
    double motor1_torque_max_nm = 300.0;
    double motor2_torque_max_nm = 150.0;
    double p_bat_aux_w = 300.0;
    Table1D cold_fuel_mult;    // T_cl [degC] -> multiplier (>= 1, -> 1 warm)
};

struct BatteryParams {
    double n_cells = 168.0;
    double capacity_ah = 6.5;
    Table1D ocv_v;             // SOC -> open-circuit voltage per cell
    Table1D r0_ohm;            // SOC -> ohmic resistance
    Table1D r1_ohm;            // SOC -> polarization resistance
    Table1D c1_f;              // SOC -> polarization capacitance
    double cp_j_per_kgc = 1350.0;
    double hc_w_per_m2c = 5.0;
    double area_m2 = 0.1;
    double cell_mass_kg = 0.2;
    double lumped_capacity_j_per_c = 0.0;  // >0 overrides cell_mass*cp
    Table1D aging_m;           // C-rate -> pre-exponential factor
    double activation_energy_j_per_mol = 31700.0;
    double gas_constant = 8.314;
    double aging_z = 0.55;
    double fan_heat_w_per_cell = 5.0;      // Q_a when the fan runs
    double coolant_heat_w_per_cell = 15.0; // Q_c when the coolant loop runs
    double fan_power_w = 50.0;             // pack-level electric draw
    double coolant_power_w = 200.0;

    double thermal_capacity() const {
        return lumped_capacity_j_per_c > 0.0 ? lumped_capacity_j_per_c
                                             : cell_mass_kg * cp_j_per_kgc;
    }
};

struct EngineThermalParams {
    double cs_j_per_kgc = 500.0;
    double engine_mass_kg = 100.0;
    double lhv_j_per_g = 43000.0;
    double exhaust_fraction = 0.30;
    double ua_convection_w_per_c = 50.0;
    double radiator_max_w = 25000.0;
    double thermostat_c = 90.0;
    double heat_storage_w = 0.0;
};

struct CabinThermalParams {
    double air_mass_kg = 5.0;
    double heat_capacity_j_per_kgc = 1000.0;
    double sun_load_w = 300.0;
    double ua_roof_w_per_c = 15.0;
    double ua_window_w_per_c = 25.0;
    double ua_transmission_w_per_c = 10.0;
};

struct ThermalParams {
    EngineThermalParams engine;
    CabinThermalParams cabin;
    control::HvacParams hvac;
    control::TmThresholds battery_tm;
};

struct PlantParams {
    VehicleParams vehicle;
    PowertrainMaps maps;
    BatteryParams battery;
    ThermalParams thermal;
    double ambient_c = 30.0;
    double substep_dt_s = 0.1;
};

// Reasonable defaults for a production power-split hybrid of this class.
PlantParams default_params();

struct PlantState {
    double soc = 0.65;
    double v1 = 0.0;          // polarization voltage, V
    double t_bat_c = 30.0;
    double t_cl_c = 25.0;
    double t_cab_c = 30.0;
    double soh = 1.0;
    double throughput_ah = 0.0;   // A_d
    double capacity_loss_ah = 0.0;  // delta-Q
    double fuel_g = 0.0;
    double p_ice_w = 0.0;     // current engine power command
};

struct LongitudinalDemand {
    double force_n = 0.0;     // F_d
    double power_w = 0.0;     // P_d
    double torque_ps_nm = 0.0;
    double power_ps_w = 0.0;
};

LongitudinalDemand demand(double v_mps, double a_mps2, double grade_rad,
                          const VehicleParams& p);

struct ShaftSet {
    double t_engine_nm = 0.0, w_engine_radps = 0.0;
    double t_m1_nm = 0.0, w_m1_radps = 0.0;
    double t_m2_nm = 0.0, w_m2_radps = 0.0;
    bool saturated = false;
};

ShaftSet powersplit_solve(double t_ps_nm, double v_mps, double p_ice_w,
                          const PowertrainMaps& maps, const VehicleParams& p);

// DC-side electrical balance; TM electric loads fold into the auxiliary term.
struct ElectricalBalance {
    double p_bat_w = 0.0;
    double p_cell_w = 0.0;
};
ElectricalBalance electrical_balance(const ShaftSet& s, const PowertrainMaps& maps,
                                     double p_tm_electric_w, double n_cells);

// Closed-form RC-circuit current for a requested cell power. Throws
// PowerLimitError when the demand exceeds the deliverable maximum.
struct PowerLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
double cell_current(double p_cell_w, double v_ocv, double v1, double r0);
double max_cell_power(double v_ocv, double v1, double r0);

struct StepOutputs {
    double fuel_rate_gps = 0.0;
    double p_bat_w = 0.0;
    double i_cell_a = 0.0;
    double p_tm_w = 0.0;          // total TM electric power this step
    ShaftSet shafts;
    double q_gen_w = 0.0;         // battery heat generation per cell
    double q_coolant_residual_w = 0.0;  // Eq-balance residual of the coolant loop
    bool traction_saturated = false;
    bool power_limited = false;
    control::HvacCommand hvac;
    control::TmCommand battery_tm;
};

struct ConstraintViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Agent-facing actions for one control step.
struct PlantActions {
    double p_ice_w = 0.0;
    int heater_on = 0;
    int ac_on = 0;
};

class Plant {
public:
    explicit Plant(PlantParams params);

    void reset(const PlantState& state);
    const PlantState& state() const { return state_; }
    const PlantParams& params() const { return params_; }

    // Advance one control step of length dt (sub-stepped internally).
    // Throws ConstraintViolation when SOC leaves [0,1].
    StepOutputs step(double v_mps, double a_mps2, double grade_rad,
                     const PlantActions& actions, double dt);

    // Individual physics stages, exposed for direct testing.
    void battery_step(double p_cell_w, double dt, StepOutputs& out);
    void engine_thermal_step(double p_ice_w, double fuel_gps,
                             double q_cab_extract_w, double dt,
                             StepOutputs* out = nullptr);
    void cabin_thermal_step(double q_hvac_w, double dt);

private:
    PlantParams params_;
    PlantState state_;
    control::PidController heater_pid_;
    control::PidController ac_pid_;
    control::TmCommand tm_command_;
};

}  // namespace item::plant

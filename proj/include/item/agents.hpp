#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "item/control.hpp"
#include "item/cycles.hpp"
#include "item/nn.hpp"
#include "item/plant.hpp"
#include "item/recognizer.hpp"

namespace item::agents {

inline constexpr std::size_t kNumConditions = 3;

// Min-max normalization ranges mapping raw components onto [-1, 1].
struct ObsRanges {
    double v_max = 30.0;        // m/s
    double a_max = 3.0;         // m/s^2
    double t_cab_lo = 0.0, t_cab_hi = 50.0;
    double e_cab_max = 15.0;    // deg C
    double dsoc_max = 0.2;
};

// Cabin agent: (T_cab, e_cab, V_s, V_a, DC one-hot) -> 7 inputs.
// EMS agent:  (V_s, V_a, dSoC, a_last, DC one-hot) -> 7 inputs.
inline constexpr std::size_t kObsDim = 7;

std::vector<double> build_obs_cab(const plant::PlantState& st, double v, double a,
                                  std::size_t dc_label, bool dc_enabled,
                                  const ObsRanges& r, double target_c = 22.0);

std::vector<double> build_obs_ems(const plant::PlantState& st, double v, double a,
                                  double soc_initial, std::size_t a_last,
                                  std::size_t n_actions, std::size_t dc_label,
                                  bool dc_enabled, const ObsRanges& r);

double reward_cab(double e_cab_c, double p_cab_w, double alpha1, double alpha2);
double reward_ems(double fuel_gps, double soc, double beta1, double beta2,
                  double soc_ref = 0.7);

struct Transition {
    std::vector<double> obs;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool terminal = false;
};

class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed)
        : capacity_(capacity), rng_(seed) {}

    void push(Transition t);
    std::vector<const Transition*> sample(std::size_t batch);
    std::size_t size() const { return storage_.size(); }
    const Transition& at(std::size_t i) const { return storage_[i]; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;  // FIFO eviction cursor
    std::vector<Transition> storage_;
    std::mt19937_64 rng_;
};

struct AgentConfig {
    double gamma = 0.99;
    double eps_start = 1.0;
    double eps_end = 0.05;
    std::size_t eps_decay_steps = 50000;
    std::size_t batch = 64;
    std::size_t buffer_capacity = 100000;
    std::size_t target_sync_interval = 500;
    std::size_t warmup_transitions = 1000;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    std::vector<std::size_t> hidden{64, 64};
};

std::size_t select_action(const nn::Mlp& net, const std::vector<double>& obs,
                          double epsilon, std::mt19937_64& rng);

// One independent double deep-Q learner.
class DqnAgent {
public:
    DqnAgent(std::size_t obs_dim, std::size_t n_actions, const AgentConfig& cfg);

    std::size_t act(const std::vector<double>& obs, double epsilon);
    std::size_t act_greedy(const std::vector<double>& obs) const;
    void observe(Transition t);
    std::optional<double> maybe_train();  // returns loss when an update ran

    double epsilon() const;
    const nn::Mlp& online() const { return online_; }
    const nn::Mlp& target() const { return target_; }
    nn::Mlp& online_mut() { return online_; }
    void set_online(nn::Mlp net);
    std::size_t updates() const { return updates_; }
    ReplayBuffer& buffer() { return buffer_; }
    std::size_t n_actions() const { return n_actions_; }

    // Double-Q target on one batch, one optimizer step.
    double td_update(const std::vector<const Transition*>& batch);

private:
    AgentConfig cfg_;
    std::size_t n_actions_;
    nn::Mlp online_;
    nn::Mlp target_;
    nn::AdamState adam_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
    std::size_t env_steps_ = 0;
    std::size_t updates_ = 0;
};

struct RewardCoeffs {
    double alpha1 = 1.0;     // cabin comfort
    double alpha2 = 1e-3;    // cabin power
    double beta1 = 1.0;      // fuel rate
    double beta2 = 350.0;    // charge sustaining
    double soc_ref = 0.7;
    double violation_penalty = 50.0;
};

struct EpisodeMetrics {
    double fuel_g = 0.0;
    double tm_energy_wh = 0.0;
    double soc_initial = 0.0;
    double soc_final = 0.0;
    double soh_loss = 0.0;
    double mean_abs_e_cab = 0.0;    // after warm-up
    double comfort_fraction = 0.0;  // |e| <= 2 C after warm-up
    std::size_t traction_violations = 0;
    std::size_t power_limit_events = 0;
    bool terminated_early = false;
    double return_cab = 0.0;
    double return_ems = 0.0;

    struct TracePoint {
        double t_s;
        double v_mps;
        double t_bat_c, t_cl_c, t_cab_c;
        double soc, soh, fuel_g;
        double p_ice_w, p_tm_w, fuel_rate_gps;
        std::size_t dc_label;
        std::size_t a_ems, a_cab;
    };
    std::vector<TracePoint> trace;
};

enum class RolloutMode { Train, Eval };

struct RolloutConfig {
    double control_dt_s = 1.0;
    double warmup_s = 120.0;        // comfort statistics warm-up
    double comfort_band_c = 2.0;
    bool dc_enabled = true;
    std::size_t cab_action_space = 3;  // {off, heat, cool}; 4 for the 2-bit space
    ObsRanges ranges;
    RewardCoeffs rewards;
    plant::PlantState initial_state;
};

// Shared-environment rollout of the two independent learners.
EpisodeMetrics rollout_episode(const cycles::DriveCycle& cycle, plant::Plant& plant,
                               recognizer::SlidingRecognizer* recog,
                               DqnAgent& ems_agent, DqnAgent& cab_agent,
                               const RolloutConfig& cfg, RolloutMode mode,
                               double epsilon_override = -1.0);

// Fixed-policy rollouts used for baselines and oracles.
EpisodeMetrics rollout_policy(const cycles::DriveCycle& cycle, plant::Plant& plant,
                              const RolloutConfig& cfg,
                              const std::function<plant::PlantActions(
                                  const plant::PlantState&, double, double)>& policy);

struct TrainConfig {
    AgentConfig agent;
    RolloutConfig rollout;
    std::size_t episodes = 60;
    std::size_t eval_interval = 10;
    double divergence_loss = 1e6;
    std::size_t divergence_patience = 3;
};

struct LearningCurvePoint {
    std::size_t episode;
    double return_ems, return_cab;
    double fuel_g, tm_energy_wh, soc_final;
    bool is_eval;
};

struct TrainResult {
    std::vector<LearningCurvePoint> curve;
    EpisodeMetrics best_eval;
    std::size_t best_episode = 0;
    // Online-network snapshots taken at the best held-out evaluation.
    nn::Mlp best_ems, best_cab;
};

// Round-robin training over the given cycles with periodic held-out evals.
TrainResult train(const TrainConfig& cfg, const plant::PlantParams& plant_params,
                  const std::vector<cycles::DriveCycle>& train_cycles,
                  const cycles::DriveCycle& eval_cycle,
                  const recognizer::RecognizerBundle* recog_bundle,
                  DqnAgent& ems_agent, DqnAgent& cab_agent);

// Map a cabin action index onto heater/AC modes.
void cab_action_to_modes(std::size_t action, std::size_t space, int& a_h, int& a_ac);

}  // namespace item::agents

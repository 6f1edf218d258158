#include "item/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace item::agents {

namespace {

double norm_to_unit(double x, double lo, double hi) {
    const double u = 2.0 * (x - lo) / (hi - lo) - 1.0;
    return std::clamp(u, -1.0, 1.0);
}

void append_dc(std::vector<double>& obs, std::size_t dc_label, bool dc_enabled) {
    for (std::size_t c = 0; c < kNumConditions; ++c)
        obs.push_back(dc_enabled && c == dc_label ? 1.0 : 0.0);
}

}  // namespace

std::vector<double> build_obs_cab(const plant::PlantState& st, double v, double a,
                                  std::size_t dc_label, bool dc_enabled,
                                  const ObsRanges& r, double target_c) {
    std::vector<double> obs;
    obs.reserve(kObsDim);
    obs.push_back(norm_to_unit(st.t_cab_c, r.t_cab_lo, r.t_cab_hi));
    obs.push_back(norm_to_unit(st.t_cab_c - target_c, -r.e_cab_max, r.e_cab_max));
    obs.push_back(norm_to_unit(v, 0.0, r.v_max));
    obs.push_back(norm_to_unit(a, -r.a_max, r.a_max));
    append_dc(obs, dc_label, dc_enabled);
    return obs;
}

std::vector<double> build_obs_ems(const plant::PlantState& st, double v, double a,
                                  double soc_initial, std::size_t a_last,
                                  std::size_t n_actions, std::size_t dc_label,
                                  bool dc_enabled, const ObsRanges& r) {
    std::vector<double> obs;
    obs.reserve(kObsDim);
    obs.push_back(norm_to_unit(v, 0.0, r.v_max));
    obs.push_back(norm_to_unit(a, -r.a_max, r.a_max));
    obs.push_back(norm_to_unit(st.soc - soc_initial, -r.dsoc_max, r.dsoc_max));
    obs.push_back(norm_to_unit(static_cast<double>(a_last), 0.0,
                               static_cast<double>(n_actions - 1)));
    append_dc(obs, dc_label, dc_enabled);
    return obs;
}

double reward_cab(double e_cab_c, double p_cab_w, double alpha1, double alpha2) {
    return -alpha1 * e_cab_c * e_cab_c - alpha2 * p_cab_w;
}

double reward_ems(double fuel_gps, double soc, double beta1, double beta2,
                  double soc_ref) {
    const double d = soc - soc_ref;
    return -beta1 * fuel_gps - beta2 * d * d;
}

void ReplayBuffer::push(Transition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
    } else {
        storage_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch) {
    if (storage_.empty()) throw std::logic_error("ReplayBuffer: empty");
    batch = std::min(batch, storage_.size());
    // uniform without replacement within the batch
    std::vector<std::size_t> idx(storage_.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < batch; ++i) {
        std::uniform_int_distribution<std::size_t> u(i, idx.size() - 1);
        std::swap(idx[i], idx[u(rng_)]);
    }
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) out.push_back(&storage_[idx[i]]);
    return out;
}

std::size_t select_action(const nn::Mlp& net, const std::vector<double>& obs,
                          double epsilon, std::mt19937_64& rng) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("select_action: epsilon outside [0,1]");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> a(0, net.output_dim() - 1);
        return a(rng);
    }
    return nn::argmax(net.forward(obs));
}

DqnAgent::DqnAgent(std::size_t obs_dim, std::size_t n_actions,
                   const AgentConfig& cfg)
    : cfg_(cfg),
      n_actions_(n_actions),
      online_([&] {
          std::vector<std::size_t> sizes{obs_dim};
          sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
          sizes.push_back(n_actions);
          return nn::make_mlp(sizes, nn::Output::Identity, cfg.seed);
      }()),
      target_(online_),
      adam_(nn::make_adam(online_, cfg.lr)),
      buffer_(cfg.buffer_capacity, cfg.seed ^ 0xb5297a4d3f84d5b5ULL),
      rng_(cfg.seed ^ 0x68e31da4a17c4c2dULL) {}

double DqnAgent::epsilon() const {
    if (env_steps_ >= cfg_.eps_decay_steps) return cfg_.eps_end;
    const double f = static_cast<double>(env_steps_) /
                     static_cast<double>(cfg_.eps_decay_steps);
    return cfg_.eps_start + f * (cfg_.eps_end - cfg_.eps_start);
}

std::size_t DqnAgent::act(const std::vector<double>& obs, double epsilon) {
    ++env_steps_;
    return select_action(online_, obs, epsilon, rng_);
}

std::size_t DqnAgent::act_greedy(const std::vector<double>& obs) const {
    return nn::argmax(online_.forward(obs));
}

void DqnAgent::observe(Transition t) { buffer_.push(std::move(t)); }

void DqnAgent::set_online(nn::Mlp net) {
    online_ = std::move(net);
    target_ = online_;
}

double DqnAgent::td_update(const std::vector<const Transition*>& batch) {
    if (batch.empty()) throw std::invalid_argument("td_update: empty batch");
    auto grads = nn::zero_grads(online_);
    double loss = 0.0;
    for (const Transition* tr : batch) {
        double y = tr->reward;
        if (!tr->terminal) {
            // double-Q: online argmax, target evaluation
            const auto q_online_next = online_.forward(tr->next_obs);
            const auto best = nn::argmax(q_online_next);
            const auto q_target_next = target_.forward(tr->next_obs);
            y += cfg_.gamma * q_target_next[best];
        }
        const auto q = online_.forward(tr->obs);
        const double err = q[tr->action] - y;
        loss += err * err;
        std::vector<double> out_grad(n_actions_, 0.0);
        out_grad[tr->action] = 2.0 * err / static_cast<double>(batch.size());
        nn::backward(online_, tr->obs, out_grad, nn::Loss::SquaredError, grads);
    }
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss))
        throw std::runtime_error("td_update: non-finite loss");
    nn::adam_step(online_, grads, adam_);
    ++updates_;
    if (updates_ % cfg_.target_sync_interval == 0) target_ = online_;
    return loss;
}

std::optional<double> DqnAgent::maybe_train() {
    if (buffer_.size() < cfg_.warmup_transitions) return std::nullopt;
    return td_update(buffer_.sample(cfg_.batch));
}

void cab_action_to_modes(std::size_t action, std::size_t space, int& a_h, int& a_ac) {
    a_h = 0;
    a_ac = 0;
    if (space == 3) {
        // {off, heat, cool}
        if (action == 1) a_h = 1;
        if (action == 2) a_ac = 1;
    } else if (space == 4) {
        // 2-bit {a_h, a_ac}; heater precedence resolved downstream
        a_h = static_cast<int>(action & 1);
        a_ac = static_cast<int>((action >> 1) & 1);
    } else {
        throw std::invalid_argument("cab_action_to_modes: unsupported space");
    }
}

namespace {

struct StepRates {
    double v = 0.0;
    double a = 0.0;
    double grade = 0.0;
};

StepRates rates_at(const cycles::DriveCycle& cycle, std::size_t i) {
    StepRates r;
    r.v = cycle.speed[i];
    if (i + 1 < cycle.speed.size())
        r.a = (cycle.speed[i + 1] - cycle.speed[i]) / cycle.dt;
    r.grade = cycle.grade_at(i);
    return r;
}

void finalize_metrics(EpisodeMetrics& m, const RolloutConfig& cfg,
                      const std::vector<double>& e_cab_series, double dt) {
    const auto warm = static_cast<std::size_t>(cfg.warmup_s / dt);
    double sum_abs = 0.0;
    std::size_t in_band = 0, n = 0;
    for (std::size_t i = warm; i < e_cab_series.size(); ++i) {
        sum_abs += std::abs(e_cab_series[i]);
        if (std::abs(e_cab_series[i]) <= cfg.comfort_band_c) ++in_band;
        ++n;
    }
    if (n > 0) {
        m.mean_abs_e_cab = sum_abs / static_cast<double>(n);
        m.comfort_fraction = static_cast<double>(in_band) / static_cast<double>(n);
    }
}

}  // namespace

EpisodeMetrics rollout_episode(const cycles::DriveCycle& cycle, plant::Plant& plant,
                               recognizer::SlidingRecognizer* recog,
                               DqnAgent& ems_agent, DqnAgent& cab_agent,
                               const RolloutConfig& cfg, RolloutMode mode,
                               double epsilon_override) {
    const double dt = cfg.control_dt_s;
    plant.reset(cfg.initial_state);

    EpisodeMetrics m;
    m.soc_initial = cfg.initial_state.soc;
    const double target_c = plant.params().thermal.hvac.target_c;

    std::vector<double> e_cab_series;
    std::size_t a_last = control::kEmsHoldAction;
    const std::size_t n = cycle.speed.size();

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto r = rates_at(cycle, i);
        const std::size_t dc = recog ? recog->step(r.v) : 0;

        const auto& st = plant.state();
        auto obs_ems = build_obs_ems(st, r.v, r.a, m.soc_initial, a_last,
                                     ems_agent.n_actions(), dc, cfg.dc_enabled,
                                     cfg.ranges);
        auto obs_cab = build_obs_cab(st, r.v, r.a, dc, cfg.dc_enabled, cfg.ranges,
                                     target_c);

        double eps_e = 0.0, eps_c = 0.0;
        if (mode == RolloutMode::Train) {
            eps_e = epsilon_override >= 0.0 ? epsilon_override : ems_agent.epsilon();
            eps_c = epsilon_override >= 0.0 ? epsilon_override : cab_agent.epsilon();
        }
        const std::size_t a_ems = mode == RolloutMode::Train
                                      ? ems_agent.act(obs_ems, eps_e)
                                      : ems_agent.act_greedy(obs_ems);
        const std::size_t a_cab = mode == RolloutMode::Train
                                      ? cab_agent.act(obs_cab, eps_c)
                                      : cab_agent.act_greedy(obs_cab);

        plant::PlantActions act;
        act.p_ice_w = control::apply_ems_action(st.p_ice_w, a_ems,
                                                plant.params().maps.p_engine_idle_w,
                                                plant.params().maps.p_engine_max_w);
        cab_action_to_modes(a_cab, cfg.cab_action_space, act.heater_on, act.ac_on);

        bool terminal = false;
        plant::StepOutputs out;
        try {
            out = plant.step(r.v, r.a, r.grade, act, dt);
        } catch (const plant::ConstraintViolation&) {
            terminal = true;
            m.terminated_early = true;
        }

        const auto& st2 = plant.state();
        const double e_cab = st2.t_cab_c - target_c;
        double r_cab = reward_cab(e_cab, out.hvac.p_electric_w, cfg.rewards.alpha1,
                                  cfg.rewards.alpha2);
        double r_ems = reward_ems(out.fuel_rate_gps, st2.soc, cfg.rewards.beta1,
                                  cfg.rewards.beta2, cfg.rewards.soc_ref);
        if (terminal) {
            r_cab -= cfg.rewards.violation_penalty;
            r_ems -= cfg.rewards.violation_penalty;
        }
        m.return_cab += r_cab;
        m.return_ems += r_ems;

        if (!terminal) {
            e_cab_series.push_back(e_cab);
            m.tm_energy_wh += out.p_tm_w * dt / 3600.0;
            if (out.traction_saturated) ++m.traction_violations;
            if (out.power_limited) ++m.power_limit_events;
            m.trace.push_back({dt * static_cast<double>(i), r.v, st2.t_bat_c,
                               st2.t_cl_c, st2.t_cab_c, st2.soc, st2.soh,
                               st2.fuel_g, st2.p_ice_w, out.p_tm_w,
                               out.fuel_rate_gps, dc, a_ems, a_cab});
        }

        if (mode == RolloutMode::Train) {
            const bool last = terminal || i + 2 >= n;
            const auto r_next = rates_at(cycle, std::min(i + 1, n - 1));
            const std::size_t dc_next = recog ? recog->current_label() : 0;
            ems_agent.observe({obs_ems, a_ems, r_ems,
                               build_obs_ems(st2, r_next.v, r_next.a, m.soc_initial,
                                             a_ems, ems_agent.n_actions(), dc_next,
                                             cfg.dc_enabled, cfg.ranges),
                               last});
            cab_agent.observe({obs_cab, a_cab, r_cab,
                               build_obs_cab(st2, r_next.v, r_next.a, dc_next,
                                             cfg.dc_enabled, cfg.ranges, target_c),
                               last});
            ems_agent.maybe_train();
            cab_agent.maybe_train();
        }

        a_last = a_ems;
        if (terminal) break;
    }

    const auto& fin = plant.state();
    m.fuel_g = fin.fuel_g;
    m.soc_final = fin.soc;
    m.soh_loss = cfg.initial_state.soh - fin.soh;
    finalize_metrics(m, cfg, e_cab_series, dt);
    return m;
}

EpisodeMetrics rollout_policy(const cycles::DriveCycle& cycle, plant::Plant& plant,
                              const RolloutConfig& cfg,
                              const std::function<plant::PlantActions(
                                  const plant::PlantState&, double, double)>& policy) {
    const double dt = cfg.control_dt_s;
    plant.reset(cfg.initial_state);
    EpisodeMetrics m;
    m.soc_initial = cfg.initial_state.soc;
    const double target_c = plant.params().thermal.hvac.target_c;
    std::vector<double> e_cab_series;
    const std::size_t n = cycle.speed.size();

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto r = rates_at(cycle, i);
        const auto act = policy(plant.state(), r.v, r.a);
        plant::StepOutputs out;
        try {
            out = plant.step(r.v, r.a, r.grade, act, dt);
        } catch (const plant::ConstraintViolation&) {
            m.terminated_early = true;
            break;
        }
        const auto& st2 = plant.state();
        e_cab_series.push_back(st2.t_cab_c - target_c);
        m.tm_energy_wh += out.p_tm_w * dt / 3600.0;
        if (out.traction_saturated) ++m.traction_violations;
        if (out.power_limited) ++m.power_limit_events;
        m.trace.push_back({dt * static_cast<double>(i), r.v, st2.t_bat_c,
                           st2.t_cl_c, st2.t_cab_c, st2.soc, st2.soh, st2.fuel_g,
                           st2.p_ice_w, out.p_tm_w, out.fuel_rate_gps, 0, 0, 0});
    }
    const auto& fin = plant.state();
    m.fuel_g = fin.fuel_g;
    m.soc_final = fin.soc;
    m.soh_loss = cfg.initial_state.soh - fin.soh;
    finalize_metrics(m, cfg, e_cab_series, dt);
    return m;
}

TrainResult train(const TrainConfig& cfg, const plant::PlantParams& plant_params,
                  const std::vector<cycles::DriveCycle>& train_cycles,
                  const cycles::DriveCycle& eval_cycle,
                  const recognizer::RecognizerBundle* recog_bundle,
                  DqnAgent& ems_agent, DqnAgent& cab_agent) {
    if (train_cycles.empty())
        throw std::invalid_argument("train: need at least one training cycle");
    if (cfg.episodes == 0) throw std::invalid_argument("train: zero episodes");

    plant::Plant plant(plant_params);
    TrainResult result;
    double best_return = -std::numeric_limits<double>::infinity();
    std::size_t divergent_evals = 0;

    auto make_recog = [&]() -> std::optional<recognizer::SlidingRecognizer> {
        if (!recog_bundle) return std::nullopt;
        return recognizer::SlidingRecognizer(
            recog_bundle->window_s, cfg.rollout.control_dt_s,
            recog_bundle->cluster_model, recog_bundle->net, recog_bundle->mode);
    };

    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        const auto& cyc = train_cycles[ep % train_cycles.size()];
        auto recog = make_recog();
        auto m = rollout_episode(cyc, plant, recog ? &*recog : nullptr, ems_agent,
                                 cab_agent, cfg.rollout, RolloutMode::Train);
        result.curve.push_back({ep, m.return_ems, m.return_cab, m.fuel_g,
                                m.tm_energy_wh, m.soc_final, false});

        if ((ep + 1) % cfg.eval_interval == 0 || ep + 1 == cfg.episodes) {
            auto recog_e = make_recog();
            auto me = rollout_episode(eval_cycle, plant, recog_e ? &*recog_e : nullptr,
                                      ems_agent, cab_agent, cfg.rollout,
                                      RolloutMode::Eval);
            result.curve.push_back({ep, me.return_ems, me.return_cab, me.fuel_g,
                                    me.tm_energy_wh, me.soc_final, true});
            const double total = me.return_ems + me.return_cab;
            if (total > best_return) {
                best_return = total;
                result.best_eval = me;
                result.best_episode = ep;
                result.best_ems = ems_agent.online();
                result.best_cab = cab_agent.online();
            }
            if (!std::isfinite(total) || -total > cfg.divergence_loss) {
                if (++divergent_evals >= cfg.divergence_patience)
                    throw std::runtime_error("train: diverged (eval return " +
                                             std::to_string(total) + ")");
            } else {
                divergent_evals = 0;
            }
        }
    }
    return result;
}

}  // namespace item::agents

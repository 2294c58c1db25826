#include <memory>

#include "zonectl/agents.hpp"

namespace zonectl::agents {

namespace {

// Generic two-threshold switch. Heating turns on below (or at) on_at and off
// at or above off_at; cooling mirrors both comparisons.
double hysteresis(double t, double on_at, double off_at, bool inclusive_on, data::Mode mode,
                  const env::ActionBounds& bounds, HysteresisState& state) {
    if (mode == data::Mode::heating) {
        if (!state.currently_on && (inclusive_on ? t <= on_at : t < on_at)) {
            state.currently_on = true;
        } else if (state.currently_on && t >= off_at) {
            state.currently_on = false;
        }
        return state.currently_on ? bounds.high : 0.0;
    }
    if (!state.currently_on && (inclusive_on ? t >= on_at : t > on_at)) {
        state.currently_on = true;
    } else if (state.currently_on && t <= off_at) {
        state.currently_on = false;
    }
    return state.currently_on ? bounds.low : 0.0;
}

}  // namespace

double baseline1_act(double measured_t, double lower, double upper, data::Mode mode,
                     const env::ActionBounds& bounds, HysteresisState& state) {
    if (mode == data::Mode::heating) {
        return hysteresis(measured_t, lower, lower + 0.5, false, mode, bounds, state);
    }
    return hysteresis(measured_t, upper, upper - 0.5, false, mode, bounds, state);
}

double baseline2_act(double measured_t, double lower, double upper, data::Mode mode,
                     const env::ActionBounds& bounds, HysteresisState& state) {
    if (mode == data::Mode::heating) {
        return hysteresis(measured_t, lower, lower + 1.0, true, mode, bounds, state);
    }
    return hysteresis(measured_t, upper, upper - 1.0, true, mode, bounds, state);
}

Policy td3_policy(const Td3Agent& agent) {
    return [&agent](const env::Environment& e, std::span<const double> obs) {
        return to_power(actor_output(agent, obs), e.action_bounds());
    };
}

namespace {

template <class Act>
Policy rule_policy(Act act) {
    auto state = std::make_shared<HysteresisState>();
    return [state, act](const env::Environment& e, std::span<const double>) {
        if (e.step_index() == 0) *state = {};
        const auto b = e.current_bounds();
        return act(e.measured_temperature(), b.lower, b.upper, e.mode(), e.action_bounds(), *state);
    };
}

}  // namespace

Policy baseline1_policy() { return rule_policy(baseline1_act); }
Policy baseline2_policy() { return rule_policy(baseline2_act); }

EpisodeSummary run_episode(env::Environment& environment, const data::Trajectory& trajectory,
                           std::uint64_t seed, const Policy& policy, std::vector<env::EpisodeLogRow>* log) {
    EpisodeSummary s;
    auto obs = environment.reset(trajectory, seed);
    if (log != nullptr) log->clear();
    while (!environment.done()) {
        const double u = policy(environment, obs);
        auto res = environment.step(u);
        s.reward += res.reward;
        s.energy_kwh += res.info.energy_kwh;
        s.violation_sum += res.info.violation;
        if (log != nullptr) log->push_back({s.steps, res.reward, res.info});
        ++s.steps;
        obs = std::move(res.observation);
    }
    s.comfort_kh = s.violation_sum * env::kDtHours;
    return s;
}

}  // namespace zonectl::agents

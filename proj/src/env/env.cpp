#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "zonectl/env.hpp"
#include "zonectl/error.hpp"

namespace zonectl::env {

Environment::Environment(std::shared_ptr<const pcnn::PcnnModel> model, EnvConfig config)
    : model_(std::move(model)), config_(config) {
    if (!model_) throw std::invalid_argument("Environment: null model");
    config_.validate();
}

std::vector<double> Environment::reset(const data::Trajectory& trajectory, std::uint64_t seed) {
    horizon_ = episode_horizon(trajectory);
    trajectory_ = &trajectory;
    mode_ = trajectory.mode();
    step_ = 0;
    exo_ = pcnn::make_exogenous(std::span(trajectory.records).subspan(kLags, horizon_),
                                model_->normalizer);
    noise_ = noise_sequence(seed, horizon_ + 1, config_.noise_sigma);

    const auto& norm = model_->normalizer;
    const double t0 = trajectory.records[kLags].t_zone;
    state_ = pcnn::initial_state(norm.apply(data::Feature::temperature, t0));

    measured_history_.assign(trajectory.length(), 0.0);
    for (std::size_t i = 0; i < kLags; ++i) measured_history_[i] = trajectory.records[i].t_zone;
    measured_history_[kLags] = true_temperature() + noise_[0];
    return observation();
}

double Environment::true_temperature() const {
    return model_->normalizer.invert(data::Feature::temperature, state_.T);
}

double Environment::measured_temperature() const { return measured_history_.at(kLags + step_); }

ComfortBounds Environment::current_bounds() const {
    return bounds_at(trajectory_->records[kLags + step_].timestamp, mode_);
}

std::vector<double> Environment::observation() const {
    if (trajectory_ == nullptr) throw std::logic_error("Environment: observation before reset");
    const auto& recs = trajectory_->records;
    const std::size_t now = kLags + step_;
    std::vector<double> o(kObservationDim, 0.0);
    for (std::size_t j = 0; j <= kLags; ++j) {
        const auto& r = recs[now - j];
        o[obs::zone + j] = obs::scale_zone(measured_history_[now - j]);
        o[obs::neighbour + j] = obs::scale_zone(r.t_neigh);
        o[obs::outside + j] = obs::scale_outside(r.t_out);
        o[obs::solar + j] = obs::scale_solar(r.solar);
    }
    const auto tf = pcnn::time_features(recs[now].timestamp);
    std::copy(tf.begin(), tf.begin() + 5, o.begin() + obs::time);
    o[obs::mode] = mode_ == data::Mode::heating ? 1.0 : -1.0;
    const auto b = bounds_at(recs[now].timestamp, mode_);
    o[obs::lower] = obs::scale_zone(b.lower);
    o[obs::upper] = obs::scale_zone(b.upper);
    return o;
}

StepResult Environment::step(double u_kw) {
    if (trajectory_ == nullptr) throw std::logic_error("Environment: step before reset");
    if (done()) throw std::logic_error("Environment: episode already finished");
    if (std::isnan(u_kw)) throw NumericError("Environment: NaN action");
    const auto ab = action_bounds();
    const double u = std::clamp(u_kw, ab.low, ab.high);

    const auto& norm = model_->normalizer;
    const double s = norm.scale(data::Feature::temperature);
    const double feedback = state_.T + s * noise_[step_];
    state_ = pcnn::pcnn_step_with_feedback(*model_, state_, exo_[step_], u, feedback);
    ++step_;

    const std::size_t now = kLags + step_;
    const double true_t = true_temperature();
    const double measured = true_t + noise_[step_];
    measured_history_[now] = measured;

    const auto b = bounds_at(trajectory_->records[now].timestamp, mode_);
    StepResult res;
    res.reward = reward(measured, b.lower, b.upper, u, config_.lambda);
    res.done = done();
    res.info.true_temperature = true_t;
    res.info.measured_temperature = measured;
    res.info.lower = b.lower;
    res.info.upper = b.upper;
    res.info.power_kw = u;
    res.info.violation = comfort_violation(measured, b);
    res.info.energy_kwh = std::abs(u) * kDtHours;
    res.info.D = state_.D;
    res.info.E = state_.E;
    res.observation = observation();
    return res;
}

void write_episode_log(const std::vector<EpisodeLogRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    using data::format_number;
    out << "step,true_t,measured_t,lower,upper,u,reward,D,E\n";
    for (const auto& r : rows) {
        out << r.step << ',' << format_number(r.info.true_temperature) << ','
            << format_number(r.info.measured_temperature) << ',' << format_number(r.info.lower) << ','
            << format_number(r.info.upper) << ',' << format_number(r.info.power_kw) << ','
            << format_number(r.reward) << ',' << format_number(r.info.D) << ',' << format_number(r.info.E) << '\n';
    }
}

}  // namespace zonectl::env

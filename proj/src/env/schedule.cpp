#include <cmath>
#include <random>
#include <stdexcept>

#include "zonectl/env.hpp"
#include "zonectl/error.hpp"

namespace zonectl::env {

ComfortBounds bounds_at(data::Timestamp t, data::Mode mode) {
    const double hour = data::calendar(t).hour_of_day;
    const bool night = hour >= 20.0 || hour < 8.0;
    if (night) return {23.0, 24.0};
    return mode == data::Mode::heating ? ComfortBounds{21.0, 24.0} : ComfortBounds{23.0, 26.0};
}

double comfort_violation(double temperature, const ComfortBounds& bounds) {
    return std::max(bounds.lower - temperature, 0.0) + std::max(temperature - bounds.upper, 0.0);
}

double reward(double measured_temperature, double lower, double upper, double u_kw, double lambda) {
    if (!(lower < upper)) throw std::invalid_argument("reward: lower bound must be below upper bound");
    return -comfort_violation(measured_temperature, {lower, upper}) - lambda * std::abs(u_kw);
}

ActionBounds EnvConfig::action_bounds(data::Mode mode) const {
    return mode == data::Mode::heating ? ActionBounds{0.0, max_heating_kw} : ActionBounds{-max_cooling_kw, 0.0};
}

void EnvConfig::validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("env.lambda must be >= 0");
    if (!(noise_sigma >= 0.0)) throw ConfigError("env.noise_sigma must be >= 0");
    if (!(max_heating_kw >= 0.0) || !(max_cooling_kw >= 0.0)) {
        throw ConfigError("env.max_heating_kw and env.max_cooling_kw must be >= 0");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("env.gamma must lie in (0, 1)");
}

namespace obs {
double scale_zone(double t_c) { return (t_c - 22.0) / 2.0; }
double unscale_zone(double v) { return 22.0 + 2.0 * v; }
double scale_outside(double t_c) { return (t_c - 10.0) / 10.0; }
double scale_solar(double w_m2) { return w_m2 / 400.0; }
}  // namespace obs

std::vector<double> noise_sequence(std::uint64_t seed, std::size_t count, double sigma) {
    std::vector<double> out(count, 0.0);
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& v : out) v = normal(rng);
    return out;
}

std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t episode_horizon(const data::Trajectory& trajectory) {
    if (trajectory.length() < kMinEpisodeSamples) {
        throw std::invalid_argument("trajectory has " + std::to_string(trajectory.length()) +
                                    " samples; an episode needs at least " +
                                    std::to_string(kMinEpisodeSamples));
    }
    return trajectory.length() - kLags - 1;
}

}  // namespace zonectl::env

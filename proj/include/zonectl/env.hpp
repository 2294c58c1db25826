#pragma once
// Zone-temperature control environment around a trained PCNN.
//
// An episode runs over one trajectory. The first kLags samples only seed the
// observation history; control starts at sample kLags (t0) and runs for
// H = length - kLags - 1 steps of 15 minutes. At step k the agent applies
// u_k, the PCNN advances with the exogenous inputs of sample t0 + k, and the
// reward is computed on the measured temperature at t0 + k + 1:
//
//   r_k = -max(L - T, 0) - max(T - U, 0) - lambda |u_k|
//
// Measurement noise N_k ~ Gaussian(0, sigma) is drawn once per episode from
// the episode seed. The measured temperature T + N_k is what the agent sees
// and what the PCNN loss terms read back, so a clairvoyant optimizer given
// the same noise sequence reproduces the episode exactly.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "zonectl/data.hpp"
#include "zonectl/pcnn.hpp"

namespace zonectl::env {

struct ComfortBounds {
    double lower = 0.0;  // degC
    double upper = 0.0;  // degC
};

/// Night (20:00-08:00): [23, 24]. Day: [21, 24] when heating, [23, 26] when
/// cooling.
ComfortBounds bounds_at(data::Timestamp t, data::Mode mode);

/// max(L - T, 0) + max(T - U, 0), in K.
double comfort_violation(double temperature, const ComfortBounds& bounds);

/// -violation - lambda |u|. Throws std::invalid_argument unless L < U.
double reward(double measured_temperature, double lower, double upper, double u_kw, double lambda);

struct ActionBounds {
    double low = 0.0;
    double high = 0.0;
};

struct EnvConfig {
    /// Reward weight in K per kW: 1 kW costs as much as 0.5 K of violation.
    double lambda = 0.5;
    double noise_sigma = 0.1;       // degC
    double max_heating_kw = 2.0;    // heating season: u in [0, max_heating_kw]
    double max_cooling_kw = 2.0;    // cooling season: u in [-max_cooling_kw, 0]
    double gamma = 0.95;            // consumed by agents

    ActionBounds action_bounds(data::Mode mode) const;
    /// Throws ConfigError when an invariant is broken.
    void validate() const;
};

inline constexpr double kDtHours = data::kStepHours;
inline constexpr std::size_t kLags = 12;
inline constexpr std::size_t kLaggedSignals = 4;  // zone, neighbour, outside, solar
/// [zone T + 12 lags, neighbour T + 12 lags, outside T + 12 lags,
///  solar + 12 lags, sin/cos month, sin/cos time of day, day of week,
///  mode flag (+1 heat / -1 cool), L, U]; lags newest first.
inline constexpr std::size_t kObservationDim = kLaggedSignals * (1 + kLags) + 5 + 1 + 2;

/// Offsets into the observation vector.
namespace obs {
inline constexpr std::size_t zone = 0;
inline constexpr std::size_t neighbour = zone + 1 + kLags;
inline constexpr std::size_t outside = neighbour + 1 + kLags;
inline constexpr std::size_t solar = outside + 1 + kLags;
inline constexpr std::size_t time = solar + 1 + kLags;
inline constexpr std::size_t mode = time + 5;
inline constexpr std::size_t lower = mode + 1;
inline constexpr std::size_t upper = lower + 1;

/// Fixed affine feature scaling: zone/neighbour temperatures and bounds as
/// (x - 22) / 2, outside temperature as (x - 10) / 10, solar as x / 400.
double scale_zone(double t_c);
double unscale_zone(double v);
double scale_outside(double t_c);
double scale_solar(double w_m2);
}  // namespace obs

/// Zero-mean Gaussian draws in degC; all zeros when sigma == 0.
std::vector<double> noise_sequence(std::uint64_t seed, std::size_t count, double sigma);

/// Noise seed of the index-th episode of a run seeded with base (splitmix64).
/// Evaluations key episodes this way so every controller sees the same noise.
std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index);

/// Minimum trajectory length for an episode: kLags history samples, t0, and
/// at least one step.
inline constexpr std::size_t kMinEpisodeSamples = kLags + 2;
std::size_t episode_horizon(const data::Trajectory& trajectory);

struct StepInfo {
    double true_temperature = 0.0;      // degC, noise-free PCNN output
    double measured_temperature = 0.0;  // degC
    double lower = 0.0;
    double upper = 0.0;
    double power_kw = 0.0;              // after clipping
    double violation = 0.0;             // K, on the measured temperature
    double energy_kwh = 0.0;            // |u| * 0.25 h
    double D = 0.0;                     // normalized
    double E = 0.0;                     // normalized
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

class Environment {
public:
    Environment(std::shared_ptr<const pcnn::PcnnModel> model, EnvConfig config);

    /// Starts an episode. The trajectory must outlive the episode. Throws
    /// std::invalid_argument if it is shorter than kMinEpisodeSamples.
    std::vector<double> reset(const data::Trajectory& trajectory, std::uint64_t seed);

    /// Clips u to the season's interval and advances one step. Throws
    /// std::logic_error after the episode has ended and NumericError for a
    /// NaN action.
    StepResult step(double u_kw);

    bool done() const { return step_ >= horizon_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t step_index() const { return step_; }
    data::Mode mode() const { return mode_; }
    ActionBounds action_bounds() const { return config_.action_bounds(mode_); }
    const EnvConfig& config() const { return config_; }
    const pcnn::PcnnModel& model() const { return *model_; }
    const pcnn::PcnnState& pcnn_state() const { return state_; }
    /// N_0 .. N_H in degC for the current episode.
    const std::vector<double>& noise() const { return noise_; }
    double measured_temperature() const;
    double true_temperature() const;
    ComfortBounds current_bounds() const;
    std::vector<double> observation() const;

private:
    std::shared_ptr<const pcnn::PcnnModel> model_;
    EnvConfig config_;
    const data::Trajectory* trajectory_ = nullptr;
    std::vector<pcnn::ExogenousStep> exo_;
    std::vector<double> noise_;
    std::vector<double> measured_history_;  // measured zone T per sample index, degC
    pcnn::PcnnState state_;
    data::Mode mode_ = data::Mode::heating;
    std::size_t horizon_ = 0;
    std::size_t step_ = 0;
};

/// One row of an episode log.
struct EpisodeLogRow {
    std::size_t step = 0;
    double reward = 0.0;
    StepInfo info;
};

/// CSV: step,true_t,measured_t,lower,upper,u,reward,D,E
void write_episode_log(const std::vector<EpisodeLogRow>& rows, const std::filesystem::path& path);

/// Comfort-violation sum (K, summed over steps) of the lambda = 0 clairvoyant
/// optimum for this episode, i.e. the violation no controller can avoid.
double unavoidable_penalty(const data::Trajectory& trajectory, std::shared_ptr<const pcnn::PcnnModel> model,
                           const EnvConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Key-value configuration files: one "key = value" per line, '#' comments.

class KeyValueConfig {
public:
    KeyValueConfig() = default;
    /// Throws ConfigError on unreadable files or malformed lines.
    static KeyValueConfig load(const std::filesystem::path& path);
    static KeyValueConfig parse(const std::string& text);

    bool contains(const std::string& key) const { return values_.contains(key); }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    /// Typed lookups; a missing key returns the fallback, a malformed value
    /// throws ConfigError.
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    /// Canonical dump, keys sorted.
    std::string dump() const;

private:
    std::map<std::string, std::string> values_;
};

/// Reads env.* keys (env.lambda, env.noise_sigma, env.max_heating_kw,
/// env.max_cooling_kw, env.gamma).
EnvConfig env_config_from(const KeyValueConfig& kv, EnvConfig defaults = {});
void env_config_to(const EnvConfig& cfg, KeyValueConfig& kv);

}  // namespace zonectl::env

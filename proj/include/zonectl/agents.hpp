#pragma once
// Controllers: TD3 (twin critics, delayed actor and target updates, target
// policy smoothing) with its replay buffer and training loop, and the two
// rule-based baselines.
//
// The actor outputs a normalized action a in [-1, 1] (tanh), mapped affinely
// onto the season's power interval. Critics see [observation, a], and all
// TD3 noise magnitudes are in these normalized units.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "zonectl/data.hpp"
#include "zonectl/env.hpp"
#include "zonectl/mlp.hpp"
#include "zonectl/optimizer.hpp"

namespace zonectl::agents {

double to_power(double normalized_action, const env::ActionBounds& bounds);
double to_normalized(double u_kw, const env::ActionBounds& bounds);

// ---------------------------------------------------------------------------
// Replay buffer

struct ReplayBatch {
    std::size_t size = 0;
    std::size_t obs_dim = 0;
    std::vector<double> obs;       // size x obs_dim
    std::vector<double> action;    // normalized
    std::vector<double> reward;
    std::vector<double> next_obs;  // size x obs_dim
    std::vector<double> done;      // 1.0 for terminal transitions, else 0.0
};

/// Ring buffer; storage grows on demand up to capacity.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t obs_dim);

    void add(std::span<const double> obs, double action, double reward, std::span<const double> next_obs,
             bool done);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t obs_dim() const { return obs_dim_; }
    std::uint64_t insertions() const { return insertions_; }

    /// Uniform sampling with replacement. Throws std::logic_error when empty.
    std::vector<std::size_t> sample_indices(std::size_t count, std::mt19937_64& rng) const;
    void gather(std::span<const std::size_t> indices, ReplayBatch& out) const;
    ReplayBatch sample(std::size_t count, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t obs_dim_;
    std::size_t size_ = 0;
    std::size_t next_ = 0;
    std::uint64_t insertions_ = 0;
    std::vector<double> obs_, next_obs_, action_, reward_, done_;
};

// ---------------------------------------------------------------------------
// TD3

struct Td3Config {
    double gamma = 0.95;
    double tau = 0.005;
    std::size_t policy_delay = 2;
    double target_noise_sigma = 0.2;
    double target_noise_clip = 0.5;
    double exploration_sigma = 0.1;
    std::size_t batch_size = 256;
    std::size_t buffer_capacity = 1000000;
    neural::MlpSpec actor{{env::kObservationDim, 64, 64, 64, 1},
                          neural::Activation::relu, neural::Activation::tanh};
    neural::MlpSpec critic{{env::kObservationDim + 1, 64, 64, 64, 1},
                           neural::Activation::relu, neural::Activation::identity};
    double learning_rate = 1e-4;

    /// Throws ConfigError on a broken invariant or inconsistent network shapes.
    void validate() const;
};

struct Td3Losses;
class Td3Agent;
Td3Losses td3_update(Td3Agent& agent, const ReplayBatch& batch, std::mt19937_64& rng);

class Td3Agent {
public:
    Td3Agent(const Td3Config& config, std::uint64_t seed);

    const Td3Config& config() const { return config_; }
    std::size_t obs_dim() const { return config_.actor.input_size(); }
    std::uint64_t update_count() const { return updates_; }

    neural::MlpParams actor, critic1, critic2;
    neural::MlpParams actor_target, critic1_target, critic2_target;
    neural::OptimizerState actor_opt, critic1_opt, critic2_opt;

private:
    friend Td3Losses td3_update(Td3Agent& agent, const ReplayBatch& batch, std::mt19937_64& rng);
    Td3Config config_;
    std::uint64_t updates_ = 0;
};

/// Deterministic actor output in [-1, 1].
double actor_output(const Td3Agent& agent, std::span<const double> obs);

/// Power in kW: the actor output mapped to bounds; with explore, Gaussian
/// noise of exploration_sigma is added to the normalized action before
/// clipping. Throws std::invalid_argument on a dimension mismatch.
double select_action(const Td3Agent& agent, std::span<const double> obs, const env::ActionBounds& bounds,
                     bool explore, std::mt19937_64& rng);

struct Td3Losses {
    double critic1 = 0.0;
    double critic2 = 0.0;
    double actor = 0.0;   // -mean Q1(s, pi(s)); valid when actor_updated
    bool actor_updated = false;
    std::vector<double> targets;
};

/// y = r + gamma (1 - done) min(Q1', Q2')(s', clip(pi'(s') + noise, -1, 1)),
/// with noise supplied per sample (already clipped to the smoothing range).
std::vector<double> td3_targets(const Td3Agent& agent, const ReplayBatch& batch,
                                std::span<const double> target_noise);

/// One TD3 step: critic regression to y, then every policy_delay-th call the
/// actor ascent on Q1 followed by Polyak updates of all three targets.
/// Throws NumericError with diagnostics when a loss becomes non-finite.
Td3Losses td3_update(Td3Agent& agent, const ReplayBatch& batch, std::mt19937_64& rng);

/// target <- tau live + (1 - tau) target. Throws std::invalid_argument on a
/// shape mismatch or tau outside [0, 1].
void polyak_update(const neural::MlpParams& live, neural::MlpParams& target, double tau);

/// Checkpoint: actor, critics and targets as MLP checkpoints plus the config.
void save_agent(const Td3Agent& agent, const std::filesystem::path& path);
Td3Agent load_agent(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Rule-based baselines

struct HysteresisState {
    bool currently_on = false;
};

/// Heating: on at full power when T < L, off once T >= L + 0.5.
/// Cooling: on at full power when T > U, off once T <= U - 0.5.
double baseline1_act(double measured_t, double lower, double upper, data::Mode mode,
                     const env::ActionBounds& bounds, HysteresisState& state);

/// Heating: on at full power when T <= L, off once T >= L + 1.
/// Cooling: on at full power when T >= U, off once T <= U - 1.
double baseline2_act(double measured_t, double lower, double upper, data::Mode mode,
                     const env::ActionBounds& bounds, HysteresisState& state);

// ---------------------------------------------------------------------------
// Episodes and training

/// A controller maps the environment (before a step) to a power command.
using Policy = std::function<double(const env::Environment&, std::span<const double> obs)>;

/// The agent must outlive the policy.
Policy td3_policy(const Td3Agent& agent);
/// Baseline policies reset their hysteresis state at step 0 of every episode.
Policy baseline1_policy();
Policy baseline2_policy();

struct EpisodeSummary {
    double reward = 0.0;             // episode return
    double energy_kwh = 0.0;
    double comfort_kh = 0.0;         // sum of violations * 0.25 h
    double violation_sum = 0.0;      // K, summed over steps
    std::size_t steps = 0;
};

/// Runs one full episode.
EpisodeSummary run_episode(env::Environment& environment, const data::Trajectory& trajectory,
                           std::uint64_t seed, const Policy& policy,
                           std::vector<env::EpisodeLogRow>* log = nullptr);

using EnvFactory = std::function<env::Environment()>;

struct TrainLoopConfig {
    std::size_t epochs = 60;
    std::size_t steps_per_epoch = 5000;
    /// Uniformly random actions before the first update.
    std::size_t warmup_steps = 5000;
    std::size_t updates_per_step = 1;
    std::uint64_t seed = 1;
    /// Evaluation episode i uses env::episode_seed(eval_seed, i).
    std::uint64_t eval_seed = 12345;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::uint64_t env_steps = 0;
    double mean_reward = 0.0;
    double median_reward = 0.0;
    double min_reward = 0.0;
    double max_reward = 0.0;
    double energy_kwh = 0.0;   // mean per evaluation episode
    double comfort_kh = 0.0;   // mean per evaluation episode
    double critic_loss = 0.0;  // mean over the epoch's updates
};

struct TrainLoopResult {
    std::vector<EpochRecord> log;
    neural::MlpParams best_actor;
    double best_reward = 0.0;
    std::size_t best_epoch = 0;
};

/// Evaluation statistics of a deterministic policy on a fixed list.
EpochRecord evaluate_policy(env::Environment& environment, const std::vector<data::Trajectory>& trajectories,
                            std::uint64_t eval_seed, const Policy& policy);

/// Interleaves exploratory environment steps with updates. Epoch boundaries
/// fall every steps_per_epoch environment steps, independent of episode
/// ends; after each epoch the greedy actor is evaluated on eval_set and the
/// best one kept. Episodes cut by the trajectory end are stored as
/// non-terminal (time limit, not a true terminal state).
TrainLoopResult train_loop(const EnvFactory& factory, Td3Agent& agent,
                           const std::vector<data::Trajectory>& train_pool,
                           const std::vector<data::Trajectory>& eval_set, const TrainLoopConfig& config,
                           const std::function<void(const EpochRecord&)>& on_epoch = {});

/// CSV: epoch,env_steps,mean_reward,median_reward,min_reward,max_reward,energy_kwh,comfort_kh,critic_loss
void write_convergence_log(const std::vector<EpochRecord>& log, const std::filesystem::path& path);

}  // namespace zonectl::agents

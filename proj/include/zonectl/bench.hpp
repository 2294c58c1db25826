#pragma once
// Experiment harness: configuration, paired evaluation of controllers against
// the clairvoyant oracle, seed and lambda sweeps, and the command layer shared
// by the CLI and the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zonectl/agents.hpp"
#include "zonectl/data.hpp"
#include "zonectl/env.hpp"
#include "zonectl/pcnn.hpp"

namespace zonectl::bench {

// ---------------------------------------------------------------------------
// Configuration

struct BenchConfig {
    // data
    int days = 365;
    std::uint64_t data_seed = 7;
    double validation_fraction = 0.2;
    // models and environment
    pcnn::PcnnTrainConfig pcnn;
    env::EnvConfig env;
    agents::Td3Config td3;
    agents::TrainLoopConfig train;
    // evaluation
    std::size_t eval_trajectories = 200;        // 0 = the whole validation set
    std::size_t epoch_eval_trajectories = 50;
    std::uint64_t eval_seed = 12345;
    // sweeps
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<double> lambda_factors = {4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.0625};
    std::size_t lambda_sweep_epochs = 40;
    // execution
    std::size_t threads = 1;

    static BenchConfig desk_scale();
    static BenchConfig full_scale();
    /// Throws ConfigError on a broken invariant.
    void validate() const;
};

/// Overrides defaults with the keys present in kv. Unknown keys throw
/// ConfigError so typos do not pass silently.
BenchConfig bench_config_from(const env::KeyValueConfig& kv, BenchConfig defaults);
/// Every key, fully resolved.
env::KeyValueConfig bench_config_to(const BenchConfig& config);

// ---------------------------------------------------------------------------
// Evaluation

enum class Controller { oracle, baseline1, baseline2, agent };
std::string to_string(Controller c);

/// One (controller, trajectory) evaluation; the single source of truth for
/// every aggregate statistic.
struct TrajectoryRow {
    std::size_t trajectory = 0;  // index into the evaluated list
    std::string start;           // first timestamp
    char mode = 'H';
    std::uint64_t seed = 0;
    Controller controller = Controller::oracle;
    double reward = 0.0;           // episode return
    double energy_kwh = 0.0;
    double comfort_kh = 0.0;
    double unavoidable_k = 0.0;    // lambda = 0 oracle violation sum, K
    double reward_adjusted = 0.0;  // reward + unavoidable_k
    double comfort_adjusted = 0.0; // comfort_kh - unavoidable_k * 0.25 h
};

struct EvalMetrics {
    Controller controller = Controller::oracle;
    std::size_t n_trajectories = 0;
    double mean_reward = 0.0;      // adjusted
    double median_reward = 0.0;    // adjusted
    double energy_kwh = 0.0;       // mean per trajectory
    double comfort_kh = 0.0;       // mean per trajectory, adjusted
    double gap_to_optimal = 0.0;   // oracle mean reward - mean reward
};

struct EvaluationReport {
    std::vector<TrajectoryRow> rows;
    std::vector<EvalMetrics> metrics;  // in the order the controllers were requested
    const EvalMetrics& at(Controller c) const;
};

struct EvaluationRequest {
    std::vector<Controller> controllers;  // the oracle is added when missing
    const agents::Td3Agent* agent = nullptr;
    bool subtract_unavoidable = true;
    /// Precomputed unavoidable penalties per trajectory (they do not depend
    /// on lambda); computed on the fly when null.
    const std::vector<double>* unavoidable = nullptr;
    std::uint64_t eval_seed = 12345;
    std::size_t threads = 1;
};

/// Evaluates every controller on identical (trajectory, noise seed) pairs;
/// trajectory i uses env::episode_seed(eval_seed, i).
EvaluationReport evaluate(const std::vector<data::Trajectory>& trajectories,
                          std::shared_ptr<const pcnn::PcnnModel> model, const env::EnvConfig& env_config,
                          const EvaluationRequest& request);

/// Unavoidable penalty of every trajectory, using the evaluation seeds.
std::vector<double> unavoidable_penalties(const std::vector<data::Trajectory>& trajectories,
                                          std::shared_ptr<const pcnn::PcnnModel> model,
                                          const env::EnvConfig& env_config, std::uint64_t eval_seed,
                                          std::size_t threads);

/// Aggregates recomputed from rows alone.
std::vector<EvalMetrics> aggregate(const std::vector<TrajectoryRow>& rows, const std::vector<Controller>& order);

void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::filesystem::path& path);
nlohmann::json metrics_to_json(const std::vector<EvalMetrics>& metrics);

/// Runs fn(i) for i in [0, n) on up to threads workers. Results must be
/// written by index; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Sweeps

struct SeedRun {
    std::uint64_t seed = 0;
    agents::TrainLoopResult result;
};

struct SeedSweepResult {
    std::vector<SeedRun> runs;
    /// Per-epoch median over seeds of the mean evaluation reward.
    std::vector<double> median_curve;
    /// Index into runs of the seed whose best reward is the median.
    std::size_t median_run = 0;
};

SeedSweepResult seed_sweep(const std::vector<data::Trajectory>& train_pool,
                           const std::vector<data::Trajectory>& epoch_eval_set,
                           std::shared_ptr<const pcnn::PcnnModel> model, const BenchConfig& config,
                           const std::function<void(std::uint64_t seed, const agents::EpochRecord&)>& on_epoch = {});

struct ParetoPoint {
    double factor = 1.0;
    double lambda = 0.0;
    Controller controller = Controller::oracle;
    double energy_kwh = 0.0;    // mean per trajectory
    double comfort_kh = 0.0;    // mean per trajectory, adjusted
    double mean_reward = 0.0;   // adjusted
};

struct LambdaSweepResult {
    std::vector<ParetoPoint> points;  // ordered by factor as given, oracle first
    /// Oracle energy non-decreasing and comfort non-increasing as the factor
    /// decreases, within tolerance.
    bool oracle_monotone = false;
    std::vector<std::string> monotonicity_violations;
};

struct LambdaSweepOptions {
    bool train_agents = true;
    std::uint64_t agent_seed = 1;
    /// Slack for the monotonicity checks, absolute.
    double tolerance = 1e-6;
};

LambdaSweepResult lambda_sweep(const std::vector<data::Trajectory>& train_pool,
                               const std::vector<data::Trajectory>& epoch_eval_set,
                               const std::vector<data::Trajectory>& eval_set,
                               std::shared_ptr<const pcnn::PcnnModel> model, const BenchConfig& config,
                               const LambdaSweepOptions& options);

void write_pareto_csv(const std::vector<ParetoPoint>& points, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Commands (the CLI is a thin wrapper around these). Each writes its outputs
// plus the resolved configuration (config.resolved) into out_dir.

struct Inputs {
    std::optional<std::filesystem::path> data_csv;   // generated from the config when absent
    std::optional<std::filesystem::path> pcnn_model; // trained from the config when absent
    std::optional<std::filesystem::path> agent;      // TD3 checkpoint
};

/// The dataset, split and selected evaluation lists used by every command.
struct Workspace {
    std::vector<data::RawRecord> records;
    data::DatasetSplit split;
    std::vector<data::Trajectory> eval_set;        // eval_trajectories evenly spaced
    std::vector<data::Trajectory> epoch_eval_set;  // epoch_eval_trajectories evenly spaced
    std::shared_ptr<const pcnn::PcnnModel> model;
};

/// Loads or generates the data; loads or trains the PCNN (saved to
/// out_dir/pcnn.json when trained here).
Workspace prepare(const BenchConfig& config, const Inputs& inputs, const std::filesystem::path& out_dir,
                  bool need_model = true);

void cmd_generate_data(const BenchConfig& config, const std::filesystem::path& out_csv);
void cmd_train_pcnn(const BenchConfig& config, const Inputs& inputs, const std::filesystem::path& out_dir);
void cmd_train_agent(const BenchConfig& config, const Inputs& inputs, std::uint64_t seed,
                     const std::filesystem::path& out_dir);
EvaluationReport cmd_evaluate(const BenchConfig& config, const Inputs& inputs, const std::filesystem::path& out_dir);
SeedSweepResult cmd_seed_sweep(const BenchConfig& config, const Inputs& inputs, const std::filesystem::path& out_dir);
LambdaSweepResult cmd_lambda_sweep(const BenchConfig& config, const Inputs& inputs,
                                   const std::filesystem::path& out_dir, const LambdaSweepOptions& options);
/// Solves one validation trajectory (index into the evaluation list).
void cmd_oracle(const BenchConfig& config, const Inputs& inputs, std::size_t trajectory,
                const std::filesystem::path& out_dir, bool dump_lp);

/// Logging hook for long-running commands; defaults to stderr.
void set_progress_sink(std::function<void(const std::string&)> sink);
void progress(const std::string& message);

}  // namespace zonectl::bench

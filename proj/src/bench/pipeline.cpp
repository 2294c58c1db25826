#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include "zonectl/bench.hpp"
#include "zonectl/checkpoint.hpp"
#include "zonectl/error.hpp"
#include "zonectl/oracle.hpp"

namespace zonectl::bench {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Progress

namespace {

std::mutex progress_mutex;
std::function<void(const std::string&)>& sink() {
    static std::function<void(const std::string&)> s = [](const std::string& m) { std::cerr << m << '\n'; };
    return s;
}

}  // namespace

void set_progress_sink(std::function<void(const std::string&)> s) {
    std::lock_guard lock(progress_mutex);
    sink() = std::move(s);
}

void progress(const std::string& message) {
    std::lock_guard lock(progress_mutex);
    if (sink()) sink()(message);
}

// ---------------------------------------------------------------------------
// Configuration

BenchConfig BenchConfig::desk_scale() {
    BenchConfig c;
    c.pcnn.epochs = 20;
    c.train.epochs = 60;
    c.eval_trajectories = 200;
    c.seeds = {1, 2, 3};
    c.lambda_sweep_epochs = 40;
    return c;
}

BenchConfig BenchConfig::full_scale() {
    BenchConfig c;
    c.pcnn.epochs = 40;
    c.train.epochs = 100;
    c.eval_trajectories = 0;
    c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    c.lambda_sweep_epochs = 100;
    return c;
}

void BenchConfig::validate() const {
    if (days < 3) throw ConfigError("data.days must be >= 3");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("data.validation_fraction must lie in (0, 1)");
    }
    if (pcnn.horizon < 1) throw ConfigError("pcnn.horizon must be >= 1");
    if (pcnn.batch_size < 1) throw ConfigError("pcnn.batch_size must be >= 1");
    if (pcnn.window_stride < 1) throw ConfigError("pcnn.window_stride must be >= 1");
    if (!(pcnn.learning_rate > 0.0) || !(pcnn.phys_learning_rate > 0.0)) {
        throw ConfigError("pcnn learning rates must be > 0");
    }
    env.validate();
    td3.validate();
    if (train.steps_per_epoch < 1) throw ConfigError("train.steps_per_epoch must be >= 1");
    if (train.updates_per_step < 1) throw ConfigError("train.updates_per_step must be >= 1");
    if (epoch_eval_trajectories < 1) throw ConfigError("eval.epoch_trajectories must be >= 1");
    if (seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("sweep.seeds must be distinct");
    }
    if (lambda_factors.empty()) throw ConfigError("sweep.lambda_factors must not be empty");
    for (double f : lambda_factors) {
        if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("sweep.lambda_factors must be positive");
    }
    if (threads < 1) throw ConfigError("run.threads must be >= 1");
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "data.days", "data.seed", "data.validation_fraction",
        "pcnn.epochs", "pcnn.horizon", "pcnn.batch_size", "pcnn.window_stride", "pcnn.learning_rate",
        "pcnn.phys_learning_rate", "pcnn.grad_clip", "pcnn.seed", "pcnn.hidden",
        "pcnn.init_a", "pcnn.init_b", "pcnn.init_c", "pcnn.init_d",
        "env.lambda", "env.noise_sigma", "env.max_heating_kw", "env.max_cooling_kw", "env.gamma",
        "td3.tau", "td3.policy_delay", "td3.target_noise_sigma", "td3.target_noise_clip",
        "td3.exploration_sigma", "td3.batch_size", "td3.buffer_capacity", "td3.learning_rate", "td3.hidden",
        "train.epochs", "train.steps_per_epoch", "train.warmup_steps", "train.updates_per_step",
        "eval.trajectories", "eval.epoch_trajectories", "eval.seed",
        "sweep.seeds", "sweep.lambda_factors", "sweep.lambda_epochs",
        "run.threads",
    };
    return keys;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a == std::string::npos) continue;
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

template <class T, class Parse>
std::vector<T> get_list(const env::KeyValueConfig& kv, const std::string& key, std::vector<T> fallback,
                        Parse parse) {
    if (!kv.contains(key)) return fallback;
    std::vector<T> out;
    for (const auto& item : split_list(kv.get_string(key, ""))) {
        try {
            std::size_t used = 0;
            T v = parse(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(key + ": cannot parse list item '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::size_t get_size(const env::KeyValueConfig& kv, const std::string& key, std::size_t fallback) {
    const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError(key + " must be >= 0");
    return static_cast<std::size_t>(v);
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ',';
        if constexpr (std::is_floating_point_v<T>) {
            out += data::format_number(v[i]);
        } else {
            out += std::to_string(v[i]);
        }
    }
    return out;
}

std::vector<std::size_t> hidden_of(const neural::MlpSpec& spec) {
    return {spec.layer_sizes.begin() + 1, spec.layer_sizes.end() - 1};
}

}  // namespace

BenchConfig bench_config_from(const env::KeyValueConfig& kv, BenchConfig c) {
    for (const auto& [key, value] : kv.values()) {
        if (!known_keys().contains(key)) throw ConfigError("unknown configuration key '" + key + "'");
    }
    c.days = static_cast<int>(kv.get_int("data.days", c.days));
    c.data_seed = static_cast<std::uint64_t>(kv.get_int("data.seed", static_cast<std::int64_t>(c.data_seed)));
    c.validation_fraction = kv.get_double("data.validation_fraction", c.validation_fraction);

    c.pcnn.epochs = get_size(kv, "pcnn.epochs", c.pcnn.epochs);
    c.pcnn.horizon = get_size(kv, "pcnn.horizon", c.pcnn.horizon);
    c.pcnn.batch_size = get_size(kv, "pcnn.batch_size", c.pcnn.batch_size);
    c.pcnn.window_stride = get_size(kv, "pcnn.window_stride", c.pcnn.window_stride);
    c.pcnn.learning_rate = kv.get_double("pcnn.learning_rate", c.pcnn.learning_rate);
    c.pcnn.phys_learning_rate = kv.get_double("pcnn.phys_learning_rate", c.pcnn.phys_learning_rate);
    c.pcnn.grad_clip = kv.get_double("pcnn.grad_clip", c.pcnn.grad_clip);
    c.pcnn.seed = static_cast<std::uint64_t>(kv.get_int("pcnn.seed", static_cast<std::int64_t>(c.pcnn.seed)));
    c.pcnn.model.hidden = get_list<std::size_t>(kv, "pcnn.hidden", c.pcnn.model.hidden,
                                                [](const std::string& s, std::size_t* n) { return std::stoul(s, n); });
    c.pcnn.model.a = kv.get_double("pcnn.init_a", c.pcnn.model.a);
    c.pcnn.model.b = kv.get_double("pcnn.init_b", c.pcnn.model.b);
    c.pcnn.model.c = kv.get_double("pcnn.init_c", c.pcnn.model.c);
    c.pcnn.model.d = kv.get_double("pcnn.init_d", c.pcnn.model.d);

    c.env = env::env_config_from(kv, c.env);
    c.td3.gamma = c.env.gamma;
    c.td3.tau = kv.get_double("td3.tau", c.td3.tau);
    c.td3.policy_delay = get_size(kv, "td3.policy_delay", c.td3.policy_delay);
    c.td3.target_noise_sigma = kv.get_double("td3.target_noise_sigma", c.td3.target_noise_sigma);
    c.td3.target_noise_clip = kv.get_double("td3.target_noise_clip", c.td3.target_noise_clip);
    c.td3.exploration_sigma = kv.get_double("td3.exploration_sigma", c.td3.exploration_sigma);
    c.td3.batch_size = get_size(kv, "td3.batch_size", c.td3.batch_size);
    c.td3.buffer_capacity = get_size(kv, "td3.buffer_capacity", c.td3.buffer_capacity);
    c.td3.learning_rate = kv.get_double("td3.learning_rate", c.td3.learning_rate);
    if (kv.contains("td3.hidden")) {
        const auto hidden = get_list<std::size_t>(kv, "td3.hidden", {},
                                                  [](const std::string& s, std::size_t* n) { return std::stoul(s, n); });
        auto sizes = [&](std::size_t in) {
            std::vector<std::size_t> v{in};
            v.insert(v.end(), hidden.begin(), hidden.end());
            v.push_back(1);
            return v;
        };
        c.td3.actor.layer_sizes = sizes(c.td3.actor.input_size());
        c.td3.critic.layer_sizes = sizes(c.td3.critic.input_size());
    }

    c.train.epochs = get_size(kv, "train.epochs", c.train.epochs);
    c.train.steps_per_epoch = get_size(kv, "train.steps_per_epoch", c.train.steps_per_epoch);
    c.train.warmup_steps = get_size(kv, "train.warmup_steps", c.train.warmup_steps);
    c.train.updates_per_step = get_size(kv, "train.updates_per_step", c.train.updates_per_step);

    c.eval_trajectories = get_size(kv, "eval.trajectories", c.eval_trajectories);
    c.epoch_eval_trajectories = get_size(kv, "eval.epoch_trajectories", c.epoch_eval_trajectories);
    c.eval_seed = static_cast<std::uint64_t>(kv.get_int("eval.seed", static_cast<std::int64_t>(c.eval_seed)));
    c.train.eval_seed = c.eval_seed;

    c.seeds = get_list<std::uint64_t>(kv, "sweep.seeds", c.seeds,
                                      [](const std::string& s, std::size_t* n) { return std::stoull(s, n); });
    c.lambda_factors = get_list<double>(kv, "sweep.lambda_factors", c.lambda_factors,
                                        [](const std::string& s, std::size_t* n) { return std::stod(s, n); });
    c.lambda_sweep_epochs = get_size(kv, "sweep.lambda_epochs", c.lambda_sweep_epochs);
    c.threads = get_size(kv, "run.threads", c.threads);
    c.validate();
    return c;
}

env::KeyValueConfig bench_config_to(const BenchConfig& c) {
    env::KeyValueConfig kv;
    auto num = [](double v) { return data::format_number(v); };
    kv.set("data.days", std::to_string(c.days));
    kv.set("data.seed", std::to_string(c.data_seed));
    kv.set("data.validation_fraction", num(c.validation_fraction));
    kv.set("pcnn.epochs", std::to_string(c.pcnn.epochs));
    kv.set("pcnn.horizon", std::to_string(c.pcnn.horizon));
    kv.set("pcnn.batch_size", std::to_string(c.pcnn.batch_size));
    kv.set("pcnn.window_stride", std::to_string(c.pcnn.window_stride));
    kv.set("pcnn.learning_rate", num(c.pcnn.learning_rate));
    kv.set("pcnn.phys_learning_rate", num(c.pcnn.phys_learning_rate));
    kv.set("pcnn.grad_clip", num(c.pcnn.grad_clip));
    kv.set("pcnn.seed", std::to_string(c.pcnn.seed));
    kv.set("pcnn.hidden", join(c.pcnn.model.hidden));
    kv.set("pcnn.init_a", num(c.pcnn.model.a));
    kv.set("pcnn.init_b", num(c.pcnn.model.b));
    kv.set("pcnn.init_c", num(c.pcnn.model.c));
    kv.set("pcnn.init_d", num(c.pcnn.model.d));
    env::env_config_to(c.env, kv);
    kv.set("td3.tau", num(c.td3.tau));
    kv.set("td3.policy_delay", std::to_string(c.td3.policy_delay));
    kv.set("td3.target_noise_sigma", num(c.td3.target_noise_sigma));
    kv.set("td3.target_noise_clip", num(c.td3.target_noise_clip));
    kv.set("td3.exploration_sigma", num(c.td3.exploration_sigma));
    kv.set("td3.batch_size", std::to_string(c.td3.batch_size));
    kv.set("td3.buffer_capacity", std::to_string(c.td3.buffer_capacity));
    kv.set("td3.learning_rate", num(c.td3.learning_rate));
    kv.set("td3.hidden", join(hidden_of(c.td3.actor)));
    kv.set("train.epochs", std::to_string(c.train.epochs));
    kv.set("train.steps_per_epoch", std::to_string(c.train.steps_per_epoch));
    kv.set("train.warmup_steps", std::to_string(c.train.warmup_steps));
    kv.set("train.updates_per_step", std::to_string(c.train.updates_per_step));
    kv.set("eval.trajectories", std::to_string(c.eval_trajectories));
    kv.set("eval.epoch_trajectories", std::to_string(c.epoch_eval_trajectories));
    kv.set("eval.seed", std::to_string(c.eval_seed));
    kv.set("sweep.seeds", join(c.seeds));
    kv.set("sweep.lambda_factors", join(c.lambda_factors));
    kv.set("sweep.lambda_epochs", std::to_string(c.lambda_sweep_epochs));
    kv.set("run.threads", std::to_string(c.threads));
    return kv;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void echo_config(const BenchConfig& config, const fs::path& out_dir) {
    write_text(out_dir / "config.resolved", bench_config_to(config).dump());
}

std::vector<data::Trajectory> pick(const std::vector<data::Trajectory>& pool, std::size_t count) {
    std::vector<data::Trajectory> out;
    for (auto i : data::evenly_spaced(pool.size(), count == 0 ? pool.size() : count)) out.push_back(pool[i]);
    return out;
}

std::unique_ptr<agents::Td3Agent> load_agent_input(const Inputs& inputs) {
    if (!inputs.agent) return nullptr;
    if (!fs::exists(*inputs.agent)) throw ConfigError("agent checkpoint not found: " + inputs.agent->string());
    return std::make_unique<agents::Td3Agent>(agents::load_agent(*inputs.agent));
}

void write_pcnn_log(const std::vector<pcnn::PcnnEpochLog>& log, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,train_mse,validation_mse\n";
    for (const auto& l : log) {
        out << l.epoch << ',' << data::format_number(l.train_mse) << ',' << data::format_number(l.validation_mse)
            << '\n';
    }
}

}  // namespace

Workspace prepare(const BenchConfig& config, const Inputs& inputs, const fs::path& out_dir, bool need_model) {
    config.validate();
    Workspace ws;
    if (inputs.data_csv) {
        if (!fs::exists(*inputs.data_csv)) throw ConfigError("data file not found: " + inputs.data_csv->string());
        auto csv = data::load_csv(*inputs.data_csv);
        ws.records = std::move(csv.records);
    } else {
        data::GeneratorConfig g;
        g.days = config.days;
        g.seed = config.data_seed;
        ws.records = data::generate_synthetic(g);
    }
    data::SplitConfig sc;
    sc.validation_fraction = config.validation_fraction;
    ws.split = data::split_dataset(ws.records, sc);
    if (ws.split.train.empty() || ws.split.validation.empty()) {
        throw ConfigError("dataset too small: no training or validation trajectories");
    }
    ws.eval_set = pick(ws.split.validation, config.eval_trajectories);
    ws.epoch_eval_set = pick(ws.split.validation, config.epoch_eval_trajectories);
    if (!need_model) return ws;

    if (inputs.pcnn_model) {
        if (!fs::exists(*inputs.pcnn_model)) {
            throw ConfigError("PCNN checkpoint not found: " + inputs.pcnn_model->string());
        }
        ws.model = std::make_shared<const pcnn::PcnnModel>(pcnn::load_model(*inputs.pcnn_model));
    } else {
        progress("training PCNN (" + std::to_string(config.pcnn.epochs) + " epochs)");
        auto res = pcnn::pcnn_train(ws.split.train, ws.split.validation, config.pcnn);
        ensure_dir(out_dir);
        pcnn::save_model(res.model, out_dir / "pcnn.json");
        write_pcnn_log(res.log, out_dir / "pcnn_log.csv");
        ws.model = std::make_shared<const pcnn::PcnnModel>(std::move(res.model));
    }
    return ws;
}

void cmd_generate_data(const BenchConfig& config, const fs::path& out_csv) {
    config.validate();
    data::GeneratorConfig g;
    g.days = config.days;
    g.seed = config.data_seed;
    if (out_csv.has_parent_path()) ensure_dir(out_csv.parent_path());
    data::write_csv(data::generate_synthetic(g), out_csv);
}

void cmd_train_pcnn(const BenchConfig& config, const Inputs& inputs, const fs::path& out_dir) {
    ensure_dir(out_dir);
    echo_config(config, out_dir);
    Inputs fresh = inputs;
    fresh.pcnn_model.reset();
    const auto ws = prepare(config, fresh, out_dir);
    nlohmann::json j;
    j["format"] = "zonectl-pcnn-metrics";
    j["version"] = 1;
    j["validation_multistep_mse"] =
        pcnn::pcnn_multistep_mse(*ws.model, ws.split.validation, config.pcnn.horizon, config.pcnn.window_stride);
    j["validation_one_step_mse_c2"] = pcnn::pcnn_one_step_mse(*ws.model, ws.split.validation);
    j["a"] = ws.model->phys.a();
    j["b"] = ws.model->phys.b();
    j["c"] = ws.model->phys.c();
    j["d"] = ws.model->phys.d();
    j["train_trajectories"] = ws.split.train.size();
    j["validation_trajectories"] = ws.split.validation.size();
    neural::write_json_file(j, out_dir / "pcnn_metrics.json");
}

void cmd_train_agent(const BenchConfig& config, const Inputs& inputs, std::uint64_t seed, const fs::path& out_dir) {
    ensure_dir(out_dir);
    echo_config(config, out_dir);
    const auto ws = prepare(config, inputs, out_dir);
    agents::Td3Agent agent(config.td3, seed);
    agents::TrainLoopConfig loop = config.train;
    loop.seed = seed;
    const auto model = ws.model;
    const env::EnvConfig env_config = config.env;
    auto factory = [&] { return env::Environment(model, env_config); };
    const auto res = agents::train_loop(factory, agent, ws.split.train, ws.epoch_eval_set, loop,
                                        [&](const agents::EpochRecord& r) {
                                            progress("seed " + std::to_string(seed) + " epoch " +
                                                     std::to_string(r.epoch) + " mean reward " +
                                                     data::format_number(r.mean_reward));
                                        });
    agents::write_convergence_log(res.log, out_dir / "convergence.csv");
    agents::save_agent(agent, out_dir / "agent_final.json");
    agent.actor = res.best_actor;
    agents::save_agent(agent, out_dir / "agent.json");
    nlohmann::json j;
    j["format"] = "zonectl-train-metrics";
    j["version"] = 1;
    j["seed"] = seed;
    j["best_epoch"] = res.best_epoch;
    j["best_reward"] = res.best_reward;
    neural::write_json_file(j, out_dir / "train_metrics.json");
}

EvaluationReport cmd_evaluate(const BenchConfig& config, const Inputs& inputs, const fs::path& out_dir) {
    ensure_dir(out_dir);
    echo_config(config, out_dir);
    const auto ws = prepare(config, inputs, out_dir);
    const auto agent = load_agent_input(inputs);
    EvaluationRequest req;
    req.controllers = {Controller::oracle, Controller::baseline1, Controller::baseline2};
    if (agent) {
        req.controllers.push_back(Controller::agent);
        req.agent = agent.get();
    }
    req.eval_seed = config.eval_seed;
    req.threads = config.threads;
    progress("evaluating " + std::to_string(ws.eval_set.size()) + " trajectories");
    auto report = evaluate(ws.eval_set, ws.model, config.env, req);
    write_trajectory_csv(report.rows, out_dir / "trajectories.csv");
    nlohmann::json j;
    j["format"] = "zonectl-metrics";
    j["version"] = 1;
    j["eval_seed"] = config.eval_seed;
    j["lambda"] = config.env.lambda;
    j["n_trajectories"] = ws.eval_set.size();
    j["unavoidable_subtracted"] = req.subtract_unavoidable;
    j["controllers"] = metrics_to_json(report.metrics);
    neural::write_json_file(j, out_dir / "metrics.json");
    return report;
}

SeedSweepResult cmd_seed_sweep(const BenchConfig& config, const Inputs& inputs, const fs::path& out_dir) {
    ensure_dir(out_dir);
    echo_config(config, out_dir);
    const auto ws = prepare(config, inputs, out_dir);
    auto res = seed_sweep(ws.split.train, ws.epoch_eval_set, ws.model, config,
                          [](std::uint64_t seed, const agents::EpochRecord& r) {
                              progress("seed " + std::to_string(seed) + " epoch " + std::to_string(r.epoch) +
                                       " mean reward " + data::format_number(r.mean_reward));
                          });

    nlohmann::json summary;
    summary["format"] = "zonectl-seed-sweep";
    summary["version"] = 1;
    summary["seeds"] = config.seeds;
    summary["median_seed"] = res.runs[res.median_run].seed;
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : res.runs) {
        const fs::path dir = out_dir / ("seed_" + std::to_string(run.seed));
        ensure_dir(dir);
        agents::write_convergence_log(run.result.log, dir / "convergence.csv");
        agents::Td3Agent agent(config.td3, run.seed);
        agent.actor = run.result.best_actor;
        agents::save_agent(agent, dir / "agent.json");
        runs.push_back({{"seed", run.seed}, {"best_epoch", run.result.best_epoch},
                        {"best_reward", run.result.best_reward}});
    }
    summary["runs"] = runs;

    std::ofstream curves(out_dir / "curves.csv");
    if (!curves) throw std::runtime_error("cannot write curves.csv");
    curves << "epoch";
    for (const auto& run : res.runs) curves << ",seed_" << run.seed;
    curves << ",median\n";
    for (std::size_t e = 0; e < res.median_curve.size(); ++e) {
        curves << e + 1;
        for (const auto& run : res.runs) curves << ',' << data::format_number(run.result.log[e].mean_reward);
        curves << ',' << data::format_number(res.median_curve[e]) << '\n';
    }

    // Baselines on the same epoch-evaluation list, for the "above both
    // baselines" count.
    env::Environment environment(ws.model, config.env);
    const double b1 =
        agents::evaluate_policy(environment, ws.epoch_eval_set, config.eval_seed, agents::baseline1_policy()).mean_reward;
    const double b2 =
        agents::evaluate_policy(environment, ws.epoch_eval_set, config.eval_seed, agents::baseline2_policy()).mean_reward;
    std::size_t above = 0;
    for (const auto& run : res.runs) above += run.result.best_reward > std::max(b1, b2) ? 1 : 0;
    summary["baseline1_reward"] = b1;
    summary["baseline2_reward"] = b2;
    summary["seeds_above_both_baselines"] = above;
    neural::write_json_file(summary, out_dir / "sweep_metrics.json");
    return res;
}

LambdaSweepResult cmd_lambda_sweep(const BenchConfig& config, const Inputs& inputs, const fs::path& out_dir,
                                   const LambdaSweepOptions& options) {
    ensure_dir(out_dir);
    echo_config(config, out_dir);
    const auto ws = prepare(config, inputs, out_dir);
    auto res = lambda_sweep(ws.split.train, ws.epoch_eval_set, ws.eval_set, ws.model, config, options);
    write_pareto_csv(res.points, out_dir / "pareto.csv");
    nlohmann::json j;
    j["format"] = "zonectl-lambda-sweep";
    j["version"] = 1;
    j["base_lambda"] = config.env.lambda;
    j["factors"] = config.lambda_factors;
    j["agents_trained"] = options.train_agents;
    j["agent_seed"] = options.agent_seed;
    j["oracle_monotone"] = res.oracle_monotone;
    j["monotonicity_violations"] = res.monotonicity_violations;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : res.points) {
        pts.push_back({{"factor", p.factor}, {"lambda", p.lambda}, {"controller", to_string(p.controller)},
                       {"energy_kwh", p.energy_kwh}, {"comfort_kh", p.comfort_kh}, {"mean_reward", p.mean_reward}});
    }
    j["points"] = pts;
    neural::write_json_file(j, out_dir / "sweep_metrics.json");
    return res;
}

void cmd_oracle(const BenchConfig& config, const Inputs& inputs, std::size_t trajectory, const fs::path& out_dir,
                bool dump_lp) {
    ensure_dir(out_dir);
    echo_config(config, out_dir);
    const auto ws = prepare(config, inputs, out_dir);
    if (trajectory >= ws.eval_set.size()) {
        throw ConfigError("trajectory index " + std::to_string(trajectory) + " out of range (" +
                          std::to_string(ws.eval_set.size()) + " evaluation trajectories)");
    }
    const auto& traj = ws.eval_set[trajectory];
    const std::uint64_t seed = env::episode_seed(config.eval_seed, trajectory);
    const auto res = oracle::oracle_rollout(traj, ws.model, config.env, seed);
    if (dump_lp) {
        const auto input = oracle::oracle_input(traj, *ws.model, config.env, seed);
        oracle::dump_lp(oracle::build_lp(input), out_dir / "oracle.lp");
    }
    env::write_episode_log(res.log, out_dir / "oracle_episode.csv");
    nlohmann::json j;
    j["format"] = "zonectl-oracle";
    j["version"] = 1;
    j["trajectory"] = trajectory;
    j["start"] = data::format_timestamp(traj.records.front().timestamp);
    j["seed"] = seed;
    j["status"] = oracle::to_string(res.status);
    j["iterations"] = res.iterations;
    j["lp_objective"] = res.lp_objective;
    j["replay_return"] = res.replay_return;
    j["duality_gap"] = std::abs(res.lp_objective + res.replay_return);
    j["primal_residual"] = res.primal_residual;
    j["energy_kwh"] = res.energy_kwh;
    j["comfort_kh"] = res.comfort_violation * env::kDtHours;
    j["controls"] = res.controls;
    neural::write_json_file(j, out_dir / "oracle.json");
}

}  // namespace zonectl::bench

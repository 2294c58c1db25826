#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "zonectl/bench.hpp"
#include "zonectl/oracle.hpp"

namespace zonectl::bench {

std::string to_string(Controller c) {
    switch (c) {
        case Controller::oracle: return "oracle";
        case Controller::baseline1: return "baseline1";
        case Controller::baseline2: return "baseline2";
        case Controller::agent: return "agent";
    }
    return "unknown";
}

const EvalMetrics& EvaluationReport::at(Controller c) const {
    for (const auto& m : metrics) {
        if (m.controller == c) return m;
    }
    throw std::out_of_range("EvaluationReport: controller " + to_string(c) + " was not evaluated");
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load()) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

EvaluationReport evaluate(const std::vector<data::Trajectory>& trajectories,
                          std::shared_ptr<const pcnn::PcnnModel> model, const env::EnvConfig& env_config,
                          const EvaluationRequest& request) {
    if (trajectories.empty()) throw std::invalid_argument("evaluate: no trajectories");
    std::vector<Controller> controllers = request.controllers;
    if (std::find(controllers.begin(), controllers.end(), Controller::oracle) == controllers.end()) {
        controllers.insert(controllers.begin(), Controller::oracle);
    }
    for (auto c : controllers) {
        if (c == Controller::agent && request.agent == nullptr) {
            throw std::invalid_argument("evaluate: agent requested without a checkpoint");
        }
    }

    const std::size_t nc = controllers.size();
    std::vector<TrajectoryRow> rows(trajectories.size() * nc);
    parallel_for(trajectories.size(), request.threads, [&](std::size_t i) {
        const auto& traj = trajectories[i];
        const std::uint64_t seed = env::episode_seed(request.eval_seed, i);
        double unavoidable = 0.0;
        if (request.subtract_unavoidable) {
            unavoidable = request.unavoidable != nullptr ? request.unavoidable->at(i)
                                                         : env::unavoidable_penalty(traj, model, env_config, seed);
        }
        env::Environment environment(model, env_config);
        for (std::size_t c = 0; c < nc; ++c) {
            TrajectoryRow row;
            row.trajectory = i;
            row.start = data::format_timestamp(traj.records.front().timestamp);
            row.mode = data::mode_code(traj.mode());
            row.seed = seed;
            row.controller = controllers[c];
            if (controllers[c] == Controller::oracle) {
                const auto res = oracle::oracle_rollout(traj, model, env_config, seed);
                row.reward = res.replay_return;
                row.energy_kwh = res.energy_kwh;
                row.comfort_kh = res.comfort_violation * env::kDtHours;
            } else {
                agents::Policy policy;
                switch (controllers[c]) {
                    case Controller::baseline1: policy = agents::baseline1_policy(); break;
                    case Controller::baseline2: policy = agents::baseline2_policy(); break;
                    default: policy = agents::td3_policy(*request.agent); break;
                }
                const auto s = agents::run_episode(environment, traj, seed, policy);
                row.reward = s.reward;
                row.energy_kwh = s.energy_kwh;
                row.comfort_kh = s.comfort_kh;
            }
            row.unavoidable_k = unavoidable;
            row.reward_adjusted = row.reward + unavoidable;
            row.comfort_adjusted = row.comfort_kh - unavoidable * env::kDtHours;
            rows[i * nc + c] = row;
        }
    });

    EvaluationReport report;
    report.rows = std::move(rows);
    std::vector<Controller> order = request.controllers;
    if (std::find(order.begin(), order.end(), Controller::oracle) == order.end()) {
        order.insert(order.begin(), Controller::oracle);
    }
    report.metrics = aggregate(report.rows, order);
    return report;
}

std::vector<double> unavoidable_penalties(const std::vector<data::Trajectory>& trajectories,
                                          std::shared_ptr<const pcnn::PcnnModel> model,
                                          const env::EnvConfig& env_config, std::uint64_t eval_seed,
                                          std::size_t threads) {
    std::vector<double> out(trajectories.size());
    parallel_for(trajectories.size(), threads, [&](std::size_t i) {
        out[i] = env::unavoidable_penalty(trajectories[i], model, env_config, env::episode_seed(eval_seed, i));
    });
    return out;
}

std::vector<EvalMetrics> aggregate(const std::vector<TrajectoryRow>& rows, const std::vector<Controller>& order) {
    std::vector<EvalMetrics> out;
    double oracle_mean = 0.0;
    bool have_oracle = false;
    for (auto c : order) {
        EvalMetrics m;
        m.controller = c;
        std::vector<double> rewards;
        for (const auto& r : rows) {
            if (r.controller != c) continue;
            rewards.push_back(r.reward_adjusted);
            m.energy_kwh += r.energy_kwh;
            m.comfort_kh += r.comfort_adjusted;
        }
        m.n_trajectories = rewards.size();
        if (rewards.empty()) throw std::invalid_argument("aggregate: no rows for " + to_string(c));
        const double n = static_cast<double>(rewards.size());
        double sum = 0.0;
        for (double r : rewards) sum += r;
        m.mean_reward = sum / n;
        m.energy_kwh /= n;
        m.comfort_kh /= n;
        std::sort(rewards.begin(), rewards.end());
        const std::size_t k = rewards.size();
        m.median_reward = k % 2 == 1 ? rewards[k / 2] : 0.5 * (rewards[k / 2 - 1] + rewards[k / 2]);
        if (c == Controller::oracle) {
            oracle_mean = m.mean_reward;
            have_oracle = true;
        }
        out.push_back(m);
    }
    if (have_oracle) {
        for (auto& m : out) m.gap_to_optimal = m.controller == Controller::oracle ? 0.0 : oracle_mean - m.mean_reward;
    }
    return out;
}

void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "trajectory,start,mode,seed,controller,reward,energy_kwh,comfort_kh,unavoidable_k,reward_adjusted,"
           "comfort_adjusted\n";
    for (const auto& r : rows) {
        out << r.trajectory << ',' << r.start << ',' << r.mode << ',' << r.seed << ',' << to_string(r.controller)
            << ',' << data::format_number(r.reward) << ',' << data::format_number(r.energy_kwh) << ','
            << data::format_number(r.comfort_kh) << ',' << data::format_number(r.unavoidable_k) << ','
            << data::format_number(r.reward_adjusted) << ',' << data::format_number(r.comfort_adjusted) << '\n';
    }
}

nlohmann::json metrics_to_json(const std::vector<EvalMetrics>& metrics) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : metrics) {
        arr.push_back({{"controller", to_string(m.controller)},
                       {"n_trajectories", m.n_trajectories},
                       {"mean_reward", m.mean_reward},
                       {"median_reward", m.median_reward},
                       {"energy_kwh", m.energy_kwh},
                       {"comfort_kh", m.comfort_kh},
                       {"gap_to_optimal", m.gap_to_optimal}});
    }
    return arr;
}

}  // namespace zonectl::bench

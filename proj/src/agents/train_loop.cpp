#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "zonectl/agents.hpp"

namespace zonectl::agents {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

EpochRecord evaluate_policy(env::Environment& environment, const std::vector<data::Trajectory>& trajectories,
                            std::uint64_t eval_seed, const Policy& policy) {
    if (trajectories.empty()) throw std::invalid_argument("evaluate_policy: no trajectories");
    EpochRecord rec;
    std::vector<double> rewards;
    rewards.reserve(trajectories.size());
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto s = run_episode(environment, trajectories[i], env::episode_seed(eval_seed, i), policy);
        rewards.push_back(s.reward);
        rec.energy_kwh += s.energy_kwh;
        rec.comfort_kh += s.comfort_kh;
    }
    const double n = static_cast<double>(trajectories.size());
    double sum = 0.0;
    for (double r : rewards) sum += r;
    rec.mean_reward = sum / n;
    rec.median_reward = median_of(rewards);
    rec.min_reward = *std::min_element(rewards.begin(), rewards.end());
    rec.max_reward = *std::max_element(rewards.begin(), rewards.end());
    rec.energy_kwh /= n;
    rec.comfort_kh /= n;
    return rec;
}

TrainLoopResult train_loop(const EnvFactory& factory, Td3Agent& agent,
                           const std::vector<data::Trajectory>& train_pool,
                           const std::vector<data::Trajectory>& eval_set, const TrainLoopConfig& config,
                           const std::function<void(const EpochRecord&)>& on_epoch) {
    if (train_pool.empty()) throw std::invalid_argument("train_loop: empty training pool");
    if (eval_set.empty()) throw std::invalid_argument("train_loop: empty evaluation set");
    if (config.steps_per_epoch == 0) throw std::invalid_argument("train_loop: steps_per_epoch must be >= 1");

    const auto& cfg = agent.config();
    env::Environment environment = factory();
    env::Environment eval_env = factory();
    const std::size_t total_steps = config.epochs * config.steps_per_epoch;
    ReplayBuffer buffer(std::min(cfg.buffer_capacity, std::max<std::size_t>(total_steps, 1)), agent.obs_dim());

    std::mt19937_64 rng(config.seed);
    std::mt19937_64 update_rng(env::episode_seed(config.seed, 0x7d3));
    std::uniform_int_distribution<std::size_t> pick(0, train_pool.size() - 1);
    std::uniform_real_distribution<double> uniform_action(-1.0, 1.0);
    std::normal_distribution<double> exploration(0.0, cfg.exploration_sigma);

    std::uint64_t episode = 0;
    auto start_episode = [&] {
        const auto& traj = train_pool[pick(rng)];
        return environment.reset(traj, env::episode_seed(config.seed, episode++));
    };

    TrainLoopResult result;
    result.best_actor = agent.actor;
    result.best_reward = -std::numeric_limits<double>::infinity();
    std::vector<double> obs = start_episode();
    std::uint64_t steps = 0;
    ReplayBatch batch;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        double critic_loss = 0.0;
        std::size_t n_updates = 0;
        for (std::size_t s = 0; s < config.steps_per_epoch; ++s) {
            double a;
            if (steps < config.warmup_steps) {
                a = uniform_action(rng);
            } else {
                a = actor_output(agent, obs);
                if (cfg.exploration_sigma > 0.0) a = std::clamp(a + exploration(rng), -1.0, 1.0);
            }
            const double u = to_power(a, environment.action_bounds());
            auto res = environment.step(u);
            // Trajectory ends are time limits, not terminal states.
            buffer.add(obs, a, res.reward, res.observation, false);
            obs = std::move(res.observation);
            ++steps;

            if (steps >= config.warmup_steps) {
                for (std::size_t k = 0; k < config.updates_per_step; ++k) {
                    const auto idx = buffer.sample_indices(cfg.batch_size, update_rng);
                    buffer.gather(idx, batch);
                    const auto losses = td3_update(agent, batch, update_rng);
                    critic_loss += 0.5 * (losses.critic1 + losses.critic2);
                    ++n_updates;
                }
            }
            if (environment.done()) obs = start_episode();
        }

        auto rec = evaluate_policy(eval_env, eval_set, config.eval_seed, td3_policy(agent));
        rec.epoch = epoch;
        rec.env_steps = steps;
        rec.critic_loss = n_updates > 0 ? critic_loss / static_cast<double>(n_updates) : 0.0;
        result.log.push_back(rec);
        if (rec.mean_reward > result.best_reward) {
            result.best_reward = rec.mean_reward;
            result.best_epoch = epoch;
            result.best_actor = agent.actor;
        }
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

void write_convergence_log(const std::vector<EpochRecord>& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,env_steps,mean_reward,median_reward,min_reward,max_reward,energy_kwh,comfort_kh,critic_loss\n";
    for (const auto& r : log) {
        out << r.epoch << ',' << r.env_steps << ',' << data::format_number(r.mean_reward) << ','
            << data::format_number(r.median_reward) << ',' << data::format_number(r.min_reward) << ','
            << data::format_number(r.max_reward) << ',' << data::format_number(r.energy_kwh) << ','
            << data::format_number(r.comfort_kh) << ',' << data::format_number(r.critic_loss) << '\n';
    }
}

}  // namespace zonectl::agents

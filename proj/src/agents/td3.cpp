#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "zonectl/agents.hpp"
#include "zonectl/checkpoint.hpp"
#include "zonectl/error.hpp"

namespace zonectl::agents {

double to_power(double a, const env::ActionBounds& bounds) {
    const double u = bounds.low + 0.5 * (std::clamp(a, -1.0, 1.0) + 1.0) * (bounds.high - bounds.low);
    return std::clamp(u, bounds.low, bounds.high);
}

double to_normalized(double u_kw, const env::ActionBounds& bounds) {
    const double width = bounds.high - bounds.low;
    if (width <= 0.0) return 0.0;
    return std::clamp(2.0 * (u_kw - bounds.low) / width - 1.0, -1.0, 1.0);
}

void Td3Config::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("td3.gamma must lie in (0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("td3.tau must lie in (0, 1]");
    if (policy_delay < 1) throw ConfigError("td3.policy_delay must be >= 1");
    if (batch_size < 1) throw ConfigError("td3.batch_size must be >= 1");
    if (buffer_capacity < 1) throw ConfigError("td3.buffer_capacity must be >= 1");
    if (!(target_noise_sigma >= 0.0) || !(target_noise_clip >= 0.0) || !(exploration_sigma >= 0.0)) {
        throw ConfigError("td3 noise magnitudes must be >= 0");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("td3.learning_rate must be > 0");
    try {
        actor.validate();
        critic.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("td3 network spec: ") + e.what());
    }
    if (actor.output_size() != 1 || critic.output_size() != 1) {
        throw ConfigError("td3: actor and critic must have one output");
    }
    if (critic.input_size() != actor.input_size() + 1) {
        throw ConfigError("td3: critic input must be the observation plus one action");
    }
    if (actor.output_activation != neural::Activation::tanh) {
        throw ConfigError("td3: actor output activation must be tanh");
    }
}

Td3Agent::Td3Agent(const Td3Config& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    actor = neural::mlp_init(config_.actor, seed * 3 + 1);
    critic1 = neural::mlp_init(config_.critic, seed * 3 + 2);
    critic2 = neural::mlp_init(config_.critic, seed * 3 + 3);
    actor_target = actor;
    critic1_target = critic1;
    critic2_target = critic2;
    const neural::AdamConfig adam{config_.learning_rate};
    actor_opt = neural::OptimizerState(actor.size(), adam);
    critic1_opt = neural::OptimizerState(critic1.size(), adam);
    critic2_opt = neural::OptimizerState(critic2.size(), adam);
}

double actor_output(const Td3Agent& agent, std::span<const double> obs) {
    if (obs.size() != agent.obs_dim()) {
        throw std::invalid_argument("select_action: observation has " + std::to_string(obs.size()) +
                                    " entries, actor expects " + std::to_string(agent.obs_dim()));
    }
    return neural::mlp_forward(agent.actor, obs)[0];
}

double select_action(const Td3Agent& agent, std::span<const double> obs, const env::ActionBounds& bounds,
                     bool explore, std::mt19937_64& rng) {
    double a = actor_output(agent, obs);
    if (explore && agent.config().exploration_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, agent.config().exploration_sigma);
        a = std::clamp(a + noise(rng), -1.0, 1.0);
    }
    return to_power(a, bounds);
}

void polyak_update(const neural::MlpParams& live, neural::MlpParams& target, double tau) {
    if (!live.same_shape(target)) throw std::invalid_argument("polyak_update: shape mismatch");
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("polyak_update: tau outside [0, 1]");
    auto src = live.values();
    auto dst = target.values();
    if (tau == 1.0) {
        std::copy(src.begin(), src.end(), dst.begin());
        return;
    }
    if (tau == 0.0) return;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = tau * src[i] + (1.0 - tau) * dst[i];
}

namespace {

struct Workspace {
    neural::MlpCache actor_cache, critic1_cache, critic2_cache;
    std::vector<double> critic_input;
    std::vector<double> upstream;
    std::vector<double> input_grad;
    neural::MlpParams actor_grad, critic1_grad, critic2_grad;
};

Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

void fill_critic_input(std::span<const double> obs, std::span<const double> action, std::size_t obs_dim,
                       std::vector<double>& out) {
    const std::size_t n = action.size();
    out.resize(n * (obs_dim + 1));
    for (std::size_t b = 0; b < n; ++b) {
        std::copy_n(obs.begin() + static_cast<std::ptrdiff_t>(b * obs_dim), obs_dim,
                    out.begin() + static_cast<std::ptrdiff_t>(b * (obs_dim + 1)));
        out[b * (obs_dim + 1) + obs_dim] = action[b];
    }
}

void check_batch(const Td3Agent& agent, const ReplayBatch& batch) {
    if (batch.size == 0) throw std::invalid_argument("td3_update: empty batch");
    if (batch.obs_dim != agent.obs_dim() || batch.obs.size() != batch.size * batch.obs_dim ||
        batch.next_obs.size() != batch.size * batch.obs_dim || batch.action.size() != batch.size ||
        batch.reward.size() != batch.size || batch.done.size() != batch.size) {
        throw std::invalid_argument("td3_update: malformed batch");
    }
}

[[noreturn]] void non_finite(const char* what, std::uint64_t update, double value) {
    std::ostringstream msg;
    msg << "td3_update: non-finite " << what << " (" << value << ") at update " << update;
    throw NumericError(msg.str());
}

double critic_step(neural::MlpParams& critic, neural::OptimizerState& opt, neural::MlpParams& grad,
                   neural::MlpCache& cache, std::span<const double> input, std::size_t in_dim,
                   std::span<const double> y, std::vector<double>& upstream) {
    const std::size_t n = y.size();
    const auto q = neural::mlp_forward_batch(critic, {input.data(), n, in_dim}, cache);
    upstream.resize(n);
    double loss = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
        const double e = q.data[b] - y[b];
        loss += e * e;
        upstream[b] = 2.0 * e / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) return loss;
    if (!grad.same_shape(critic)) grad = neural::MlpParams(critic.spec());
    grad.set_zero();
    neural::mlp_backward_batch(critic, cache, {upstream.data(), n, 1}, &grad, nullptr);
    neural::adam_step(opt, critic.values(), grad.values());
    return loss;
}

}  // namespace

std::vector<double> td3_targets(const Td3Agent& agent, const ReplayBatch& batch,
                                std::span<const double> target_noise) {
    check_batch(agent, batch);
    if (target_noise.size() != batch.size) throw std::invalid_argument("td3_targets: noise size mismatch");
    auto& ws = workspace();
    const std::size_t n = batch.size;
    const std::size_t d = batch.obs_dim;

    const auto a_next = neural::mlp_forward_batch(agent.actor_target, {batch.next_obs.data(), n, d}, ws.actor_cache);
    std::vector<double> action(n);
    for (std::size_t b = 0; b < n; ++b) action[b] = std::clamp(a_next.data[b] + target_noise[b], -1.0, 1.0);
    fill_critic_input(batch.next_obs, action, d, ws.critic_input);

    std::vector<double> y(n);
    const auto q1 = neural::mlp_forward_batch(agent.critic1_target, {ws.critic_input.data(), n, d + 1}, ws.critic1_cache);
    const auto q2 = neural::mlp_forward_batch(agent.critic2_target, {ws.critic_input.data(), n, d + 1}, ws.critic2_cache);
    const double gamma = agent.config().gamma;
    for (std::size_t b = 0; b < n; ++b) {
        y[b] = batch.reward[b] + gamma * (1.0 - batch.done[b]) * std::min(q1.data[b], q2.data[b]);
    }
    return y;
}

Td3Losses td3_update(Td3Agent& agent, const ReplayBatch& batch, std::mt19937_64& rng) {
    check_batch(agent, batch);
    const auto& cfg = agent.config();
    const std::size_t n = batch.size;
    const std::size_t d = batch.obs_dim;
    auto& ws = workspace();

    std::vector<double> noise(n, 0.0);
    if (cfg.target_noise_sigma > 0.0) {
        std::normal_distribution<double> normal(0.0, cfg.target_noise_sigma);
        for (auto& v : noise) v = std::clamp(normal(rng), -cfg.target_noise_clip, cfg.target_noise_clip);
    }

    Td3Losses losses;
    losses.targets = td3_targets(agent, batch, noise);
    for (double y : losses.targets) {
        if (!std::isfinite(y)) non_finite("critic target", agent.updates_, y);
    }

    fill_critic_input(batch.obs, batch.action, d, ws.critic_input);
    losses.critic1 = critic_step(agent.critic1, agent.critic1_opt, ws.critic1_grad, ws.critic1_cache,
                                 ws.critic_input, d + 1, losses.targets, ws.upstream);
    if (!std::isfinite(losses.critic1)) non_finite("critic 1 loss", agent.updates_, losses.critic1);
    losses.critic2 = critic_step(agent.critic2, agent.critic2_opt, ws.critic2_grad, ws.critic2_cache,
                                 ws.critic_input, d + 1, losses.targets, ws.upstream);
    if (!std::isfinite(losses.critic2)) non_finite("critic 2 loss", agent.updates_, losses.critic2);

    ++agent.updates_;
    if (agent.updates_ % cfg.policy_delay != 0) return losses;

    // Actor: ascend Q1(s, pi(s)).
    const auto a_pi = neural::mlp_forward_batch(agent.actor, {batch.obs.data(), n, d}, ws.actor_cache);
    const std::vector<double> action(a_pi.data, a_pi.data + n);
    fill_critic_input(batch.obs, action, d, ws.critic_input);
    const auto q = neural::mlp_forward_batch(agent.critic1, {ws.critic_input.data(), n, d + 1}, ws.critic1_cache);
    double actor_loss = 0.0;
    for (std::size_t b = 0; b < n; ++b) actor_loss -= q.data[b];
    actor_loss /= static_cast<double>(n);
    if (!std::isfinite(actor_loss)) non_finite("actor loss", agent.updates_, actor_loss);

    ws.upstream.assign(n, -1.0 / static_cast<double>(n));
    neural::mlp_backward_batch(agent.critic1, ws.critic1_cache, {ws.upstream.data(), n, 1}, nullptr,
                               &ws.input_grad);
    for (std::size_t b = 0; b < n; ++b) ws.upstream[b] = ws.input_grad[b * (d + 1) + d];
    if (!ws.actor_grad.same_shape(agent.actor)) ws.actor_grad = neural::MlpParams(agent.actor.spec());
    ws.actor_grad.set_zero();
    neural::mlp_backward_batch(agent.actor, ws.actor_cache, {ws.upstream.data(), n, 1}, &ws.actor_grad, nullptr);
    neural::adam_step(agent.actor_opt, agent.actor.values(), ws.actor_grad.values());

    polyak_update(agent.actor, agent.actor_target, cfg.tau);
    polyak_update(agent.critic1, agent.critic1_target, cfg.tau);
    polyak_update(agent.critic2, agent.critic2_target, cfg.tau);
    losses.actor = actor_loss;
    losses.actor_updated = true;
    return losses;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

nlohmann::json config_to_json(const Td3Config& c) {
    return {{"gamma", c.gamma},
            {"tau", c.tau},
            {"policy_delay", c.policy_delay},
            {"target_noise_sigma", c.target_noise_sigma},
            {"target_noise_clip", c.target_noise_clip},
            {"exploration_sigma", c.exploration_sigma},
            {"batch_size", c.batch_size},
            {"buffer_capacity", c.buffer_capacity},
            {"learning_rate", c.learning_rate},
            {"actor", neural::spec_to_json(c.actor)},
            {"critic", neural::spec_to_json(c.critic)}};
}

Td3Config config_from_json(const nlohmann::json& j) {
    Td3Config c;
    c.gamma = j.at("gamma").get<double>();
    c.tau = j.at("tau").get<double>();
    c.policy_delay = j.at("policy_delay").get<std::size_t>();
    c.target_noise_sigma = j.at("target_noise_sigma").get<double>();
    c.target_noise_clip = j.at("target_noise_clip").get<double>();
    c.exploration_sigma = j.at("exploration_sigma").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.actor = neural::spec_from_json(j.at("actor"));
    c.critic = neural::spec_from_json(j.at("critic"));
    return c;
}

}  // namespace

void save_agent(const Td3Agent& agent, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "zonectl-td3";
    j["version"] = 1;
    j["config"] = config_to_json(agent.config());
    j["update_count"] = agent.update_count();
    j["actor"] = neural::params_to_json(agent.actor);
    j["critic1"] = neural::params_to_json(agent.critic1);
    j["critic2"] = neural::params_to_json(agent.critic2);
    j["actor_target"] = neural::params_to_json(agent.actor_target);
    j["critic1_target"] = neural::params_to_json(agent.critic1_target);
    j["critic2_target"] = neural::params_to_json(agent.critic2_target);
    neural::write_json_file(j, path);
}

Td3Agent load_agent(const std::filesystem::path& path) {
    const auto j = neural::read_json_file(path);
    if (j.value("format", "") != "zonectl-td3") {
        throw std::invalid_argument(path.string() + ": not a TD3 checkpoint");
    }
    Td3Agent agent(config_from_json(j.at("config")), 0);
    auto load = [&](const char* key, neural::MlpParams& dst) {
        auto p = neural::params_from_json(j.at(key));
        if (!p.same_shape(dst)) throw std::invalid_argument(path.string() + ": shape mismatch in " + key);
        dst = std::move(p);
    };
    load("actor", agent.actor);
    load("critic1", agent.critic1);
    load("critic2", agent.critic2);
    load("actor_target", agent.actor_target);
    load("critic1_target", agent.critic1_target);
    load("critic2_target", agent.critic2_target);
    return agent;
}

}  // namespace zonectl::agents

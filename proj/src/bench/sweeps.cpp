#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "zonectl/bench.hpp"

namespace zonectl::bench {

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SeedSweepResult seed_sweep(const std::vector<data::Trajectory>& train_pool,
                           const std::vector<data::Trajectory>& epoch_eval_set,
                           std::shared_ptr<const pcnn::PcnnModel> model, const BenchConfig& config,
                           const std::function<void(std::uint64_t, const agents::EpochRecord&)>& on_epoch) {
    if (config.seeds.empty()) throw std::invalid_argument("seed_sweep: no seeds");
    SeedSweepResult out;
    out.runs.resize(config.seeds.size());
    const env::EnvConfig env_config = config.env;
    parallel_for(config.seeds.size(), config.threads, [&](std::size_t i) {
        const std::uint64_t seed = config.seeds[i];
        agents::Td3Agent agent(config.td3, seed);
        agents::TrainLoopConfig loop = config.train;
        loop.seed = seed;
        auto factory = [&] { return env::Environment(model, env_config); };
        auto cb = [&](const agents::EpochRecord& r) {
            if (on_epoch) on_epoch(seed, r);
        };
        out.runs[i].seed = seed;
        out.runs[i].result = agents::train_loop(factory, agent, train_pool, epoch_eval_set, loop, cb);
    });

    const std::size_t epochs = config.train.epochs;
    for (std::size_t e = 0; e < epochs; ++e) {
        std::vector<double> v;
        for (const auto& r : out.runs) v.push_back(r.result.log.at(e).mean_reward);
        out.median_curve.push_back(median(v));
    }
    std::vector<std::size_t> order(out.runs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.runs[a].result.best_reward < out.runs[b].result.best_reward;
    });
    out.median_run = order[(order.size() - 1) / 2];
    return out;
}

LambdaSweepResult lambda_sweep(const std::vector<data::Trajectory>& train_pool,
                               const std::vector<data::Trajectory>& epoch_eval_set,
                               const std::vector<data::Trajectory>& eval_set,
                               std::shared_ptr<const pcnn::PcnnModel> model, const BenchConfig& config,
                               const LambdaSweepOptions& options) {
    if (config.lambda_factors.empty()) throw std::invalid_argument("lambda_sweep: no factors");
    LambdaSweepResult out;
    const auto unavoidable = unavoidable_penalties(eval_set, model, config.env, config.eval_seed, config.threads);

    std::vector<ParetoPoint> oracle_points;
    for (double factor : config.lambda_factors) {
        env::EnvConfig env_config = config.env;
        env_config.lambda = config.env.lambda * factor;
        progress("lambda sweep: factor " + data::format_number(factor));

        std::optional<agents::Td3Agent> agent;
        if (options.train_agents) {
            agent.emplace(config.td3, options.agent_seed);
            agents::TrainLoopConfig loop = config.train;
            loop.seed = options.agent_seed;
            loop.epochs = config.lambda_sweep_epochs;
            auto factory = [&] { return env::Environment(model, env_config); };
            const auto trained = agents::train_loop(factory, *agent, train_pool, epoch_eval_set, loop);
            agent->actor = trained.best_actor;
        }

        EvaluationRequest req;
        req.controllers = {Controller::oracle};
        if (agent) {
            req.controllers.push_back(Controller::agent);
            req.agent = &*agent;
        }
        req.unavoidable = &unavoidable;
        req.eval_seed = config.eval_seed;
        req.threads = config.threads;
        const auto report = evaluate(eval_set, model, env_config, req);
        for (const auto& m : report.metrics) {
            ParetoPoint p{factor, env_config.lambda, m.controller, m.energy_kwh, m.comfort_kh, m.mean_reward};
            out.points.push_back(p);
            if (m.controller == Controller::oracle) oracle_points.push_back(p);
        }
    }

    // Order by decreasing factor to check the scalarization property.
    std::vector<ParetoPoint> sorted = oracle_points;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ParetoPoint& a, const ParetoPoint& b) { return a.factor > b.factor; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const auto& hi = sorted[i - 1];
        const auto& lo = sorted[i];
        if (lo.energy_kwh < hi.energy_kwh - options.tolerance) {
            std::ostringstream msg;
            msg << "oracle energy decreases from factor " << hi.factor << " (" << hi.energy_kwh << ") to "
                << lo.factor << " (" << lo.energy_kwh << ")";
            out.monotonicity_violations.push_back(msg.str());
        }
        if (lo.comfort_kh > hi.comfort_kh + options.tolerance) {
            std::ostringstream msg;
            msg << "oracle comfort violation increases from factor " << hi.factor << " (" << hi.comfort_kh
                << ") to " << lo.factor << " (" << lo.comfort_kh << ")";
            out.monotonicity_violations.push_back(msg.str());
        }
    }
    out.oracle_monotone = out.monotonicity_violations.empty();
    return out;
}

void write_pareto_csv(const std::vector<ParetoPoint>& points, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "factor,lambda,controller,energy_kwh,comfort_kh,mean_reward\n";
    for (const auto& p : points) {
        out << data::format_number(p.factor) << ',' << data::format_number(p.lambda) << ','
            << to_string(p.controller) << ',' << data::format_number(p.energy_kwh) << ','
            << data::format_number(p.comfort_kh) << ',' << data::format_number(p.mean_reward) << '\n';
    }
}

}  // namespace zonectl::bench

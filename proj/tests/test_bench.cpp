#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "zonectl/bench.hpp"
#include "zonectl/error.hpp"

using namespace zonectl;
using bench::Controller;
using zonectl::testing::small_model;
using zonectl::testing::small_world;

namespace {

std::vector<data::Trajectory> few_validation(std::size_t n) {
    const auto& v = small_world().split.validation;
    std::vector<data::Trajectory> out;
    for (auto i : data::evenly_spaced(v.size(), n)) out.push_back(v[i]);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(BenchConfig, RoundTripThroughKeyValueText) {
    auto c = bench::BenchConfig::desk_scale();
    c.days = 40;
    c.env.lambda = 0.25;
    c.td3.tau = 0.01;
    c.seeds = {4, 9};
    c.lambda_factors = {2.0, 0.3};
    c.pcnn.model.hidden = {8, 4};
    const auto kv = bench::bench_config_to(c);
    const auto text = kv.dump();
    const auto back = bench::bench_config_from(env::KeyValueConfig::parse(text), bench::BenchConfig::full_scale());
    EXPECT_EQ(bench::bench_config_to(back).dump(), text);
    EXPECT_EQ(back.days, 40);
    EXPECT_EQ(back.seeds, (std::vector<std::uint64_t>{4, 9}));
    EXPECT_EQ(back.td3.gamma, back.env.gamma);
}

TEST(BenchConfig, RejectsUnknownKeysAndBadValues) {
    const auto defaults = bench::BenchConfig::desk_scale();
    EXPECT_THROW(bench::bench_config_from(env::KeyValueConfig::parse("env.lamda = 1\n"), defaults), ConfigError);
    EXPECT_THROW(bench::bench_config_from(env::KeyValueConfig::parse("sweep.seeds = 1,1\n"), defaults), ConfigError);
    EXPECT_THROW(bench::bench_config_from(env::KeyValueConfig::parse("sweep.lambda_factors = 1,-2\n"), defaults),
                 ConfigError);
    EXPECT_THROW(bench::bench_config_from(env::KeyValueConfig::parse("data.days = two\n"), defaults), ConfigError);
    EXPECT_THROW(bench::bench_config_from(env::KeyValueConfig::parse("train.epochs = -1\n"), defaults), ConfigError);
    EXPECT_NO_THROW(bench::bench_config_from(env::KeyValueConfig::parse("env.lambda = 0\n"), defaults));
}

TEST(BenchConfig, ScalePresets) {
    const auto desk = bench::BenchConfig::desk_scale();
    const auto full = bench::BenchConfig::full_scale();
    EXPECT_GE(desk.seeds.size(), 3u);
    EXPECT_GE(desk.train.epochs, 40u);
    EXPECT_EQ(full.seeds.size(), 10u);
    EXPECT_EQ(full.train.steps_per_epoch, 5000u);
    EXPECT_EQ(desk.epoch_eval_trajectories, 50u);
    EXPECT_NO_THROW(desk.validate());
    EXPECT_NO_THROW(full.validate());
}

TEST(ParallelFor, CoversEveryIndexOnceAndRethrows) {
    for (std::size_t threads : {1u, 3u, 8u}) {
        std::vector<std::atomic<int>> hits(37);
        bench::parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
        for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    }
    EXPECT_THROW(bench::parallel_for(10, 2,
                                     [](std::size_t i) {
                                         if (i == 7) throw std::runtime_error("boom");
                                     }),
                 std::runtime_error);
    bench::parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Evaluate, AggregatesComeFromRowsAndOracleDominates) {
    const auto trajs = few_validation(6);
    const auto model = small_model(8);
    bench::EvaluationRequest req;
    req.controllers = {Controller::baseline1, Controller::baseline2};
    const auto rep = bench::evaluate(trajs, model, env::EnvConfig{}, req);
    ASSERT_EQ(rep.rows.size(), 3 * trajs.size());
    const std::vector<Controller> order = {Controller::oracle, Controller::baseline1, Controller::baseline2};
    const auto again = bench::aggregate(rep.rows, order);
    ASSERT_EQ(again.size(), 3u);
    for (const auto& m : again) {
        const auto& r = rep.at(m.controller);
        EXPECT_EQ(r.mean_reward, m.mean_reward);
        EXPECT_EQ(r.median_reward, m.median_reward);
        EXPECT_EQ(r.energy_kwh, m.energy_kwh);
        EXPECT_EQ(r.comfort_kh, m.comfort_kh);
        EXPECT_EQ(r.n_trajectories, trajs.size());
        EXPECT_GE(m.energy_kwh, 0.0);
        EXPECT_GE(m.comfort_kh, -1e-9);
    }
    EXPECT_EQ(rep.at(Controller::oracle).gap_to_optimal, 0.0);
    for (const auto& row : rep.rows) {
        EXPECT_NEAR(row.reward_adjusted, row.reward + row.unavoidable_k, 1e-12);
        EXPECT_NEAR(row.comfort_adjusted, row.comfort_kh - 0.25 * row.unavoidable_k, 1e-12);
        EXPECT_GE(row.unavoidable_k, 0.0);
    }
    // Paired comparison per trajectory, not only on average.
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        double oracle_r = 0;
        for (const auto& row : rep.rows)
            if (row.trajectory == t && row.controller == Controller::oracle) oracle_r = row.reward;
        for (const auto& row : rep.rows)
            if (row.trajectory == t) EXPECT_GE(oracle_r, row.reward - 1e-9);
    }
    EXPECT_GT(rep.at(Controller::oracle).mean_reward, rep.at(Controller::baseline1).mean_reward);
    EXPECT_GT(rep.at(Controller::oracle).mean_reward, rep.at(Controller::baseline2).mean_reward);
    EXPECT_THROW(rep.at(Controller::agent), std::out_of_range);
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
    const auto trajs = few_validation(5);
    const auto model = small_model(9);
    agents::Td3Agent agent(agents::Td3Config{}, 3);
    bench::EvaluationRequest req;
    req.controllers = {Controller::oracle, Controller::baseline1, Controller::agent};
    req.agent = &agent;
    req.threads = 1;
    const auto a = bench::evaluate(trajs, model, env::EnvConfig{}, req);
    req.threads = 3;
    const auto b = bench::evaluate(trajs, model, env::EnvConfig{}, req);
    const auto dir = std::filesystem::temp_directory_path();
    bench::write_trajectory_csv(a.rows, dir / "zonectl_eval_a.csv");
    bench::write_trajectory_csv(b.rows, dir / "zonectl_eval_b.csv");
    const auto text = slurp(dir / "zonectl_eval_a.csv");
    EXPECT_EQ(text, slurp(dir / "zonectl_eval_b.csv"));
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "trajectory,start,mode,seed,controller,reward,energy_kwh,comfort_kh,unavoidable_k,reward_adjusted,"
              "comfort_adjusted");
    EXPECT_EQ(bench::metrics_to_json(a.metrics).dump(), bench::metrics_to_json(b.metrics).dump());
    std::filesystem::remove(dir / "zonectl_eval_a.csv");
    std::filesystem::remove(dir / "zonectl_eval_b.csv");
}

TEST(Evaluate, AgentRequiresCheckpointAndUnavoidableCanBeReused) {
    const auto trajs = few_validation(3);
    const auto model = small_model(10);
    bench::EvaluationRequest req;
    req.controllers = {Controller::agent};
    EXPECT_ANY_THROW(bench::evaluate(trajs, model, env::EnvConfig{}, req));

    const auto pen = bench::unavoidable_penalties(trajs, model, env::EnvConfig{}, 12345, 1);
    req.controllers = {Controller::baseline2};
    const auto direct = bench::evaluate(trajs, model, env::EnvConfig{}, req);
    req.unavoidable = &pen;
    const auto reused = bench::evaluate(trajs, model, env::EnvConfig{}, req);
    EXPECT_EQ(bench::metrics_to_json(direct.metrics).dump(), bench::metrics_to_json(reused.metrics).dump());
}

TEST(Evaluate, MetricsJsonShape) {
    bench::EvalMetrics m;
    m.controller = Controller::baseline2;
    m.n_trajectories = 4;
    m.mean_reward = -1.5;
    const auto j = bench::metrics_to_json({m});
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j[0]["controller"], "baseline2");
    EXPECT_EQ(j[0]["n_trajectories"], 4);
    EXPECT_EQ(j[0]["mean_reward"], -1.5);
    for (const char* k : {"median_reward", "energy_kwh", "comfort_kh", "gap_to_optimal"}) EXPECT_TRUE(j[0].contains(k)) << k;
}

TEST(LambdaSweep, OracleOnlyFrontierIsMonotone) {
    const auto trajs = few_validation(4);
    auto cfg = bench::BenchConfig::desk_scale();
    cfg.lambda_factors = {4.0, 1.0, 0.25, 0.0625};
    bench::LambdaSweepOptions opt;
    opt.train_agents = false;
    const auto res = bench::lambda_sweep({}, {}, trajs, small_model(11), cfg, opt);
    ASSERT_EQ(res.points.size(), 4u);
    EXPECT_TRUE(res.oracle_monotone);
    EXPECT_TRUE(res.monotonicity_violations.empty());
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(res.points[i].factor, cfg.lambda_factors[i]);
        EXPECT_DOUBLE_EQ(res.points[i].lambda, cfg.lambda_factors[i] * cfg.env.lambda);
    }
}

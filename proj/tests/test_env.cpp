#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "zonectl/env.hpp"
#include "zonectl/error.hpp"

using namespace zonectl;
using namespace std::chrono_literals;
using zonectl::testing::flat_trajectory;
using zonectl::testing::linear_model;
using zonectl::testing::short_trajectory;
using zonectl::testing::small_model;

namespace {

data::Timestamp at(int month, std::chrono::minutes time_of_day) {
    return std::chrono::sys_days{std::chrono::year{2023} / month / 10} + time_of_day;
}

env::EnvConfig quiet() {
    env::EnvConfig c;
    c.noise_sigma = 0.0;
    return c;
}

}  // namespace

TEST(Bounds, Schedule) {
    for (auto mode : {data::Mode::heating, data::Mode::cooling}) {
        const auto night = env::bounds_at(at(1, 3h), mode);
        EXPECT_EQ(night.lower, 23.0);
        EXPECT_EQ(night.upper, 24.0);
        EXPECT_EQ(env::bounds_at(at(7, 20h), mode).lower, 23.0);
        EXPECT_EQ(env::bounds_at(at(7, 19h + 45min), mode).upper, mode == data::Mode::heating ? 24.0 : 26.0);
    }
    const auto heat_day = env::bounds_at(at(1, 12h), data::Mode::heating);
    EXPECT_EQ(heat_day.lower, 21.0);
    EXPECT_EQ(heat_day.upper, 24.0);
    const auto cool_day = env::bounds_at(at(7, 12h), data::Mode::cooling);
    EXPECT_EQ(cool_day.lower, 23.0);
    EXPECT_EQ(cool_day.upper, 26.0);
    EXPECT_EQ(env::bounds_at(at(1, 8h), data::Mode::heating).lower, 21.0);
    EXPECT_EQ(env::bounds_at(at(1, 7h + 45min), data::Mode::heating).lower, 23.0);

    for (int m = 0; m < 96 * 3; ++m) {
        const auto b = env::bounds_at(at(1, 15min * m), m % 2 ? data::Mode::heating : data::Mode::cooling);
        EXPECT_LT(b.lower, b.upper);
    }
}

TEST(Reward, Examples) {
    EXPECT_EQ(env::reward(23.5, 23, 24, 0.0, 0.5), 0.0);
    EXPECT_EQ(env::reward(22.0, 23, 24, 0.0, 0.5), -1.0);
    EXPECT_EQ(env::reward(25.0, 23, 24, 0.0, 0.5), -1.0);
    // 1 kW in bounds costs as much as 0.5 K outside with no power.
    EXPECT_EQ(env::reward(23.5, 23, 24, 1.0, 0.5), env::reward(22.5, 23, 24, 0.0, 0.5));
    EXPECT_EQ(env::reward(23.5, 23, 24, -1.0, 0.5), -0.5);
    EXPECT_THROW(env::reward(23.5, 24, 24, 0.0, 0.5), std::invalid_argument);
}

TEST(Reward, NonPositiveAndZeroOnlyWhenIdleInBounds) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> t(18.0, 30.0), u(-2.0, 2.0);
    for (int i = 0; i < 10000; ++i) {
        const double T = t(rng), p = (i % 3 == 0) ? 0.0 : u(rng);
        const double r = env::reward(T, 23, 24, p, 0.5);
        EXPECT_LE(r, 0.0);
        EXPECT_EQ(r == 0.0, T >= 23 && T <= 24 && p == 0.0);
    }
}

TEST(Noise, DeterministicAndCalibrated) {
    EXPECT_EQ(env::noise_sequence(4, 100, 0.1), env::noise_sequence(4, 100, 0.1));
    EXPECT_NE(env::noise_sequence(4, 100, 0.1), env::noise_sequence(5, 100, 0.1));
    for (double v : env::noise_sequence(4, 100, 0.0)) EXPECT_EQ(v, 0.0);
    const auto n = env::noise_sequence(9, 100000, 0.1);
    double m = 0, s = 0;
    for (double v : n) m += v;
    m /= n.size();
    for (double v : n) s += (v - m) * (v - m);
    s = std::sqrt(s / (n.size() - 1));
    EXPECT_NEAR(m, 0.0, 5 * 0.1 / std::sqrt(1e5));
    EXPECT_NEAR(s, 0.1, 0.002);

    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(env::episode_seed(12345, i));
    EXPECT_EQ(seeds.size(), 1000u);
    EXPECT_EQ(env::episode_seed(1, 2), env::episode_seed(1, 2));
}

TEST(Environment, HorizonAndShortTrajectories) {
    env::Environment e(small_model(), quiet());
    const auto t = short_trajectory(60);
    EXPECT_EQ(env::episode_horizon(t), 60u - 13u);
    e.reset(t, 1);
    EXPECT_EQ(e.horizon(), 47u);
    const auto too_short = short_trajectory(env::kMinEpisodeSamples - 1);
    EXPECT_THROW(e.reset(too_short, 1), std::invalid_argument);
    EXPECT_EQ(env::episode_horizon(short_trajectory(env::kMinEpisodeSamples)), 1u);
}

TEST(Environment, ResetIsDeterministic) {
    env::Environment e(small_model(), env::EnvConfig{});
    const auto t = short_trajectory(80, 3);
    const auto o1 = e.reset(t, 77);
    const auto o2 = e.reset(t, 77);
    EXPECT_EQ(o1, o2);
    ASSERT_EQ(o1.size(), env::kObservationDim);
    // Measured start temperature is the recorded one plus the first noise draw.
    EXPECT_NEAR(e.measured_temperature(), t.records[env::kLags].t_zone + e.noise()[0], 1e-12);
    const auto o3 = e.reset(t, 78);
    EXPECT_NE(o1, o3);
}

TEST(Environment, StepAfterDoneThrowsAndDoneOnlyAtEnd) {
    env::Environment e(small_model(), env::EnvConfig{});
    const auto t = short_trajectory(20);
    e.reset(t, 3);
    for (std::size_t k = 0; k < e.horizon(); ++k) {
        const auto r = e.step(0.5);
        EXPECT_EQ(r.done, k + 1 == e.horizon());
    }
    EXPECT_THROW(e.step(0.5), std::logic_error);
    EXPECT_THROW(e.step(std::nan("")), std::logic_error);
    e.reset(t, 3);
    EXPECT_THROW(e.step(std::nan("")), NumericError);
}

TEST(Environment, ActionsAreClippedToSeason) {
    env::Environment e(small_model(), quiet());
    const auto heat = flat_trajectory(20, 23.5, 23.5, data::Mode::heating);
    e.reset(heat, 1);
    EXPECT_EQ(e.step(5.0).info.power_kw, 2.0);
    EXPECT_EQ(e.step(-1.0).info.power_kw, 0.0);
    const auto cool = flat_trajectory(20, 23.5, 23.5, data::Mode::cooling);
    e.reset(cool, 1);
    EXPECT_EQ(e.step(1.0).info.power_kw, 0.0);
    EXPECT_EQ(e.step(-7.0).info.power_kw, -2.0);
    const auto r = e.step(-1.0);
    EXPECT_EQ(r.info.power_kw, -1.0);
    EXPECT_DOUBLE_EQ(r.info.energy_kwh, 0.25);
}

TEST(Environment, NoiselessIdleEpisodeMatchesModelRollout) {
    const auto model = small_model(4);
    env::Environment e(model, quiet());
    const auto t = short_trajectory(120, 2);
    e.reset(t, 9);
    const auto& norm = model->normalizer;
    auto s = pcnn::initial_state(norm.apply(data::Feature::temperature, t.records[env::kLags].t_zone));
    const auto exo = pcnn::make_exogenous(std::span(t.records).subspan(env::kLags), norm);
    for (std::size_t k = 0; k < e.horizon(); ++k) {
        const auto r = e.step(0.0);
        s = pcnn::pcnn_step(*model, s, exo[k], 0.0);
        ASSERT_EQ(e.pcnn_state().T, s.T);
        ASSERT_EQ(e.pcnn_state().D, s.D);
        ASSERT_EQ(e.pcnn_state().E, s.E);
        ASSERT_EQ(r.info.true_temperature, norm.invert(data::Feature::temperature, s.T));
        ASSERT_EQ(r.info.measured_temperature, r.info.true_temperature);
    }
}

TEST(Environment, ReturnDecomposesIntoEnergyAndViolations) {
    env::Environment e(small_model(6), env::EnvConfig{});
    const auto t = short_trajectory(200, 5);
    e.reset(t, 21);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 2.5);
    double ret = 0, energy = 0, viol = 0;
    for (std::size_t k = 0; k < e.horizon(); ++k) {
        const auto r = e.step(u(rng));
        ret += r.reward;
        energy += std::abs(r.info.power_kw);
        // Recompute the violation from the logged temperature and bounds.
        viol += std::max(r.info.lower - r.info.measured_temperature, 0.0) +
                std::max(r.info.measured_temperature - r.info.upper, 0.0);
    }
    EXPECT_NEAR(ret, -(0.5 * energy + viol), 1e-9);
}

TEST(Environment, ObservationLayoutAndLags) {
    env::Environment e(small_model(), env::EnvConfig{});
    const auto t = short_trajectory(100, 1);
    auto o = e.reset(t, 5);
    std::vector<double> measured;
    for (std::size_t i = 0; i < env::kLags; ++i) measured.push_back(t.records[i].t_zone);
    measured.push_back(e.measured_temperature());
    for (int k = 0; k < 30; ++k) {
        o = e.step(1.0).observation;
        measured.push_back(e.measured_temperature());
    }
    const std::size_t now = measured.size() - 1;
    const std::size_t idx = env::kLags + 30;
    for (std::size_t j = 0; j <= env::kLags; ++j) {
        EXPECT_NEAR(o[env::obs::zone + j], env::obs::scale_zone(measured[now - j]), 1e-15);
        EXPECT_EQ(o[env::obs::neighbour + j], env::obs::scale_zone(t.records[idx - j].t_neigh));
        EXPECT_EQ(o[env::obs::outside + j], env::obs::scale_outside(t.records[idx - j].t_out));
        EXPECT_EQ(o[env::obs::solar + j], env::obs::scale_solar(t.records[idx - j].solar));
    }
    EXPECT_EQ(o[env::obs::mode], t.mode() == data::Mode::heating ? 1.0 : -1.0);
    const auto b = env::bounds_at(t.records[idx].timestamp, t.mode());
    EXPECT_EQ(env::obs::unscale_zone(o[env::obs::lower]), b.lower);
    EXPECT_EQ(env::obs::unscale_zone(o[env::obs::upper]), b.upper);
    EXPECT_EQ(env::kObservationDim, 60u);
}

TEST(Environment, OutOfBoundsStartGivesNegativeFirstReward) {
    env::Environment e(linear_model(0.002, 0.01, 0.01, 0.002), quiet());
    const auto t = flat_trajectory(20, 21.0, 21.0);
    e.reset(t, 1);
    EXPECT_LT(e.step(2.0).reward, 0.0);
    e.reset(t, 1);
    EXPECT_LT(e.step(0.0).reward, 0.0);
}

TEST(Environment, EpisodeLogCsv) {
    env::Environment e(small_model(), env::EnvConfig{});
    const auto t = short_trajectory(20);
    e.reset(t, 3);
    std::vector<env::EpisodeLogRow> rows;
    while (!e.done()) {
        const auto r = e.step(1.0);
        rows.push_back({e.step_index() - 1, r.reward, r.info});
    }
    const auto path = std::filesystem::temp_directory_path() / "zonectl_episode.csv";
    env::write_episode_log(rows, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,true_t,measured_t,lower,upper,u,reward,D,E");
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    EXPECT_EQ(n, e.horizon());
    std::filesystem::remove(path);
}

TEST(Unavoidable, ZeroWhenStartingInBounds) {
    const auto model = linear_model(0.01, 0.01, 0.01, 0.01);
    const auto t = flat_trajectory(24, 23.5, 23.5);
    EXPECT_NEAR(env::unavoidable_penalty(t, model, quiet(), 1), 0.0, 1e-9);
}

TEST(Unavoidable, PositiveWhenStartingWellBelowLowerBound) {
    const auto model = linear_model(0.002, 0.01, 0.01, 0.002);
    const auto t = flat_trajectory(24, 22.0, 22.0);
    EXPECT_GT(env::unavoidable_penalty(t, model, quiet(), 1), 0.1);
}

TEST(EnvConfig, ValidationAndActionBounds) {
    env::EnvConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.action_bounds(data::Mode::heating).high, 2.0);
    EXPECT_EQ(c.action_bounds(data::Mode::heating).low, 0.0);
    EXPECT_EQ(c.action_bounds(data::Mode::cooling).low, -2.0);
    EXPECT_EQ(c.action_bounds(data::Mode::cooling).high, 0.0);
    c.lambda = 0.0;
    EXPECT_NO_THROW(c.validate());
    c.lambda = -0.1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.noise_sigma = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.gamma = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.max_cooling_kw = -1;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(KeyValueConfig, ParseTypedAndDump) {
    const auto kv = env::KeyValueConfig::parse("# comment\n b = 2.5\na=hello   # trailing\n\nflag = true\nn = -3\n");
    EXPECT_EQ(kv.get_string("a", ""), "hello");
    EXPECT_EQ(kv.get_double("b", 0), 2.5);
    EXPECT_TRUE(kv.get_bool("flag", false));
    EXPECT_EQ(kv.get_int("n", 0), -3);
    EXPECT_EQ(kv.get_double("missing", 7.0), 7.0);
    EXPECT_THROW(kv.get_double("a", 0), ConfigError);
    EXPECT_THROW(kv.get_int("b", 0), ConfigError);
    EXPECT_THROW(env::KeyValueConfig::parse("just words\n"), ConfigError);
    EXPECT_THROW(env::KeyValueConfig::load("/nonexistent/zonectl.cfg"), ConfigError);
    EXPECT_EQ(env::KeyValueConfig::parse(kv.dump()).values(), kv.values());
}

TEST(KeyValueConfig, EnvConfigRoundTrip) {
    env::EnvConfig c;
    c.lambda = 0.125;
    c.noise_sigma = 0.05;
    c.max_heating_kw = 3.0;
    c.gamma = 0.95;
    env::KeyValueConfig kv;
    env::env_config_to(c, kv);
    const auto back = env::env_config_from(kv);
    EXPECT_EQ(back.lambda, c.lambda);
    EXPECT_EQ(back.noise_sigma, c.noise_sigma);
    EXPECT_EQ(back.max_heating_kw, c.max_heating_kw);
    EXPECT_EQ(back.max_cooling_kw, c.max_cooling_kw);
    EXPECT_EQ(back.gamma, c.gamma);
    kv.set("env.lambda", "-1");
    EXPECT_THROW(env::env_config_from(kv), ConfigError);
}

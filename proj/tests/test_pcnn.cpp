#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "zonectl/error.hpp"
#include "zonectl/pcnn.hpp"

using namespace zonectl;
using zonectl::testing::small_model;
using zonectl::testing::small_world;

namespace {

pcnn::ExogenousStep random_exo(std::mt19937_64& rng, data::Mode mode) {
    std::uniform_real_distribution<double> u(0.1, 0.9);
    pcnn::ExogenousStep e;
    for (auto& v : e.x) v = u(rng);
    e.t_out = u(rng);
    e.t_neigh = u(rng);
    e.mode = mode;
    return e;
}

struct NaiveState {
    double D, E, T;
};

// Straight transcription of the three update equations.
NaiveState naive_step(const pcnn::PcnnModel& m, NaiveState s, const pcnn::ExogenousStep& e, double u) {
    std::vector<double> in = {s.D};
    in.insert(in.end(), e.x.begin(), e.x.end());
    const double f = neural::mlp_forward(m.f_net, in)[0];
    const double a = std::log1p(std::exp(m.phys.a_raw));
    const double b = std::log1p(std::exp(m.phys.b_raw));
    const double c = std::log1p(std::exp(m.phys.c_raw));
    const double d = std::log1p(std::exp(m.phys.d_raw));
    const double g = e.mode == data::Mode::heating ? a : d;
    NaiveState n;
    n.D = s.D + f;
    n.E = s.E + g * u - b * (s.T - e.t_out) - c * (s.T - e.t_neigh);
    n.T = n.D + n.E;
    return n;
}

}  // namespace

TEST(Softplus, InverseAndPositivity) {
    for (double y : {1e-6, 0.01, 0.3, 2.0, 40.0}) EXPECT_NEAR(pcnn::softplus(pcnn::inverse_softplus(y)), y, 1e-12 * (1 + y));
    for (double x : {-800.0, -30.0, 0.0, 30.0, 800.0}) {
        EXPECT_GT(pcnn::softplus(x), 0.0);
        EXPECT_TRUE(std::isfinite(pcnn::softplus(x)));
    }
    EXPECT_THROW(pcnn::inverse_softplus(0.0), std::invalid_argument);
    const auto p = pcnn::PcnnPhysParams::from_effective(0.1, 0.02, 0.01, 0.3);
    EXPECT_NEAR(p.a(), 0.1, 1e-14);
    EXPECT_NEAR(p.d(), 0.3, 1e-14);
    EXPECT_EQ(p.gain(data::Mode::heating), p.a());
    EXPECT_EQ(p.gain(data::Mode::cooling), p.d());
}

TEST(PcnnStep, EquilibriumLeavesAccumulatorUnchanged) {
    const auto m = small_model();
    pcnn::ExogenousStep e;
    e.t_out = e.t_neigh = 0.5;
    pcnn::PcnnState s{0.3, 0.2, 0.5};
    const auto n = pcnn::pcnn_step(*m, s, e, 0.0);
    EXPECT_EQ(n.E, s.E);
    EXPECT_EQ(n.T, n.D + n.E);
}

TEST(PcnnStep, OneKilowattMovesTemperatureByGain) {
    const auto m = small_model();
    std::mt19937_64 rng(2);
    for (auto mode : {data::Mode::heating, data::Mode::cooling}) {
        const auto e = random_exo(rng, mode);
        const pcnn::PcnnState s{0.45, 0.03, 0.48};
        const double sign = mode == data::Mode::heating ? 1.0 : -1.0;
        const auto off = pcnn::pcnn_step(*m, s, e, 0.0);
        const auto on = pcnn::pcnn_step(*m, s, e, sign);
        EXPECT_NEAR(on.T - off.T, sign * m->phys.gain(mode), 1e-15);
        EXPECT_EQ(on.D, off.D);
    }
}

TEST(PcnnStep, RolloutMatchesNaiveRecursion) {
    const auto m = small_model(9);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pow(0.0, 2.0);
    pcnn::PcnnState s = pcnn::initial_state(0.5);
    NaiveState ns{0.5, 0.0, 0.5};
    for (int k = 0; k < 288; ++k) {
        const auto e = random_exo(rng, data::Mode::heating);
        const double u = pow(rng);
        s = pcnn::pcnn_step(*m, s, e, u);
        ns = naive_step(*m, ns, e, u);
        ASSERT_NEAR(s.D, ns.D, 1e-12);
        ASSERT_NEAR(s.E, ns.E, 1e-12);
        ASSERT_NEAR(s.T, ns.T, 1e-12);
        ASSERT_EQ(s.T, s.D + s.E);
    }
}

TEST(PcnnStep, SignAndFinitenessChecks) {
    const auto m = small_model();
    pcnn::ExogenousStep heat, cool;
    cool.mode = data::Mode::cooling;
    const auto s = pcnn::initial_state(0.5);
    EXPECT_THROW(pcnn::pcnn_step(*m, s, heat, -0.1), std::invalid_argument);
    EXPECT_THROW(pcnn::pcnn_step(*m, s, cool, 0.1), std::invalid_argument);
    EXPECT_NO_THROW(pcnn::pcnn_step(*m, s, heat, 0.0));
    EXPECT_NO_THROW(pcnn::pcnn_step(*m, s, cool, 0.0));
    EXPECT_THROW(pcnn::pcnn_step(*m, s, heat, std::numeric_limits<double>::quiet_NaN()), NumericError);
    auto bad = heat;
    bad.t_out = std::numeric_limits<double>::infinity();
    EXPECT_THROW(pcnn::pcnn_step(*m, s, bad, 0.5), NumericError);
}

TEST(PcnnStep, FeedbackVariantMatchesWhenFeedbackIsTrueTemperature) {
    const auto m = small_model();
    std::mt19937_64 rng(4);
    const auto e = random_exo(rng, data::Mode::heating);
    const pcnn::PcnnState s{0.4, 0.01, 0.41};
    const auto a = pcnn::pcnn_step(*m, s, e, 1.2);
    const auto b = pcnn::pcnn_step_with_feedback(*m, s, e, 1.2, s.T);
    EXPECT_EQ(a.D, b.D);
    EXPECT_EQ(a.E, b.E);
    EXPECT_EQ(a.T, b.T);
    // A higher read-back temperature means more loss to the surroundings.
    const auto c = pcnn::pcnn_step_with_feedback(*m, s, e, 1.2, s.T + 0.01);
    EXPECT_LT(c.E, a.E);
    EXPECT_NEAR(a.E - c.E, 0.01 * (m->phys.b() + m->phys.c()), 1e-15);
}

TEST(PcnnUnforced, ZeroNetKeepsDConstant) {
    const auto m = zonectl::testing::linear_model(0.1, 0.02, 0.01, 0.1);
    std::mt19937_64 rng(5);
    std::vector<pcnn::ExogenousStep> exo;
    for (int i = 0; i < 50; ++i) exo.push_back(random_exo(rng, data::Mode::heating));
    for (double d : pcnn::pcnn_unforced(*m, 0.37, exo)) EXPECT_EQ(d, 0.37);
}

TEST(PcnnUnforced, IndependentOfControls) {
    std::mt19937_64 rng(6);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = small_model(seed);
        for (auto mode : {data::Mode::heating, data::Mode::cooling}) {
            std::vector<pcnn::ExogenousStep> exo;
            for (int i = 0; i < 96; ++i) exo.push_back(random_exo(rng, mode));
            const auto D = pcnn::pcnn_unforced(*m, 0.5, exo);
            ASSERT_EQ(D.size(), 96u);
            const double full = mode == data::Mode::heating ? 2.0 : -2.0;
            std::uniform_real_distribution<double> frac(0.0, 1.0);
            for (int variant = 0; variant < 3; ++variant) {
                auto s = pcnn::initial_state(0.5);
                for (std::size_t k = 0; k < exo.size(); ++k) {
                    const double u = variant == 0 ? 0.0 : variant == 1 ? full : full * frac(rng);
                    s = pcnn::pcnn_step(*m, s, exo[k], u);
                    ASSERT_EQ(s.D, D[k]) << "seed " << seed << " step " << k;
                }
            }
        }
    }
}

TEST(PcnnUnforced, NonFiniteNamesStep) {
    const auto m = small_model();
    std::mt19937_64 rng(7);
    std::vector<pcnn::ExogenousStep> exo;
    for (int i = 0; i < 6; ++i) exo.push_back(random_exo(rng, data::Mode::heating));
    exo[2].x[0] = std::numeric_limits<double>::quiet_NaN();
    try {
        pcnn::pcnn_unforced(*m, 0.5, exo);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(pcnn::pcnn_unforced(*m, 0.5, {}), std::invalid_argument);
}

TEST(PcnnConsistency, HandBuiltSlopeIsExact) {
    const auto m = zonectl::testing::linear_model(0.1, 0.02, 0.01, 0.25);
    const auto rep = pcnn::pcnn_consistency_check(*m, 1000, 3);
    EXPECT_EQ(rep.checked, 2000u);
    EXPECT_TRUE(rep.violations.empty());
    EXPECT_LT(rep.max_slope_error, 1e-12);
}

TEST(PcnnConsistency, RandomModelsHaveNoViolations) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto rep = pcnn::pcnn_consistency_check(*small_model(seed), 1000, seed);
        EXPECT_TRUE(rep.violations.empty());
        EXPECT_LT(rep.max_slope_error, 1e-12);
    }
}

TEST(PcnnFeatures, TimeFeaturesAreBounded) {
    const auto& recs = small_world().records;
    for (std::size_t i = 0; i < recs.size(); i += 37) {
        const auto f = pcnn::time_features(recs[i].timestamp);
        for (std::size_t j = 0; j < 4; ++j) EXPECT_LE(std::abs(f[j]), 1.0);
        const auto e = pcnn::make_exogenous(recs[i], small_world().normalizer);
        EXPECT_EQ(e.mode, recs[i].mode);
        EXPECT_DOUBLE_EQ(e.t_out, small_world().normalizer.apply(data::Feature::temperature, recs[i].t_out));
    }
}

TEST(PcnnTrain, WindowGradientMatchesCentralDifferences) {
    auto model = *small_model(13);
    model.f_net = neural::mlp_init(model.f_net.spec(), 21);  // full-size output weights
    const auto traj = zonectl::testing::short_trajectory(40, 1);
    const std::span<const data::RawRecord> window(traj.records.data() + 5, 13);
    pcnn::PcnnGradient g;
    const double loss = pcnn::pcnn_window_loss(model, window, &g);
    EXPECT_EQ(loss, pcnn::pcnn_window_loss(model, window, nullptr));
    const double h = 1e-6;
    for (std::size_t i = 0; i < model.f_net.size(); ++i) {
        auto plus = model, minus = model;
        plus.f_net.values()[i] += h;
        minus.f_net.values()[i] -= h;
        const double fd = (pcnn::pcnn_window_loss(plus, window, nullptr) - pcnn::pcnn_window_loss(minus, window, nullptr)) / (2 * h);
        ASSERT_NEAR(g.f_net.values()[i], fd, 1e-9 + 1e-4 * std::abs(fd)) << "f_net " << i;
    }
    for (std::size_t j = 0; j < 4; ++j) {
        auto plus = model, minus = model;
        double* p[] = {&plus.phys.a_raw, &plus.phys.b_raw, &plus.phys.c_raw, &plus.phys.d_raw};
        double* m[] = {&minus.phys.a_raw, &minus.phys.b_raw, &minus.phys.c_raw, &minus.phys.d_raw};
        *p[j] += h;
        *m[j] -= h;
        const double fd = (pcnn::pcnn_window_loss(plus, window, nullptr) - pcnn::pcnn_window_loss(minus, window, nullptr)) / (2 * h);
        EXPECT_NEAR(g.phys_raw[j], fd, 1e-9 + 1e-4 * std::abs(fd)) << "phys " << j;
    }
}

TEST(PcnnTrain, ZeroEpochsReturnsInitializedModel) {
    const auto& w = small_world();
    pcnn::PcnnTrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 5;
    const auto res = pcnn::pcnn_train(w.split.train, w.split.validation, cfg);
    const auto init = pcnn::pcnn_init(cfg.model, w.normalizer, 5);
    EXPECT_EQ(res.model.phys, init.phys);
    EXPECT_EQ(res.model.f_net, init.f_net);
    EXPECT_EQ(res.model.normalizer, w.normalizer);
    EXPECT_EQ(res.best_epoch, 0u);
}

TEST(PcnnTrain, ReducesValidationErrorAndStaysConsistent) {
    const auto& w = small_world();
    pcnn::PcnnTrainConfig cfg;
    cfg.epochs = 4;
    cfg.seed = 2;
    const auto res = pcnn::pcnn_train(w.split.train, w.split.validation, cfg);
    ASSERT_FALSE(res.log.empty());
    const double initial = pcnn::pcnn_multistep_mse(pcnn::pcnn_init(cfg.model, w.normalizer, 2), w.split.validation,
                                                    cfg.horizon, cfg.window_stride);
    EXPECT_LT(res.best_validation_mse, initial);
    EXPECT_NEAR(pcnn::pcnn_multistep_mse(res.model, w.split.validation, cfg.horizon, cfg.window_stride),
                res.best_validation_mse, 1e-12);
    EXPECT_TRUE(pcnn::pcnn_consistency_check(res.model, 200, 1).violations.empty());
}

TEST(PcnnTrain, RejectsBadInputs) {
    const auto& w = small_world();
    pcnn::PcnnTrainConfig cfg;
    EXPECT_THROW(pcnn::pcnn_train({}, w.split.validation, cfg), std::invalid_argument);
    cfg.horizon = 10000;
    EXPECT_THROW(pcnn::pcnn_train(w.split.train, w.split.validation, cfg), std::invalid_argument);
}

TEST(PcnnCheckpoint, RoundTripIsBitExact) {
    const auto m = small_model(12);
    const auto path = std::filesystem::temp_directory_path() / "zonectl_pcnn_roundtrip.json";
    pcnn::save_model(*m, path);
    const auto back = pcnn::load_model(path);
    EXPECT_EQ(back.phys, m->phys);
    EXPECT_EQ(back.f_net, m->f_net);
    EXPECT_EQ(back.normalizer, m->normalizer);
    std::filesystem::remove(path);
    EXPECT_ANY_THROW(pcnn::load_model(path));
}

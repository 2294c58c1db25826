#include "zonectl/pcnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "zonectl/error.hpp"

namespace zonectl::pcnn {

double softplus(double x) {
    // log(1 + e^x) without overflow for large x; floored so it never hits 0.
    if (x > 30.0) return x;
    return std::max(std::log1p(std::exp(x)), std::numeric_limits<double>::min());
}

double inverse_softplus(double y) {
    if (!(y > 0.0)) throw std::invalid_argument("inverse_softplus: argument must be positive");
    return y > 30.0 ? y : std::log(std::expm1(y));
}

PcnnPhysParams PcnnPhysParams::from_effective(double a, double b, double c, double d) {
    return {inverse_softplus(a), inverse_softplus(b), inverse_softplus(c), inverse_softplus(d)};
}

PcnnState initial_state(double measured_temperature) {
    return {measured_temperature, 0.0, measured_temperature};
}

std::array<double, kExogenousDim> time_features(data::Timestamp t) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const auto cal = data::calendar(t);
    std::array<double, kExogenousDim> x{};
    x[0] = std::sin(two_pi * (cal.month - 1) / 12.0);
    x[1] = std::cos(two_pi * (cal.month - 1) / 12.0);
    x[2] = std::sin(two_pi * cal.hour_of_day / 24.0);
    x[3] = std::cos(two_pi * cal.hour_of_day / 24.0);
    x[4] = cal.day_of_week / 6.0;
    return x;
}

ExogenousStep make_exogenous(const data::RawRecord& rec, const data::Normalizer& norm) {
    ExogenousStep exo;
    exo.x = time_features(rec.timestamp);
    exo.x[5] = norm.apply(data::Feature::solar, rec.solar);
    exo.t_out = norm.apply(data::Feature::temperature, rec.t_out);
    exo.t_neigh = norm.apply(data::Feature::temperature, rec.t_neigh);
    exo.mode = rec.mode;
    return exo;
}

std::vector<ExogenousStep> make_exogenous(std::span<const data::RawRecord> records,
                                          const data::Normalizer& norm) {
    std::vector<ExogenousStep> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(make_exogenous(r, norm));
    return out;
}

PcnnModel pcnn_init(const PcnnModelConfig& config, const data::Normalizer& norm, std::uint64_t seed) {
    neural::MlpSpec spec;
    spec.layer_sizes.push_back(1 + kExogenousDim);
    for (auto h : config.hidden) spec.layer_sizes.push_back(h);
    spec.layer_sizes.push_back(1);
    spec.hidden_activation = neural::Activation::tanh;
    spec.output_activation = neural::Activation::identity;

    PcnnModel model;
    model.f_net = neural::mlp_init(spec, seed);
    for (double& w : model.f_net.weights(model.f_net.layer_count() - 1)) w *= config.output_init_scale;
    model.phys = PcnnPhysParams::from_effective(config.a, config.b, config.c, config.d);
    model.normalizer = norm;
    return model;
}

double unforced_increment(const PcnnModel& model, double D, const ExogenousStep& exo) {
    std::array<double, 1 + kExogenousDim> input{};
    input[0] = D;
    std::copy(exo.x.begin(), exo.x.end(), input.begin() + 1);
    return neural::mlp_forward(model.f_net, input)[0];
}

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string("pcnn: non-finite ") + what);
}

}  // namespace

PcnnState pcnn_step_with_feedback(const PcnnModel& model, const PcnnState& state,
                                  const ExogenousStep& exo, double u_kw, double feedback_T) {
    if (exo.mode == data::Mode::heating && u_kw < 0.0) {
        throw std::invalid_argument("pcnn_step: negative power in heating mode");
    }
    if (exo.mode == data::Mode::cooling && u_kw > 0.0) {
        throw std::invalid_argument("pcnn_step: positive power in cooling mode");
    }
    require_finite(u_kw, "power");
    require_finite(state.D, "D");
    require_finite(state.E, "E");
    require_finite(feedback_T, "temperature");
    require_finite(exo.t_out, "outside temperature");
    require_finite(exo.t_neigh, "neighbour temperature");

    const auto& p = model.phys;
    PcnnState next;
    next.D = state.D + unforced_increment(model, state.D, exo);
    next.E = state.E + p.gain(exo.mode) * u_kw - p.b() * (feedback_T - exo.t_out) -
             p.c() * (feedback_T - exo.t_neigh);
    next.T = next.D + next.E;
    require_finite(next.T, "predicted temperature");
    return next;
}

PcnnState pcnn_step(const PcnnModel& model, const PcnnState& state, const ExogenousStep& exo,
                    double u_kw) {
    return pcnn_step_with_feedback(model, state, exo, u_kw, state.T);
}

std::vector<double> pcnn_unforced(const PcnnModel& model, double D0, std::span<const ExogenousStep> exo) {
    if (exo.empty()) throw std::invalid_argument("pcnn_unforced: empty exogenous sequence");
    std::vector<double> out;
    out.reserve(exo.size());
    double D = D0;
    for (std::size_t k = 0; k < exo.size(); ++k) {
        D = D + unforced_increment(model, D, exo[k]);
        if (!std::isfinite(D)) {
            throw NumericError("pcnn_unforced: non-finite D at step " + std::to_string(k + 1));
        }
        out.push_back(D);
    }
    return out;
}

ConsistencyReport pcnn_consistency_check(const PcnnModel& model, std::size_t n_random_states,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ConsistencyReport report;
    for (std::size_t i = 0; i < n_random_states; ++i) {
        PcnnState s;
        s.D = unit(rng);
        s.E = unit(rng) - 0.5;
        s.T = s.D + s.E;
        ExogenousStep exo;
        for (double& v : exo.x) v = 2.0 * unit(rng) - 1.0;
        exo.x[5] = unit(rng);
        exo.t_out = unit(rng);
        exo.t_neigh = unit(rng);
        const double u_base = 2.0 * unit(rng);
        const double delta = 0.01 + 2.0 * unit(rng);
        for (auto mode : {data::Mode::heating, data::Mode::cooling}) {
            exo.mode = mode;
            const double sign = mode == data::Mode::heating ? 1.0 : -1.0;
            const double u0 = sign * u_base;
            const double u1 = sign * (u_base + delta);
            const double t0 = pcnn_step(model, s, exo, u0).T;
            const double t1 = pcnn_step(model, s, exo, u1).T;
            const double expected = model.phys.gain(mode);
            const double measured = (t1 - t0) / (u1 - u0);
            // Rounding in E + g u - ... is bounded by a few ulps of the
            // magnitudes involved.
            const double scale = std::abs(t0) + std::abs(t1) + std::abs(expected * u1) + 1.0;
            const double tol = 16.0 * std::numeric_limits<double>::epsilon() * scale / std::abs(u1 - u0);
            const double err = std::abs(measured - expected);
            report.max_slope_error = std::max(report.max_slope_error, err);
            const bool wrong_direction = mode == data::Mode::heating ? !(t1 > t0) : !(t1 < t0);
            if (err > tol || !(expected > 0.0) || wrong_direction) {
                report.violations.push_back({i, mode, expected, measured});
            }
            ++report.checked;
        }
    }
    return report;
}

}  // namespace zonectl::pcnn

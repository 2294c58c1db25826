#pragma once
// Physically consistent neural network (PCNN) zone model.
//
//   D' = D + f(D, x)                                  unforced dynamics
//   E' = E + g u - b (T - T_out) - c (T - T_neigh)    energy accumulator
//   T' = D' + E'
//
// with g = a when heating and g = d when cooling. Temperatures are in
// normalized units (see data::Normalizer, temperature feature); u is in kW.
// The effective coefficients are softplus images of unconstrained raw values,
// so they stay positive throughout training.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "zonectl/data.hpp"
#include "zonectl/mlp.hpp"

namespace zonectl::pcnn {

/// Non-physical inputs of f: sin/cos month, sin/cos time of day, day of week,
/// normalized solar irradiation.
inline constexpr std::size_t kExogenousDim = 6;

double softplus(double x);
double inverse_softplus(double y);

struct PcnnPhysParams {
    double a_raw = 0.0;
    double b_raw = 0.0;
    double c_raw = 0.0;
    double d_raw = 0.0;

    double a() const { return softplus(a_raw); }
    double b() const { return softplus(b_raw); }
    double c() const { return softplus(c_raw); }
    double d() const { return softplus(d_raw); }
    double gain(data::Mode mode) const { return mode == data::Mode::heating ? a() : d(); }

    static PcnnPhysParams from_effective(double a, double b, double c, double d);
    bool operator==(const PcnnPhysParams&) const = default;
};

struct PcnnState {
    double D = 0.0;
    double E = 0.0;
    double T = 0.0;
};

/// Episode start: D = measured temperature, E = 0, so T = D + E holds.
PcnnState initial_state(double measured_temperature);

struct ExogenousStep {
    std::array<double, kExogenousDim> x{};
    double t_out = 0.0;    // normalized
    double t_neigh = 0.0;  // normalized
    data::Mode mode = data::Mode::heating;
};

std::array<double, kExogenousDim> time_features(data::Timestamp t);
ExogenousStep make_exogenous(const data::RawRecord& rec, const data::Normalizer& norm);
std::vector<ExogenousStep> make_exogenous(std::span<const data::RawRecord> records,
                                          const data::Normalizer& norm);

struct PcnnModel {
    PcnnPhysParams phys;
    neural::MlpParams f_net;  // input: [D, x...], output: scalar increment
    data::Normalizer normalizer;
};

struct PcnnModelConfig {
    std::vector<std::size_t> hidden = {32, 32};
    /// Initial effective coefficients.
    double a = 0.01;
    double b = 0.02;
    double c = 0.01;
    double d = 0.01;
    /// Output-layer weights are scaled by this at initialization so the
    /// untrained unforced dynamics start close to constant.
    double output_init_scale = 0.01;
};

PcnnModel pcnn_init(const PcnnModelConfig& config, const data::Normalizer& norm, std::uint64_t seed);

/// f(D, x).
double unforced_increment(const PcnnModel& model, double D, const ExogenousStep& exo);

/// One step. Throws std::invalid_argument if u has the wrong sign for the
/// mode, NumericError on non-finite input or output.
PcnnState pcnn_step(const PcnnModel& model, const PcnnState& state, const ExogenousStep& exo, double u_kw);

/// Like pcnn_step, but the loss terms b (T - T_out) and c (T - T_neigh) read
/// feedback_T instead of state.T. The environment feeds back the measured
/// (noisy) temperature here; with zero noise it equals pcnn_step bit for bit.
PcnnState pcnn_step_with_feedback(const PcnnModel& model, const PcnnState& state,
                                  const ExogenousStep& exo, double u_kw, double feedback_T);

/// D_1..D_H from the unforced recursion alone. Throws NumericError naming the
/// step index if a value becomes non-finite.
std::vector<double> pcnn_unforced(const PcnnModel& model, double D0, std::span<const ExogenousStep> exo);

struct ConsistencyViolation {
    std::size_t sample = 0;
    data::Mode mode = data::Mode::heating;
    double expected_slope = 0.0;
    double measured_slope = 0.0;
};

struct ConsistencyReport {
    std::size_t checked = 0;
    double max_slope_error = 0.0;
    std::vector<ConsistencyViolation> violations;
};

/// Probes random states in both modes: the finite-difference slope of T'
/// in u must equal a (heating, u >= 0) or d (cooling, u <= 0) to rounding,
/// and more heating (cooling) must never lower (raise) T'.
ConsistencyReport pcnn_consistency_check(const PcnnModel& model, std::size_t n_random_states,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training

struct PcnnTrainConfig {
    PcnnModelConfig model;
    std::size_t horizon = 48;
    std::size_t epochs = 40;
    std::size_t batch_size = 64;
    /// Window start spacing in 15-minute steps.
    std::size_t window_stride = 4;
    double learning_rate = 1e-3;
    double phys_learning_rate = 1e-2;
    double grad_clip = 1.0;  // global norm; <= 0 disables
    std::uint64_t seed = 1;
};

struct PcnnEpochLog {
    std::size_t epoch = 0;
    double train_mse = 0.0;       // normalized units^2
    double validation_mse = 0.0;  // normalized units^2
};

struct PcnnTrainResult {
    PcnnModel model;
    std::vector<PcnnEpochLog> log;
    double best_validation_mse = 0.0;
    std::size_t best_epoch = 0;
};

/// Multi-step prediction training by truncated backpropagation through time.
/// Fits the normalizer on train, and returns the model with the lowest
/// validation MSE seen (epoch 0 = the initialized model). Throws
/// std::invalid_argument on an empty training set or when the horizon
/// exceeds the shortest trajectory.
PcnnTrainResult pcnn_train(const std::vector<data::Trajectory>& train,
                           const std::vector<data::Trajectory>& validation, const PcnnTrainConfig& config);

/// Mean squared multi-step (horizon-step) temperature error in normalized units.
double pcnn_multistep_mse(const PcnnModel& model, const std::vector<data::Trajectory>& trajectories,
                          std::size_t horizon, std::size_t window_stride);

struct PcnnGradient {
    neural::MlpParams f_net;
    std::array<double, 4> phys_raw{};  // d/d a_raw, b_raw, c_raw, d_raw
};

/// Training loss of one window of consecutive samples: rollout from the
/// first measured temperature over window.size() - 1 steps, mean squared
/// error in normalized units. Fills grad when non-null.
double pcnn_window_loss(const PcnnModel& model, std::span<const data::RawRecord> window, PcnnGradient* grad);

/// Mean squared one-step-ahead error in degC^2.
double pcnn_one_step_mse(const PcnnModel& model, const std::vector<data::Trajectory>& trajectories);

// ---------------------------------------------------------------------------
// Checkpoints: { "format": "zonectl-pcnn", "version": 1,
//   "normalizer": {"temperature": {"min", "max"}, "solar": {"min", "max"}},
//   "phys_raw": {"a", "b", "c", "d"}, "f_net": <MLP checkpoint> }

void save_model(const PcnnModel& model, const std::filesystem::path& path);
PcnnModel load_model(const std::filesystem::path& path);

}  // namespace zonectl::pcnn

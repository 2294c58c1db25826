#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace zonectl::neural {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Rectified Adam: variance-rectified step, plain momentum while the
    /// second-moment estimate is unreliable.
    bool rectified = false;
};

struct OptimizerState {
    AdamConfig config;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;

    OptimizerState() = default;
    OptimizerState(std::size_t parameter_count, AdamConfig cfg);
};

/// One bias-corrected Adam (or RAdam) update, in place. Throws NumericError on
/// non-finite gradients and std::invalid_argument on shape mismatch.
void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grads);

}  // namespace zonectl::neural

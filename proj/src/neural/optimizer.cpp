#include "zonectl/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "zonectl/error.hpp"

namespace zonectl::neural {

OptimizerState::OptimizerState(std::size_t parameter_count, AdamConfig cfg)
    : config(cfg), first_moment(parameter_count, 0.0), second_moment(parameter_count, 0.0) {
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grads) {
    const std::size_t n = params.size();
    if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
        throw std::invalid_argument("adam_step: parameter/gradient/state sizes differ");
    }
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (grads[i] != 0.0) all_zero = false;
        if (!std::isfinite(grads[i])) {
            throw NumericError("adam_step: non-finite gradient at index " + std::to_string(i));
        }
    }
    const auto& cfg = state.config;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    // RAdam: length of the approximated simple moving average.
    double rect = 1.0;
    bool adaptive = true;
    if (cfg.rectified) {
        const double rho_inf = 2.0 / (1.0 - cfg.beta2) - 1.0;
        const double beta2_t = std::pow(cfg.beta2, t);
        const double rho_t = rho_inf - 2.0 * t * beta2_t / (1.0 - beta2_t);
        if (rho_t > 4.0) {
            rect = std::sqrt((rho_t - 4.0) * (rho_t - 2.0) * rho_inf /
                             ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
        } else {
            adaptive = false;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        // An all-zero gradient leaves the parameters where they are, whatever
        // momentum has accumulated.
        if (all_zero) continue;
        const double m_hat = m / bc1;
        if (adaptive) {
            const double v_hat = v / bc2;
            params[i] -= cfg.learning_rate * rect * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        } else {
            params[i] -= cfg.learning_rate * m_hat;
        }
    }
}

}  // namespace zonectl::neural

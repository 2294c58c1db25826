#pragma once
// Random oracle LP instances and a brute-force grid search over controls,
// shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <array>
#include <random>
#include <span>
#include <vector>

#include "fixtures.hpp"
#include "zonectl/oracle.hpp"

namespace zonectl::testing {

struct Instance {
    oracle::OracleInput input;
    double gain_k = 0.0;  // gain in K per kW
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t H) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance inst;
    auto& in = inst.input;
    in.normalizer = small_world().normalizer;
    const double s = in.normalizer.scale(data::Feature::temperature);
    const bool heating = u(rng) < 0.5;
    const auto to_n = [&](double c) { return in.normalizer.apply(data::Feature::temperature, c); };
    const double start = heating ? 21.5 + 3.0 * u(rng) : 22.5 + 4.0 * u(rng);
    for (std::size_t k = 0; k <= H; ++k) {
        in.D.push_back(to_n(start + 0.4 * (u(rng) - 0.5) - 0.1 * k * (heating ? 1 : -1)));
        in.noise.push_back(0.1 * (u(rng) - 0.5));
    }
    for (std::size_t k = 0; k < H; ++k) {
        in.t_out.push_back(to_n(heating ? 5.0 : 28.0));
        in.t_neigh.push_back(to_n(22.0 + u(rng)));
        const bool day = u(rng) < 0.3;
        in.lower.push_back(heating && day ? 21.0 : 23.0);
        in.upper.push_back(!heating && day ? 26.0 : 24.0);
    }
    in.E0 = 0.0;
    inst.gain_k = 0.1 + 0.5 * u(rng);
    in.gain = inst.gain_k * s;
    in.b = 0.002 + 0.03 * u(rng);
    in.c = 0.002 + 0.03 * u(rng);
    const double lambda = std::array<double, 3>{0.0, 0.5, 1.0}[static_cast<std::size_t>(u(rng) * 3) % 3];
    in.lambda_tilde = heating ? lambda : -lambda;
    in.u_low = heating ? 0.0 : -2.0;
    in.u_high = heating ? 2.0 : 0.0;
    return inst;
}

// Direct forward simulation of one control sequence, in degC, written from
// the model equations rather than from the LP.
inline double simulate_cost(const oracle::OracleInput& in, std::span<const double> u) {
    const double s = in.normalizer.scale(data::Feature::temperature);
    double E = in.E0;
    double cost = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double T = in.D[k] + E + s * in.noise[k];
        E = E + in.gain * u[k] - in.b * (T - in.t_out[k]) - in.c * (T - in.t_neigh[k]);
        const double next = in.normalizer.invert(data::Feature::temperature, in.D[k + 1] + E + s * in.noise[k + 1]);
        cost += in.lambda_tilde * u[k] + std::max(in.lower[k] - next, 0.0) + std::max(next - in.upper[k], 0.0);
    }
    return cost;
}

inline double grid_optimum(const oracle::OracleInput& in, std::size_t levels) {
    const std::size_t H = in.horizon();
    const double step = (in.u_high - in.u_low) / static_cast<double>(levels - 1);
    std::vector<std::size_t> idx(H, 0);
    std::vector<double> u(H);
    double best = oracle::kInf;
    while (true) {
        for (std::size_t k = 0; k < H; ++k) u[k] = in.u_low + step * static_cast<double>(idx[k]);
        best = std::min(best, simulate_cost(in, u));
        std::size_t k = 0;
        while (k < H && ++idx[k] == levels) idx[k++] = 0;
        if (k == H) break;
    }
    return best;
}

}  // namespace zonectl::testing

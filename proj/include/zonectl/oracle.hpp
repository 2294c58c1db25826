#pragma once
// Clairvoyant optimal control. With the unforced trajectory D, the noise
// sequence and every exogenous input known in advance, the energy accumulator
//
//   E_{k+1} = (1 - b - c) E_k + g u_k + w_k,
//   w_k     = -(b + c)(D_k + N_k) + b T_out_k + c T_neigh_k
//
// is affine in the controls, so the episode reward is maximized by a linear
// program over [u_0..u_{H-1}, eL_1..eL_H, eU_1..eU_H]:
//
//   minimize    sum_k lambda~ u_k + eL_{k+1} + eU_{k+1}
//   subject to  -T_{k+1}(u) - s eL_{k+1} <= -L_{k+1}
//                T_{k+1}(u) - s eU_{k+1} <=  U_{k+1}
//               u_low <= u_k <= u_high,   eL, eU >= 0
//
// Rows are in normalized temperature units (s = normalizer slope), slacks in
// K, and lambda~ = lambda in heating, -lambda in cooling.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "zonectl/data.hpp"
#include "zonectl/env.hpp"
#include "zonectl/lp.hpp"
#include "zonectl/pcnn.hpp"

namespace zonectl::oracle {

struct OracleInput {
    std::vector<double> D;        // D_0 .. D_H, normalized
    std::vector<double> noise;    // N_0 .. N_H, degC
    std::vector<double> t_out;    // k = 0 .. H-1, normalized
    std::vector<double> t_neigh;  // k = 0 .. H-1, normalized
    std::vector<double> lower;    // L_1 .. L_H, degC
    std::vector<double> upper;    // U_1 .. U_H, degC
    double E0 = 0.0;
    double gain = 0.0;            // a when heating, d when cooling
    double b = 0.0;
    double c = 0.0;
    double lambda_tilde = 0.0;
    double u_low = 0.0;
    double u_high = 0.0;
    data::Normalizer normalizer;

    std::size_t horizon() const { return t_out.size(); }
    /// Throws std::invalid_argument on inconsistent lengths.
    void validate() const;
};

/// Column layout of the oracle LP.
struct OracleLayout {
    std::size_t horizon = 0;
    std::size_t u(std::size_t k) const { return k; }
    std::size_t eps_lower(std::size_t k) const { return horizon + k; }      // row for T_{k+1}
    std::size_t eps_upper(std::size_t k) const { return 2 * horizon + k; }  // row for T_{k+1}
    std::size_t num_vars() const { return 3 * horizon; }
};

/// Normalized temperature map T_{k+1} = offset[k] + sum_{j<=k} coef[k][j] u_j,
/// including the measurement noise N_{k+1}. coef is H x H row-major.
struct AffineTemperatureMap {
    std::size_t horizon = 0;
    std::vector<double> offset;
    std::vector<double> coef;
};

AffineTemperatureMap temperature_map(const OracleInput& input);

LpProblem build_lp(const OracleInput& input);

/// LP objective at controls u with each slack at its smallest feasible value.
/// Equals the negated episode return of u when the environment is replayed
/// with the same noise.
double lp_objective_at(const LpProblem& problem, const OracleLayout& layout, std::span<const double> u);

/// Assembles the LP data for an episode exactly as Environment::reset would
/// see it for (trajectory, seed).
OracleInput oracle_input(const data::Trajectory& trajectory, const pcnn::PcnnModel& model,
                         const env::EnvConfig& config, std::uint64_t seed);

struct OracleResult {
    LpStatus status = LpStatus::iteration_limit;
    std::vector<double> controls;
    double lp_objective = 0.0;
    double primal_residual = 0.0;
    std::size_t iterations = 0;
    /// Replaying the controls through the environment.
    double replay_return = 0.0;
    double comfort_violation = 0.0;  // K, summed over steps
    double energy_kwh = 0.0;
    std::vector<env::EpisodeLogRow> log;
};

/// Solves the episode LP and replays the optimal controls in a fresh
/// environment with the same seed. Throws NumericError when the solver does
/// not reach optimality.
OracleResult oracle_rollout(const data::Trajectory& trajectory, std::shared_ptr<const pcnn::PcnnModel> model,
                            const env::EnvConfig& config, std::uint64_t seed,
                            const SimplexOptions& options = {});

/// Writes the episode LP in CPLEX LP format.
void dump_lp(const LpProblem& problem, const std::filesystem::path& path);

}  // namespace zonectl::oracle

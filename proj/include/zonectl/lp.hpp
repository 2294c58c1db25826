#pragma once
// Dense linear programs and a bounded-variable primal simplex solver.
//
//   minimize    c^T x
//   subject to  A_ub x <= b_ub
//               A_eq x  = b_eq
//               lower <= x <= upper      (entries may be +-infinity)

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace zonectl::oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpProblem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<double> a_ub;  // row-major, (b_ub.size() x num_vars)
    std::vector<double> b_ub;
    std::vector<double> a_eq;  // row-major, (b_eq.size() x num_vars)
    std::vector<double> b_eq;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> var_names;  // optional, used by write_lp

    explicit LpProblem(std::size_t n = 0);
    std::size_t ub_rows() const { return b_ub.size(); }
    std::size_t eq_rows() const { return b_eq.size(); }
    /// Appends a row; coefficients must have num_vars entries.
    void add_ub_row(std::span<const double> coefficients, double rhs);
    void add_eq_row(std::span<const double> coefficients, double rhs);
    /// Throws std::invalid_argument on inconsistent sizes or lower > upper.
    void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };
std::string to_string(LpStatus s);

struct LpSolution {
    std::vector<double> x;
    double objective = 0.0;
    LpStatus status = LpStatus::iteration_limit;
    std::size_t iterations = 0;
    /// Infinity norm of constraint and bound violations at x.
    double primal_residual = 0.0;
};

struct SimplexOptions {
    double pivot_tolerance = 1e-10;
    double feasibility_tolerance = 1e-8;
    double optimality_tolerance = 1e-9;
    std::size_t max_iterations = 100000;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    std::size_t degenerate_before_bland = 50;
};

/// Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
/// pricing, falling back to Bland's rule while the objective stalls.
LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options = {});

double primal_residual(const LpProblem& problem, std::span<const double> x);
double objective_value(const LpProblem& problem, std::span<const double> x);

/// CPLEX LP text format, readable by common external solvers.
void write_lp(const LpProblem& problem, std::ostream& out);

}  // namespace zonectl::oracle

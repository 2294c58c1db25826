#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "zonectl/kernels.hpp"
#include "zonectl/lp.hpp"

namespace zonectl::oracle {

LpProblem::LpProblem(std::size_t n)
    : num_vars(n), objective(n, 0.0), lower(n, 0.0), upper(n, kInf) {}

void LpProblem::add_ub_row(std::span<const double> coefficients, double rhs) {
    if (coefficients.size() != num_vars) throw std::invalid_argument("add_ub_row: wrong row length");
    a_ub.insert(a_ub.end(), coefficients.begin(), coefficients.end());
    b_ub.push_back(rhs);
}

void LpProblem::add_eq_row(std::span<const double> coefficients, double rhs) {
    if (coefficients.size() != num_vars) throw std::invalid_argument("add_eq_row: wrong row length");
    a_eq.insert(a_eq.end(), coefficients.begin(), coefficients.end());
    b_eq.push_back(rhs);
}

void LpProblem::validate() const {
    if (objective.size() != num_vars || lower.size() != num_vars || upper.size() != num_vars ||
        a_ub.size() != b_ub.size() * num_vars || a_eq.size() != b_eq.size() * num_vars) {
        throw std::invalid_argument("LpProblem: inconsistent dimensions");
    }
    for (std::size_t j = 0; j < num_vars; ++j) {
        if (lower[j] > upper[j]) throw std::invalid_argument("LpProblem: lower bound above upper bound");
        if (lower[j] == kInf || upper[j] == -kInf) throw std::invalid_argument("LpProblem: empty bound");
    }
}

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

double objective_value(const LpProblem& p, std::span<const double> x) {
    double v = 0.0;
    for (std::size_t j = 0; j < p.num_vars; ++j) v += p.objective[j] * x[j];
    return v;
}

double primal_residual(const LpProblem& p, std::span<const double> x) {
    double r = 0.0;
    for (std::size_t j = 0; j < p.num_vars; ++j) {
        r = std::max({r, p.lower[j] - x[j], x[j] - p.upper[j]});
    }
    for (std::size_t i = 0; i < p.ub_rows(); ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < p.num_vars; ++j) ax += p.a_ub[i * p.num_vars + j] * x[j];
        r = std::max(r, ax - p.b_ub[i]);
    }
    for (std::size_t i = 0; i < p.eq_rows(); ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < p.num_vars; ++j) ax += p.a_eq[i * p.num_vars + j] * x[j];
        r = std::max(r, std::abs(ax - p.b_eq[i]));
    }
    return r;
}

namespace {

enum class Where { basic, at_lower, at_upper, free_zero };

// Dense tableau over structural, logical and artificial columns.
class Tableau {
public:
    Tableau(const LpProblem& p, const SimplexOptions& opt) : p_(p), opt_(opt) {
        m_ = p.ub_rows() + p.eq_rows();
        n_struct_ = p.num_vars;
        build();
    }

    LpSolution solve() {
        LpSolution sol;
        if (n_artificial_ > 0) {
            std::vector<double> phase1(cols_, 0.0);
            for (std::size_t j = first_artificial_; j < cols_; ++j) phase1[j] = 1.0;
            const auto st = optimize(phase1, sol.iterations);
            if (st == LpStatus::iteration_limit) {
                sol.status = st;
                return finish(sol);
            }
            double infeas = 0.0;
            for (std::size_t j = first_artificial_; j < cols_; ++j) infeas += value(j);
            if (infeas > opt_.feasibility_tolerance) {
                sol.status = LpStatus::infeasible;
                return finish(sol);
            }
            for (std::size_t j = first_artificial_; j < cols_; ++j) {
                lo_[j] = 0.0;
                hi_[j] = 0.0;
                if (where_[j] != Where::basic) where_[j] = Where::at_lower;
            }
        }
        std::vector<double> phase2(cols_, 0.0);
        std::copy(p_.objective.begin(), p_.objective.end(), phase2.begin());
        sol.status = optimize(phase2, sol.iterations);
        return finish(sol);
    }

private:
    void build() {
        const std::size_t n = n_struct_;
        // Columns: structural | one logical per row | artificials (appended).
        cols_ = n + m_;
        lo_.assign(cols_, 0.0);
        hi_.assign(cols_, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            lo_[j] = p_.lower[j];
            hi_[j] = p_.upper[j];
        }
        for (std::size_t i = 0; i < p_.ub_rows(); ++i) hi_[n + i] = kInf;  // slack >= 0
        // Equality logicals stay fixed at [0, 0].

        where_.assign(cols_, Where::at_lower);
        x_nb_.assign(cols_, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (std::isfinite(lo_[j])) {
                where_[j] = Where::at_lower;
                x_nb_[j] = lo_[j];
            } else if (std::isfinite(hi_[j])) {
                where_[j] = Where::at_upper;
                x_nb_[j] = hi_[j];
            } else {
                where_[j] = Where::free_zero;
                x_nb_[j] = 0.0;
            }
        }

        std::vector<double> rows(m_ * cols_, 0.0);
        std::vector<double> rhs(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const bool ub = i < p_.ub_rows();
            const double* src = ub ? &p_.a_ub[i * n] : &p_.a_eq[(i - p_.ub_rows()) * n];
            std::copy(src, src + n, rows.begin() + i * cols_);
            rows[i * cols_ + n + i] = 1.0;
            rhs[i] = ub ? p_.b_ub[i] : p_.b_eq[i - p_.ub_rows()];
        }

        // Residual with every structural at its starting point.
        std::vector<double> resid(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            double ax = 0.0;
            for (std::size_t j = 0; j < n; ++j) ax += rows[i * cols_ + j] * x_nb_[j];
            resid[i] = rhs[i] - ax;
        }

        // Count structural nonzeros per column to find singleton columns.
        std::vector<std::size_t> nnz(n, 0), nz_row(n, 0);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (rows[i * cols_ + j] != 0.0) {
                    ++nnz[j];
                    nz_row[j] = i;
                }
            }
        }

        basis_.assign(m_, 0);
        beta_.assign(m_, 0.0);
        std::vector<bool> crashed(n, false);
        std::vector<std::size_t> need_artificial;
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t logical = n + i;
            if (resid[i] >= lo_[logical] && resid[i] <= hi_[logical]) {
                basis_[i] = logical;
                where_[logical] = Where::basic;
                beta_[i] = resid[i];
                continue;
            }
            // Crash: a singleton structural column at its lower bound that
            // can absorb the residual while staying inside its bounds.
            bool placed = false;
            for (std::size_t j = 0; j < n && !placed; ++j) {
                if (crashed[j] || nnz[j] != 1 || nz_row[j] != i || where_[j] != Where::at_lower) continue;
                const double a = rows[i * cols_ + j];
                const double xj = lo_[j] + resid[i] / a;
                if (xj < lo_[j] || xj > hi_[j]) continue;
                crashed[j] = true;
                basis_[i] = j;
                where_[j] = Where::basic;
                beta_[i] = xj;
                // Logical leaves at its nearest bound (0 for both row types).
                where_[logical] = Where::at_lower;
                x_nb_[logical] = 0.0;
                // Normalize the row so the basic column is a unit vector.
                const double inv = 1.0 / a;
                for (std::size_t k = 0; k < cols_; ++k) rows[i * cols_ + k] *= inv;
                placed = true;
            }
            if (!placed) need_artificial.push_back(i);
        }

        // Artificials for the rows still infeasible; logicals go to bound 0.
        n_artificial_ = need_artificial.size();
        first_artificial_ = cols_;
        if (n_artificial_ > 0) {
            const std::size_t new_cols = cols_ + n_artificial_;
            std::vector<double> wide(m_ * new_cols, 0.0);
            for (std::size_t i = 0; i < m_; ++i) {
                std::copy(rows.begin() + i * cols_, rows.begin() + (i + 1) * cols_, wide.begin() + i * new_cols);
            }
            for (std::size_t t = 0; t < n_artificial_; ++t) {
                const std::size_t i = need_artificial[t];
                const std::size_t col = cols_ + t;
                const double sign = resid[i] >= 0.0 ? 1.0 : -1.0;
                // Row i: A x + logical + sign * art = b  ->  art = |resid|.
                // Divide the row by sign so the artificial has coefficient 1.
                for (std::size_t k = 0; k < new_cols; ++k) wide[i * new_cols + k] *= sign;
                wide[i * new_cols + col] = 1.0;
                where_[n + i] = Where::at_lower;
                x_nb_[n + i] = 0.0;
                basis_[i] = col;
                beta_[i] = std::abs(resid[i]);
            }
            cols_ = new_cols;
            rows.swap(wide);
            lo_.resize(cols_, 0.0);
            hi_.resize(cols_, kInf);
            where_.resize(cols_, Where::basic);
            x_nb_.resize(cols_, 0.0);
        }
        tab_ = std::move(rows);
    }

    double value(std::size_t j) const {
        if (where_[j] == Where::basic) {
            for (std::size_t i = 0; i < m_; ++i) {
                if (basis_[i] == j) return beta_[i];
            }
        }
        return x_nb_[j];
    }

    double* row(std::size_t i) { return tab_.data() + i * cols_; }

    LpStatus optimize(const std::vector<double>& cost, std::size_t& iterations) {
        // Reduced costs d_j = c_j - c_B^T (B^-1 a_j).
        std::vector<double> d(cost);
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb != 0.0) kernels::active().axpy(-cb, row(i), d.data(), cols_);
        }
        std::size_t degenerate_run = 0;
        std::vector<double> pivot_row(cols_);
        while (true) {
            if (iterations >= opt_.max_iterations) return LpStatus::iteration_limit;
            const bool bland = degenerate_run >= opt_.degenerate_before_bland;

            // Pricing.
            std::size_t q = cols_;
            double best = 0.0;
            double dir = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) {
                const Where w = where_[j];
                if (w == Where::basic || lo_[j] == hi_[j]) continue;
                double cand_dir = 0.0;
                if ((w == Where::at_lower || w == Where::free_zero) && d[j] < -opt_.optimality_tolerance) {
                    cand_dir = 1.0;
                } else if ((w == Where::at_upper || w == Where::free_zero) && d[j] > opt_.optimality_tolerance) {
                    cand_dir = -1.0;
                }
                if (cand_dir == 0.0) continue;
                if (bland) {
                    q = j;
                    dir = cand_dir;
                    break;
                }
                if (std::abs(d[j]) > best) {
                    best = std::abs(d[j]);
                    q = j;
                    dir = cand_dir;
                }
            }
            if (q == cols_) return LpStatus::optimal;

            // Ratio test.
            double theta = hi_[q] - lo_[q];  // bound flip (inf when unbounded above/below)
            std::size_t leave = m_;
            bool leave_to_upper = false;
            double leave_alpha = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double alpha = dir * tab_[i * cols_ + q];
                const std::size_t bj = basis_[i];
                double limit = kInf;
                bool to_upper = false;
                if (alpha > opt_.pivot_tolerance) {
                    if (std::isfinite(lo_[bj])) limit = std::max(0.0, beta_[i] - lo_[bj]) / alpha;
                } else if (alpha < -opt_.pivot_tolerance) {
                    if (std::isfinite(hi_[bj])) {
                        limit = std::max(0.0, hi_[bj] - beta_[i]) / -alpha;
                        to_upper = true;
                    }
                } else {
                    continue;
                }
                const bool better =
                    limit < theta - 1e-12 ||
                    (limit <= theta + 1e-12 && leave < m_ &&
                     (bland ? bj < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha)));
                if (better) {
                    theta = limit;
                    leave = i;
                    leave_to_upper = to_upper;
                    leave_alpha = alpha;
                }
            }
            if (!std::isfinite(theta)) return LpStatus::unbounded;
            ++iterations;
            degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

            // Move basic values along the edge.
            for (std::size_t i = 0; i < m_; ++i) beta_[i] -= dir * theta * tab_[i * cols_ + q];

            if (leave == m_) {
                // Entering variable reaches its opposite bound; basis unchanged.
                where_[q] = dir > 0 ? Where::at_upper : Where::at_lower;
                x_nb_[q] = dir > 0 ? hi_[q] : lo_[q];
                continue;
            }

            const double entering_value = x_nb_[q] + dir * theta;
            const std::size_t out = basis_[leave];
            where_[out] = leave_to_upper ? Where::at_upper : Where::at_lower;
            x_nb_[out] = leave_to_upper ? hi_[out] : lo_[out];

            // Pivot on (leave, q).
            double* prow = row(leave);
            const double inv = 1.0 / prow[q];
            for (std::size_t k = 0; k < cols_; ++k) prow[k] *= inv;
            prow[q] = 1.0;
            std::copy(prow, prow + cols_, pivot_row.begin());
            const auto& kt = kernels::active();
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == leave) continue;
                const double f = tab_[i * cols_ + q];
                if (f == 0.0) continue;
                kt.axpy(-f, pivot_row.data(), row(i), cols_);
                tab_[i * cols_ + q] = 0.0;
            }
            const double fd = d[q];
            if (fd != 0.0) {
                kt.axpy(-fd, pivot_row.data(), d.data(), cols_);
                d[q] = 0.0;
            }
            basis_[leave] = q;
            where_[q] = Where::basic;
            beta_[leave] = entering_value;
        }
    }

    LpSolution& finish(LpSolution& sol) {
        sol.x.assign(n_struct_, 0.0);
        for (std::size_t j = 0; j < n_struct_; ++j) {
            if (where_[j] != Where::basic) sol.x[j] = x_nb_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_struct_) {
                // Snap tiny bound overshoots produced by rounding.
                const std::size_t j = basis_[i];
                sol.x[j] = std::clamp(beta_[i], lo_[j], hi_[j]);
            }
        }
        sol.objective = objective_value(p_, sol.x);
        sol.primal_residual = primal_residual(p_, sol.x);
        return sol;
    }

    const LpProblem& p_;
    const SimplexOptions& opt_;
    std::size_t m_ = 0;
    std::size_t n_struct_ = 0;
    std::size_t cols_ = 0;
    std::size_t n_artificial_ = 0;
    std::size_t first_artificial_ = 0;
    std::vector<double> tab_;
    std::vector<double> lo_, hi_, x_nb_, beta_;
    std::vector<Where> where_;
    std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options) {
    problem.validate();
    Tableau tableau(problem, options);
    return tableau.solve();
}

void write_lp(const LpProblem& p, std::ostream& out) {
    auto name = [&](std::size_t j) {
        return j < p.var_names.size() ? p.var_names[j] : "x" + std::to_string(j);
    };
    auto old_precision = out.precision(17);
    auto write_row = [&](const double* coef) {
        bool any = false;
        for (std::size_t j = 0; j < p.num_vars; ++j) {
            if (coef[j] == 0.0) continue;
            out << (coef[j] < 0 ? " - " : " + ") << std::abs(coef[j]) << ' ' << name(j);
            any = true;
        }
        if (!any) out << " 0 " << name(0);
    };
    out << "\\ zonectl oracle LP\nMinimize\n obj:";
    write_row(p.objective.data());
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < p.ub_rows(); ++i) {
        out << " ub" << i << ':';
        write_row(&p.a_ub[i * p.num_vars]);
        out << " <= " << p.b_ub[i] << '\n';
    }
    for (std::size_t i = 0; i < p.eq_rows(); ++i) {
        out << " eq" << i << ':';
        write_row(&p.a_eq[i * p.num_vars]);
        out << " = " << p.b_eq[i] << '\n';
    }
    out << "Bounds\n";
    for (std::size_t j = 0; j < p.num_vars; ++j) {
        const bool lo_inf = !std::isfinite(p.lower[j]);
        const bool hi_inf = !std::isfinite(p.upper[j]);
        if (lo_inf && hi_inf) {
            out << ' ' << name(j) << " free\n";
        } else {
            out << ' ';
            if (lo_inf) {
                out << "-inf";
            } else {
                out << p.lower[j];
            }
            out << " <= " << name(j) << " <= ";
            if (hi_inf) {
                out << "+inf";
            } else {
                out << p.upper[j];
            }
            out << '\n';
        }
    }
    out << "End\n";
    out.precision(old_precision);
}

}  // namespace zonectl::oracle

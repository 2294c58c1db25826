#include "zonectl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "zonectl/error.hpp"

namespace zonectl::oracle {

void OracleInput::validate() const {
    const std::size_t H = horizon();
    if (H == 0) throw std::invalid_argument("OracleInput: empty horizon");
    if (D.size() != H + 1 || noise.size() != H + 1 || t_neigh.size() != H || lower.size() != H ||
        upper.size() != H) {
        throw std::invalid_argument("OracleInput: inconsistent sequence lengths");
    }
    if (u_low > u_high) throw std::invalid_argument("OracleInput: u_low > u_high");
}

AffineTemperatureMap temperature_map(const OracleInput& in) {
    in.validate();
    const std::size_t H = in.horizon();
    const double s = in.normalizer.scale(data::Feature::temperature);
    const double alpha = 1.0 - in.b - in.c;

    AffineTemperatureMap map;
    map.horizon = H;
    map.offset.resize(H);
    map.coef.assign(H * H, 0.0);

    double e_free = in.E0;  // E with all controls at zero
    for (std::size_t k = 0; k < H; ++k) {
        const double w = -(in.b + in.c) * (in.D[k] + s * in.noise[k]) + in.b * in.t_out[k] + in.c * in.t_neigh[k];
        e_free = alpha * e_free + w;
        map.offset[k] = in.D[k + 1] + e_free + s * in.noise[k + 1];
        double* row = &map.coef[k * H];
        row[k] = in.gain;
        for (std::size_t j = k; j-- > 0;) row[j] = alpha * row[j + 1];
    }
    return map;
}

LpProblem build_lp(const OracleInput& in) {
    const auto map = temperature_map(in);
    const std::size_t H = map.horizon;
    const OracleLayout layout{H};
    const double s = in.normalizer.scale(data::Feature::temperature);

    LpProblem p(layout.num_vars());
    p.var_names.resize(layout.num_vars());
    for (std::size_t k = 0; k < H; ++k) {
        p.objective[layout.u(k)] = in.lambda_tilde;
        p.objective[layout.eps_lower(k)] = 1.0;
        p.objective[layout.eps_upper(k)] = 1.0;
        p.lower[layout.u(k)] = in.u_low;
        p.upper[layout.u(k)] = in.u_high;
        p.var_names[layout.u(k)] = "u" + std::to_string(k);
        p.var_names[layout.eps_lower(k)] = "eL" + std::to_string(k + 1);
        p.var_names[layout.eps_upper(k)] = "eU" + std::to_string(k + 1);
    }

    std::vector<double> row(layout.num_vars());
    for (std::size_t k = 0; k < H; ++k) {
        const double lo = in.normalizer.apply(data::Feature::temperature, in.lower[k]);
        const double hi = in.normalizer.apply(data::Feature::temperature, in.upper[k]);
        const double* coef = &map.coef[k * H];

        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t j = 0; j <= k; ++j) row[layout.u(j)] = -coef[j];
        row[layout.eps_lower(k)] = -s;
        p.add_ub_row(row, map.offset[k] - lo);

        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t j = 0; j <= k; ++j) row[layout.u(j)] = coef[j];
        row[layout.eps_upper(k)] = -s;
        p.add_ub_row(row, hi - map.offset[k]);
    }
    return p;
}

double lp_objective_at(const LpProblem& p, const OracleLayout& layout, std::span<const double> u) {
    const std::size_t H = layout.horizon;
    if (u.size() != H || p.num_vars != layout.num_vars() || p.ub_rows() != 2 * H) {
        throw std::invalid_argument("lp_objective_at: problem does not match the layout");
    }
    std::vector<double> x(layout.num_vars(), 0.0);
    std::copy(u.begin(), u.end(), x.begin());
    for (std::size_t i = 0; i < 2 * H; ++i) {
        const std::size_t k = i / 2;
        const std::size_t eps = i % 2 == 0 ? layout.eps_lower(k) : layout.eps_upper(k);
        const double* a = &p.a_ub[i * p.num_vars];
        double au = 0.0;
        for (std::size_t j = 0; j < H; ++j) au += a[j] * u[j];
        // a u + a_eps eps <= b with a_eps < 0.
        x[eps] = std::max(0.0, (au - p.b_ub[i]) / -a[eps]);
    }
    return objective_value(p, x);
}

OracleInput oracle_input(const data::Trajectory& trajectory, const pcnn::PcnnModel& model,
                         const env::EnvConfig& config, std::uint64_t seed) {
    const std::size_t H = env::episode_horizon(trajectory);
    const auto& recs = trajectory.records;
    const auto& norm = model.normalizer;
    const auto exo = pcnn::make_exogenous(std::span(recs).subspan(env::kLags, H), norm);
    const auto mode = trajectory.mode();

    OracleInput in;
    const double D0 = norm.apply(data::Feature::temperature, recs[env::kLags].t_zone);
    const auto d_rest = pcnn::pcnn_unforced(model, D0, exo);
    in.D.reserve(H + 1);
    in.D.push_back(D0);
    in.D.insert(in.D.end(), d_rest.begin(), d_rest.end());
    in.noise = env::noise_sequence(seed, H + 1, config.noise_sigma);
    for (std::size_t k = 0; k < H; ++k) {
        in.t_out.push_back(exo[k].t_out);
        in.t_neigh.push_back(exo[k].t_neigh);
        const auto b = env::bounds_at(recs[env::kLags + k + 1].timestamp, mode);
        in.lower.push_back(b.lower);
        in.upper.push_back(b.upper);
    }
    in.E0 = 0.0;
    in.gain = model.phys.gain(mode);
    in.b = model.phys.b();
    in.c = model.phys.c();
    in.lambda_tilde = mode == data::Mode::heating ? config.lambda : -config.lambda;
    const auto ab = config.action_bounds(mode);
    in.u_low = ab.low;
    in.u_high = ab.high;
    in.normalizer = norm;
    return in;
}

OracleResult oracle_rollout(const data::Trajectory& trajectory, std::shared_ptr<const pcnn::PcnnModel> model,
                            const env::EnvConfig& config, std::uint64_t seed, const SimplexOptions& options) {
    const auto input = oracle_input(trajectory, *model, config, seed);
    const auto lp = build_lp(input);
    const auto sol = solve_lp(lp, options);
    if (sol.status != LpStatus::optimal) {
        throw NumericError("oracle: LP solver finished with status " + to_string(sol.status));
    }
    const OracleLayout layout{input.horizon()};

    OracleResult res;
    res.status = sol.status;
    res.lp_objective = sol.objective;
    res.primal_residual = sol.primal_residual;
    res.iterations = sol.iterations;
    res.controls.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(layout.horizon));

    env::Environment environment(std::move(model), config);
    environment.reset(trajectory, seed);
    for (std::size_t k = 0; k < layout.horizon; ++k) {
        const auto step = environment.step(res.controls[k]);
        res.replay_return += step.reward;
        res.comfort_violation += step.info.violation;
        res.energy_kwh += step.info.energy_kwh;
        res.log.push_back({k, step.reward, step.info});
    }
    return res;
}

void dump_lp(const LpProblem& problem, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_lp(problem, out);
}

}  // namespace zonectl::oracle

// PCNN training: multi-step rollouts from a teacher-forced initial state,
// mean squared temperature error, truncated backpropagation through time.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "zonectl/error.hpp"
#include "zonectl/optimizer.hpp"
#include "zonectl/pcnn.hpp"

namespace zonectl::pcnn {

namespace {

// One training window: horizon + 1 consecutive samples, normalized.
struct Window {
    std::vector<double> target;                 // measured T, size H + 1
    std::vector<double> power;                  // size H
    std::vector<ExogenousStep> exo;             // size H
    data::Mode mode = data::Mode::heating;
};

Window make_window(std::span<const data::RawRecord> recs, const data::Normalizer& norm) {
    Window w;
    w.mode = recs.front().mode;
    for (std::size_t k = 0; k < recs.size(); ++k) {
        const auto& r = recs[k];
        w.target.push_back(norm.apply(data::Feature::temperature, r.t_zone));
        if (k + 1 < recs.size()) {
            w.power.push_back(r.power);
            w.exo.push_back(make_exogenous(r, norm));
        }
    }
    return w;
}

std::vector<Window> make_windows(const std::vector<data::Trajectory>& trajectories,
                                 const data::Normalizer& norm, std::size_t horizon, std::size_t stride) {
    // Trajectories overlap; key windows by start time so each is used once.
    std::set<data::Timestamp> seen;
    std::vector<Window> windows;
    const auto stride_seconds = data::kStep.count() * static_cast<std::int64_t>(stride);
    for (const auto& traj : trajectories) {
        const auto& recs = traj.records;
        if (recs.size() < horizon + 1) continue;
        for (std::size_t s = 0; s + horizon + 1 <= recs.size(); ++s) {
            const auto start = recs[s].timestamp;
            if (start.time_since_epoch().count() % stride_seconds != 0) continue;
            if (!seen.insert(start).second) continue;
            windows.push_back(make_window(std::span(recs).subspan(s, horizon + 1), norm));
        }
    }
    return windows;
}

using Gradients = PcnnGradient;

class Rollout {
public:
    Rollout(const PcnnModel& model, std::size_t horizon) : model_(model), horizon_(horizon) {}

    // Returns the summed squared error over the batch; fills gradients of the
    // mean loss when grads is non-null.
    double run(const std::vector<Window>& windows, std::span<const std::size_t> batch, Gradients* grads) {
        const std::size_t W = batch.size();
        const std::size_t H = horizon_;
        const std::size_t in_dim = 1 + kExogenousDim;
        D_.assign((H + 1) * W, 0.0);
        E_.assign((H + 1) * W, 0.0);
        T_.assign((H + 1) * W, 0.0);
        caches_.resize(H);
        input_.resize(W * in_dim);

        const auto& p = model_.phys;
        const double b = p.b(), c = p.c();
        for (std::size_t w = 0; w < W; ++w) {
            const double y0 = windows[batch[w]].target[0];
            D_[w] = y0;
            T_[w] = y0;
        }
        for (std::size_t k = 0; k < H; ++k) {
            for (std::size_t w = 0; w < W; ++w) {
                const auto& exo = windows[batch[w]].exo[k];
                double* row = input_.data() + w * in_dim;
                row[0] = D_[k * W + w];
                std::copy(exo.x.begin(), exo.x.end(), row + 1);
            }
            const auto f = neural::mlp_forward_batch(model_.f_net, {input_.data(), W, in_dim}, caches_[k]);
            for (std::size_t w = 0; w < W; ++w) {
                const auto& win = windows[batch[w]];
                const auto& exo = win.exo[k];
                const double Tk = T_[k * W + w];
                const double g = p.gain(win.mode);
                D_[(k + 1) * W + w] = D_[k * W + w] + f.data[w];
                E_[(k + 1) * W + w] = E_[k * W + w] + g * win.power[k] - b * (Tk - exo.t_out) -
                                      c * (Tk - exo.t_neigh);
                T_[(k + 1) * W + w] = D_[(k + 1) * W + w] + E_[(k + 1) * W + w];
            }
        }

        double sse = 0.0;
        for (std::size_t k = 1; k <= H; ++k) {
            for (std::size_t w = 0; w < W; ++w) {
                const double e = T_[k * W + w] - windows[batch[w]].target[k];
                sse += e * e;
            }
        }
        if (!std::isfinite(sse)) throw NumericError("pcnn_train: non-finite rollout");
        if (grads == nullptr) return sse;

        // Adjoint pass.
        const double norm = 2.0 / static_cast<double>(W * H);
        std::vector<double> gD(W), gE(W), upstream(W), fin_grad;
        for (std::size_t w = 0; w < W; ++w) {
            const double e = T_[H * W + w] - windows[batch[w]].target[H];
            gD[w] = norm * e;
            gE[w] = norm * e;
        }
        const double sa = 1.0 / (1.0 + std::exp(-p.a_raw));
        const double sb = 1.0 / (1.0 + std::exp(-p.b_raw));
        const double sc = 1.0 / (1.0 + std::exp(-p.c_raw));
        const double sd = 1.0 / (1.0 + std::exp(-p.d_raw));
        for (std::size_t k = H; k-- > 0;) {
            for (std::size_t w = 0; w < W; ++w) {
                const auto& win = windows[batch[w]];
                const auto& exo = win.exo[k];
                const double Tk = T_[k * W + w];
                const double ge = gE[w];
                if (win.mode == data::Mode::heating) {
                    grads->phys_raw[0] += ge * win.power[k] * sa;
                } else {
                    grads->phys_raw[3] += ge * win.power[k] * sd;
                }
                grads->phys_raw[1] += -ge * (Tk - exo.t_out) * sb;
                grads->phys_raw[2] += -ge * (Tk - exo.t_neigh) * sc;
                upstream[w] = gD[w];
            }
            neural::mlp_backward_batch(model_.f_net, caches_[k], {upstream.data(), W, 1}, &grads->f_net,
                                       &fin_grad);
            if (k == 0) break;
            for (std::size_t w = 0; w < W; ++w) {
                const double e = T_[k * W + w] - windows[batch[w]].target[k];
                const double gT = norm * e - (b + c) * gE[w];
                gD[w] = gD[w] + fin_grad[w * in_dim] + gT;
                gE[w] = gE[w] + gT;
            }
        }
        return sse;
    }

private:
    const PcnnModel& model_;
    std::size_t horizon_;
    std::vector<double> D_, E_, T_, input_;
    std::vector<neural::MlpCache> caches_;
};

double windows_mse(const PcnnModel& model, const std::vector<Window>& windows, std::size_t horizon) {
    if (windows.empty()) return std::numeric_limits<double>::quiet_NaN();
    Rollout rollout(model, horizon);
    double sse = 0.0;
    constexpr std::size_t kChunk = 256;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < windows.size(); start += kChunk) {
        idx.clear();
        for (std::size_t i = start; i < std::min(windows.size(), start + kChunk); ++i) idx.push_back(i);
        sse += rollout.run(windows, idx, nullptr);
    }
    return sse / static_cast<double>(windows.size() * horizon);
}

}  // namespace

double pcnn_multistep_mse(const PcnnModel& model, const std::vector<data::Trajectory>& trajectories,
                          std::size_t horizon, std::size_t window_stride) {
    return windows_mse(model, make_windows(trajectories, model.normalizer, horizon, window_stride), horizon);
}

double pcnn_window_loss(const PcnnModel& model, std::span<const data::RawRecord> window, PcnnGradient* grad) {
    if (window.size() < 2) throw std::invalid_argument("pcnn_window_loss: need at least 2 samples");
    const std::vector<Window> windows = {make_window(window, model.normalizer)};
    const std::size_t horizon = window.size() - 1;
    Rollout rollout(model, horizon);
    const std::size_t only[] = {0};
    if (grad != nullptr) {
        grad->f_net = neural::MlpParams(model.f_net.spec());
        grad->phys_raw.fill(0.0);
    }
    return rollout.run(windows, only, grad) / static_cast<double>(horizon);
}

double pcnn_one_step_mse(const PcnnModel& model, const std::vector<data::Trajectory>& trajectories) {
    const auto windows = make_windows(trajectories, model.normalizer, 1, 1);
    const double mse_norm = windows_mse(model, windows, 1);
    const double s = model.normalizer.scale(data::Feature::temperature);
    return mse_norm / (s * s);
}

PcnnTrainResult pcnn_train(const std::vector<data::Trajectory>& train,
                           const std::vector<data::Trajectory>& validation, const PcnnTrainConfig& config) {
    if (train.empty()) throw std::invalid_argument("pcnn_train: empty training set");
    if (config.horizon < 1) throw std::invalid_argument("pcnn_train: horizon must be >= 1");
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (const auto& t : train) shortest = std::min(shortest, t.length());
    if (config.horizon + 1 > shortest) {
        throw std::invalid_argument("pcnn_train: horizon " + std::to_string(config.horizon) +
                                    " exceeds the shortest trajectory (" + std::to_string(shortest) +
                                    " samples)");
    }

    const auto norm = data::fit_normalizer(train);
    PcnnTrainResult result;
    result.model = pcnn_init(config.model, norm, config.seed);
    if (config.epochs == 0) {
        result.best_validation_mse = std::numeric_limits<double>::quiet_NaN();
        return result;
    }

    const auto train_windows = make_windows(train, norm, config.horizon, config.window_stride);
    const auto val_windows = make_windows(validation, norm, config.horizon, config.window_stride);
    const auto& eval_windows = val_windows.empty() ? train_windows : val_windows;

    PcnnModel model = result.model;
    neural::OptimizerState f_opt(model.f_net.size(), {config.learning_rate});
    neural::OptimizerState phys_opt(4, {config.phys_learning_rate});

    result.best_validation_mse = windows_mse(model, eval_windows, config.horizon);
    result.best_epoch = 0;
    result.log.push_back({0, windows_mse(model, train_windows, config.horizon), result.best_validation_mse});

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train_windows.size());
    std::iota(order.begin(), order.end(), 0);
    Rollout rollout(model, config.horizon);
    Gradients grads{neural::MlpParams(model.f_net.spec()), {}};

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sse = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto end = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> batch(order.data() + start, end - start);
            grads.f_net.set_zero();
            grads.phys_raw.fill(0.0);
            sse += rollout.run(train_windows, batch, &grads);

            if (config.grad_clip > 0.0) {
                double sq = 0.0;
                for (double g : grads.f_net.values()) sq += g * g;
                for (double g : grads.phys_raw) sq += g * g;
                const double n = std::sqrt(sq);
                if (n > config.grad_clip) {
                    const double f = config.grad_clip / n;
                    for (double& g : grads.f_net.values()) g *= f;
                    for (double& g : grads.phys_raw) g *= f;
                }
            }
            neural::adam_step(f_opt, model.f_net.values(), grads.f_net.values());
            std::array<double, 4> raw{model.phys.a_raw, model.phys.b_raw, model.phys.c_raw, model.phys.d_raw};
            neural::adam_step(phys_opt, raw, grads.phys_raw);
            model.phys = {raw[0], raw[1], raw[2], raw[3]};
        }
        const double train_mse = sse / static_cast<double>(order.size() * config.horizon);
        const double val_mse = windows_mse(model, eval_windows, config.horizon);
        result.log.push_back({epoch, train_mse, val_mse});
        if (val_mse < result.best_validation_mse) {
            result.best_validation_mse = val_mse;
            result.best_epoch = epoch;
            result.model = model;
        }
    }
    return result;
}

}  // namespace zonectl::pcnn

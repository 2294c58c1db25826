#include "zonectl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace zonectl::neural {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("MlpSpec needs at least 2 layer sizes");
    for (auto s : layer_sizes) {
        if (s < 1) throw std::invalid_argument("MlpSpec layer sizes must be >= 1");
    }
    if (output_activation == Activation::relu) {
        throw std::invalid_argument("MlpSpec output activation must be identity or tanh");
    }
}

std::size_t MlpSpec::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
    }
    return n;
}

MlpParams::MlpParams(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t offset = 0;
    for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
        LayerSlot s;
        s.in = spec_.layer_sizes[l];
        s.out = spec_.layer_sizes[l + 1];
        s.weight_offset = offset;
        offset += s.in * s.out;
        s.bias_offset = offset;
        offset += s.out;
        slots_.push_back(s);
    }
    values_.assign(offset, 0.0);
}

std::span<double> MlpParams::weights(std::size_t layer) {
    const auto& s = slots_.at(layer);
    return std::span<double>(values_).subspan(s.weight_offset, s.in * s.out);
}

std::span<const double> MlpParams::weights(std::size_t layer) const {
    const auto& s = slots_.at(layer);
    return std::span<const double>(values_).subspan(s.weight_offset, s.in * s.out);
}

std::span<double> MlpParams::bias(std::size_t layer) {
    const auto& s = slots_.at(layer);
    return std::span<double>(values_).subspan(s.bias_offset, s.out);
}

std::span<const double> MlpParams::bias(std::size_t layer) const {
    const auto& s = slots_.at(layer);
    return std::span<const double>(values_).subspan(s.bias_offset, s.out);
}

kernels::ConstMatrixView MlpParams::weight_matrix(std::size_t layer) const {
    const auto& s = slots_.at(layer);
    return {values_.data() + s.weight_offset, s.out, s.in};
}

kernels::MatrixView MlpParams::weight_matrix(std::size_t layer) {
    const auto& s = slots_.at(layer);
    return {values_.data() + s.weight_offset, s.out, s.in};
}

bool MlpParams::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void MlpParams::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

MlpParams mlp_init(const MlpSpec& spec, std::uint64_t seed) {
    MlpParams params(spec);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const auto& s = params.slot(l);
        const double scale = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
        std::uniform_real_distribution<double> dist(-scale, scale);
        for (double& w : params.weights(l)) w = dist(rng);
    }
    return params;
}

namespace {

void apply_activation(Activation act, std::span<double> values) {
    switch (act) {
        case Activation::identity: break;
        case Activation::relu:
            for (double& v : values) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::tanh:
            for (double& v : values) v = std::tanh(v);
            break;
    }
}

// Multiplies delta by the activation derivative, expressed through the
// post-activation output y.
void scale_by_derivative(Activation act, std::span<const double> y, std::span<double> delta) {
    switch (act) {
        case Activation::identity: break;
        case Activation::relu:
            for (std::size_t i = 0; i < delta.size(); ++i) {
                if (!(y[i] > 0.0)) delta[i] = 0.0;
            }
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0 - y[i] * y[i];
            break;
    }
}

Activation layer_activation(const MlpSpec& spec, std::size_t layer) {
    return layer + 1 == spec.layer_count() ? spec.output_activation : spec.hidden_activation;
}

}  // namespace

kernels::ConstMatrixView mlp_forward_batch(const MlpParams& params, kernels::ConstMatrixView input,
                                           MlpCache& cache) {
    const auto& spec = params.spec();
    if (input.cols != spec.input_size()) {
        throw std::invalid_argument("mlp_forward: input has " + std::to_string(input.cols) +
                                    " columns, network expects " +
                                    std::to_string(spec.input_size()));
    }
    const std::size_t batch = input.rows;
    cache.batch = batch;
    cache.activations.resize(spec.layer_sizes.size());
    cache.activations[0].assign(input.data, input.data + batch * input.cols);
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const auto& s = params.slot(l);
        auto& out = cache.activations[l + 1];
        out.resize(batch * s.out);
        kernels::ConstMatrixView a{cache.activations[l].data(), batch, s.in};
        kernels::MatrixView z{out.data(), batch, s.out};
        kernels::gemm_abt(a, params.weight_matrix(l), z, false);
        const auto b = params.bias(l);
        for (std::size_t r = 0; r < batch; ++r) {
            double* row = out.data() + r * s.out;
            for (std::size_t j = 0; j < s.out; ++j) row[j] += b[j];
        }
        apply_activation(layer_activation(spec, l), out);
    }
    return {cache.activations.back().data(), batch, spec.output_size()};
}

void mlp_backward_batch(const MlpParams& params, MlpCache& cache, kernels::ConstMatrixView upstream,
                        MlpParams* param_grad, std::vector<double>* input_grad) {
    const auto& spec = params.spec();
    const std::size_t batch = cache.batch;
    if (cache.activations.size() != spec.layer_sizes.size() || upstream.rows != batch ||
        upstream.cols != spec.output_size()) {
        throw std::invalid_argument("mlp_backward: upstream shape does not match the forward pass");
    }
    if (param_grad != nullptr && !param_grad->same_shape(params)) {
        throw std::invalid_argument("mlp_backward: gradient buffer shape mismatch");
    }

    auto& delta = cache.delta;
    auto& prev = cache.delta_prev;
    delta.assign(upstream.data, upstream.data + batch * upstream.cols);

    for (std::size_t l = params.layer_count(); l-- > 0;) {
        const auto& s = params.slot(l);
        scale_by_derivative(layer_activation(spec, l), cache.activations[l + 1], delta);
        kernels::ConstMatrixView d{delta.data(), batch, s.out};
        kernels::ConstMatrixView a{cache.activations[l].data(), batch, s.in};
        if (param_grad != nullptr) {
            kernels::gemm_atb(d, a, param_grad->weight_matrix(l));
            auto gb = param_grad->bias(l);
            for (std::size_t r = 0; r < batch; ++r) {
                const double* row = delta.data() + r * s.out;
                for (std::size_t j = 0; j < s.out; ++j) gb[j] += row[j];
            }
        }
        if (l == 0 && input_grad == nullptr) break;
        prev.assign(batch * s.in, 0.0);
        kernels::gemm_ab(d, params.weight_matrix(l), kernels::MatrixView{prev.data(), batch, s.in});
        std::swap(delta, prev);
    }
    if (input_grad != nullptr) *input_grad = delta;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input) {
    MlpCache cache;
    const auto out = mlp_forward_batch(params, {input.data(), 1, input.size()}, cache);
    return {out.data, out.data + out.cols};
}

MlpGradients mlp_gradients(const MlpParams& params, std::span<const double> input,
                           std::span<const double> upstream) {
    if (upstream.size() != params.spec().output_size()) {
        throw std::invalid_argument("mlp_gradients: upstream length mismatch");
    }
    MlpCache cache;
    mlp_forward_batch(params, {input.data(), 1, input.size()}, cache);
    MlpGradients g{MlpParams(params.spec()), {}};
    mlp_backward_batch(params, cache, {upstream.data(), 1, upstream.size()}, &g.params, &g.input);
    return g;
}

}  // namespace zonectl::neural

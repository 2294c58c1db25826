#pragma once
// Multilayer perceptron with explicit reverse-mode gradients.
//
// Parameters live in one flat vector so that optimizers, Polyak averaging and
// finite-difference checks can treat a network as a single array. Layer l
// occupies [weights (out x in, row-major), bias (out)] in order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zonectl/kernels.hpp"

namespace zonectl::neural {

enum class Activation { identity, relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct MlpSpec {
    std::vector<std::size_t> layer_sizes;  // input, hidden..., output
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::identity;

    /// Throws std::invalid_argument unless there are >= 2 sizes, all >= 1,
    /// and the output activation is identity or tanh.
    void validate() const;
    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return layer_sizes.size() - 1; }
    std::size_t parameter_count() const;

    bool operator==(const MlpSpec&) const = default;
};

struct LayerSlot {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
};

class MlpParams {
public:
    MlpParams() = default;
    /// All-zero parameters shaped by spec.
    explicit MlpParams(MlpSpec spec);

    const MlpSpec& spec() const { return spec_; }
    std::size_t layer_count() const { return slots_.size(); }
    const LayerSlot& slot(std::size_t layer) const { return slots_.at(layer); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> weights(std::size_t layer);
    std::span<const double> weights(std::size_t layer) const;
    std::span<double> bias(std::size_t layer);
    std::span<const double> bias(std::size_t layer) const;

    kernels::ConstMatrixView weight_matrix(std::size_t layer) const;
    kernels::MatrixView weight_matrix(std::size_t layer);

    bool same_shape(const MlpParams& other) const { return spec_ == other.spec_; }
    bool all_finite() const;
    void set_zero();

    bool operator==(const MlpParams& other) const {
        return spec_ == other.spec_ && values_ == other.values_;
    }

private:
    MlpSpec spec_;
    std::vector<LayerSlot> slots_;
    std::vector<double> values_;
};

/// Glorot-uniform weights, zero biases. Deterministic per seed.
MlpParams mlp_init(const MlpSpec& spec, std::uint64_t seed);

/// Single-sample forward pass.
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input);

struct MlpGradients {
    MlpParams params;            // d(upstream . output) / d(params)
    std::vector<double> input;   // d(upstream . output) / d(input)
};

/// Single-sample reverse-mode gradients of upstream . output.
MlpGradients mlp_gradients(const MlpParams& params, std::span<const double> input,
                           std::span<const double> upstream);

/// Post-activation values for every layer of a batched forward pass. Index 0
/// holds the input batch. Reused across calls to avoid reallocation.
struct MlpCache {
    std::size_t batch = 0;
    std::vector<std::vector<double>> activations;
    std::vector<double> delta;
    std::vector<double> delta_prev;
};

/// Batched forward pass over the rows of input. The returned view points into
/// cache and stays valid until the cache is reused.
kernels::ConstMatrixView mlp_forward_batch(const MlpParams& params, kernels::ConstMatrixView input,
                                           MlpCache& cache);

/// Batched backward pass for the forward pass stored in cache. upstream has one
/// row per sample. Parameter gradients are summed over the batch and
/// accumulated into param_grad when it is non-null; the input gradient is
/// written (not accumulated) to input_grad when it is non-null.
void mlp_backward_batch(const MlpParams& params, MlpCache& cache, kernels::ConstMatrixView upstream,
                        MlpParams* param_grad, std::vector<double>* input_grad);

}  // namespace zonectl::neural

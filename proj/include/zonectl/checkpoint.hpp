#pragma once
// JSON checkpoints for MLP parameters.
//
// Layout:
//   { "format": "zonectl-mlp", "version": 1,
//     "spec": { "layer_sizes": [...], "hidden_activation": "relu",
//               "output_activation": "tanh" },
//     "layers": [ { "in": n, "out": m, "weights": [m*n row-major], "bias": [m] }, ... ] }
//
// Doubles are written with 17 significant digits, so a save/load cycle is
// bit-exact.

#include <filesystem>

#include <json.hpp>

#include "zonectl/mlp.hpp"

namespace zonectl::neural {

nlohmann::json spec_to_json(const MlpSpec& spec);
MlpSpec spec_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const MlpParams& params);
/// Throws std::invalid_argument on malformed input or shape mismatch.
MlpParams params_from_json(const nlohmann::json& j);

void save_params(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_params(const std::filesystem::path& path);

/// Writes j to path (pretty-printed, trailing newline). Throws
/// std::runtime_error if the file cannot be written.
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace zonectl::neural

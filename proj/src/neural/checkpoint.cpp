#include "zonectl/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace zonectl::neural {

nlohmann::json spec_to_json(const MlpSpec& spec) {
    return {{"layer_sizes", spec.layer_sizes},
            {"hidden_activation", to_string(spec.hidden_activation)},
            {"output_activation", to_string(spec.output_activation)}};
}

MlpSpec spec_from_json(const nlohmann::json& j) {
    MlpSpec spec;
    spec.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    spec.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
    spec.output_activation = activation_from_string(j.at("output_activation").get<std::string>());
    spec.validate();
    return spec;
}

nlohmann::json params_to_json(const MlpParams& params) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const auto w = params.weights(l);
        const auto b = params.bias(l);
        layers.push_back({{"in", params.slot(l).in},
                          {"out", params.slot(l).out},
                          {"weights", std::vector<double>(w.begin(), w.end())},
                          {"bias", std::vector<double>(b.begin(), b.end())}});
    }
    return {{"format", "zonectl-mlp"},
            {"version", 1},
            {"spec", spec_to_json(params.spec())},
            {"layers", layers}};
}

MlpParams params_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "zonectl-mlp") {
            throw std::invalid_argument("not an MLP checkpoint");
        }
        MlpParams params(spec_from_json(j.at("spec")));
        const auto& layers = j.at("layers");
        if (layers.size() != params.layer_count()) {
            throw std::invalid_argument("checkpoint layer count mismatch");
        }
        for (std::size_t l = 0; l < params.layer_count(); ++l) {
            const auto w = layers[l].at("weights").get<std::vector<double>>();
            const auto b = layers[l].at("bias").get<std::vector<double>>();
            auto pw = params.weights(l);
            auto pb = params.bias(l);
            if (w.size() != pw.size() || b.size() != pb.size()) {
                throw std::invalid_argument("checkpoint layer " + std::to_string(l) +
                                            " has the wrong shape");
            }
            std::copy(w.begin(), w.end(), pw.begin());
            std::copy(b.begin(), b.end(), pb.begin());
        }
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed MLP checkpoint: ") + e.what());
    }
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void save_params(const MlpParams& params, const std::filesystem::path& path) {
    write_json_file(params_to_json(params), path);
}

MlpParams load_params(const std::filesystem::path& path) {
    return params_from_json(read_json_file(path));
}

}  // namespace zonectl::neural

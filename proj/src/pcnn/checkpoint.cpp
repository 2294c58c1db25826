#include <stdexcept>

#include "zonectl/checkpoint.hpp"
#include "zonectl/pcnn.hpp"

namespace zonectl::pcnn {

void save_model(const PcnnModel& model, const std::filesystem::path& path) {
    const auto& n = model.normalizer;
    auto range = [&](data::Feature f) {
        return nlohmann::json{{"min", n.range(f).min}, {"max", n.range(f).max}};
    };
    nlohmann::json j = {
        {"format", "zonectl-pcnn"},
        {"version", 1},
        {"normalizer", {{"temperature", range(data::Feature::temperature)}, {"solar", range(data::Feature::solar)}}},
        {"phys_raw",
         {{"a", model.phys.a_raw}, {"b", model.phys.b_raw}, {"c", model.phys.c_raw}, {"d", model.phys.d_raw}}},
        {"phys_effective",
         {{"a", model.phys.a()}, {"b", model.phys.b()}, {"c", model.phys.c()}, {"d", model.phys.d()}}},
        {"f_net", neural::params_to_json(model.f_net)},
    };
    neural::write_json_file(j, path);
}

PcnnModel load_model(const std::filesystem::path& path) {
    const auto j = neural::read_json_file(path);
    try {
        if (j.at("format").get<std::string>() != "zonectl-pcnn") {
            throw std::invalid_argument(path.string() + " is not a PCNN checkpoint");
        }
        auto range = [&](const char* name) {
            const auto& r = j.at("normalizer").at(name);
            return data::FeatureRange{r.at("min").get<double>(), r.at("max").get<double>()};
        };
        PcnnModel model;
        model.normalizer = data::Normalizer({range("temperature"), range("solar")});
        const auto& raw = j.at("phys_raw");
        model.phys = {raw.at("a").get<double>(), raw.at("b").get<double>(), raw.at("c").get<double>(),
                      raw.at("d").get<double>()};
        model.f_net = neural::params_from_json(j.at("f_net"));
        if (model.f_net.spec().input_size() != 1 + kExogenousDim || model.f_net.spec().output_size() != 1) {
            throw std::invalid_argument("PCNN f-network has the wrong input/output size");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path.string() + ": malformed PCNN checkpoint: " + e.what());
    }
}

}  // namespace zonectl::pcnn

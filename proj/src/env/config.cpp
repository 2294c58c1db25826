#include <charconv>
#include <fstream>
#include <sstream>

#include "zonectl/env.hpp"
#include "zonectl/error.hpp"

namespace zonectl::env {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) { return data::format_number(v); }

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "': not a number: '" + s + "'");
    }
    return v;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "': not an integer: '" + s + "'");
    }
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + it->second + "'");
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string KeyValueConfig::dump() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

EnvConfig env_config_from(const KeyValueConfig& kv, EnvConfig cfg) {
    cfg.lambda = kv.get_double("env.lambda", cfg.lambda);
    cfg.noise_sigma = kv.get_double("env.noise_sigma", cfg.noise_sigma);
    cfg.max_heating_kw = kv.get_double("env.max_heating_kw", cfg.max_heating_kw);
    cfg.max_cooling_kw = kv.get_double("env.max_cooling_kw", cfg.max_cooling_kw);
    cfg.gamma = kv.get_double("env.gamma", cfg.gamma);
    cfg.validate();
    return cfg;
}

void env_config_to(const EnvConfig& cfg, KeyValueConfig& kv) {
    kv.set("env.lambda", format_double(cfg.lambda));
    kv.set("env.noise_sigma", format_double(cfg.noise_sigma));
    kv.set("env.max_heating_kw", format_double(cfg.max_heating_kw));
    kv.set("env.max_cooling_kw", format_double(cfg.max_cooling_kw));
    kv.set("env.gamma", format_double(cfg.gamma));
}

}  // namespace zonectl::env

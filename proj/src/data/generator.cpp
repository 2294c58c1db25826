#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "zonectl/data.hpp"

namespace zonectl::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Hidden ground truth: zone air node coupled to an envelope node.
struct RcBuilding {
    double c_zone = 3.0e6;      // J/K, air + furniture
    double c_envelope = 2.0e7;  // J/K
    double ua_zone_env = 200.0; // W/K
    double ua_env_out = 40.0;   // W/K
    double ua_window = 15.0;    // W/K, zone directly to outside
    double ua_neigh = 30.0;     // W/K
    double solar_aperture = 1.4;   // m^2 effective, gains into the zone
    double solar_envelope = 2.0;   // m^2 effective, gains into the envelope
};

struct ZoneState {
    double t_zone;
    double t_env;
};

ZoneState advance(const RcBuilding& b, ZoneState s, double t_out, double t_neigh, double solar,
                  double internal_w, double power_kw) {
    constexpr int kSubsteps = 6;
    const double dt = static_cast<double>(kStep.count()) / kSubsteps;
    for (int i = 0; i < kSubsteps; ++i) {
        const double q_zone = b.ua_zone_env * (s.t_env - s.t_zone) + b.ua_window * (t_out - s.t_zone) +
                              b.ua_neigh * (t_neigh - s.t_zone) + b.solar_aperture * solar +
                              internal_w + 1000.0 * power_kw;
        const double q_env = b.ua_zone_env * (s.t_zone - s.t_env) + b.ua_env_out * (t_out - s.t_env) +
                             b.solar_envelope * solar;
        s.t_zone += dt * q_zone / b.c_zone;
        s.t_env += dt * q_env / b.c_envelope;
    }
    return s;
}

// Daily-updated setpoints and on/off state of the historical controller.
struct HistoricalController {
    bool on = false;
    double level_kw = 1.5;
    double heat_setpoint = 22.0;
    double cool_setpoint = 25.0;
    int excitation_left = 0;
    double excitation_kw = 0.0;
};

}  // namespace

std::vector<RawRecord> generate_synthetic(const GeneratorConfig& config) {
    if (config.days < 3) throw std::invalid_argument("generate_synthetic: days must be >= 3");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const RcBuilding building;
    HistoricalController ctl;
    const auto n = static_cast<std::size_t>(config.days) * kStepsPerDay;

    double weather_ar = 0.0;
    double cloud = 0.8;
    double neigh_ar = 0.0;
    ZoneState state{21.5, 19.0};

    std::vector<RawRecord> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Timestamp t = config.start + kStep * static_cast<std::int64_t>(k);
        const CalendarInfo cal = calendar(t);
        const double doy = cal.day_of_year;
        const double hour = cal.hour_of_day;
        const Mode mode = season_of(t);

        // Weather: seasonal + diurnal sinusoids plus AR(1) noise.
        weather_ar = 0.995 * weather_ar + 0.15 * normal(rng);
        const double seasonal = 10.0 - 10.0 * std::cos(kTwoPi * (doy - 20.0) / 365.0);
        const double diurnal = -4.0 * std::cos(kTwoPi * (hour - 3.0) / 24.0);
        const double t_out = seasonal + diurnal + weather_ar;

        // Solar: diurnal bell clipped to daylight, scaled by a slow cloud process.
        if (k % kStepsPerDay == 0) cloud = std::clamp(0.25 + 0.75 * uniform(rng), 0.25, 1.0);
        const double day_length = 12.0 + 4.0 * std::sin(kTwoPi * (doy - 80.0) / 365.0);
        const double sunrise = 12.5 - day_length / 2.0;
        const double peak = 550.0 + 250.0 * std::sin(kTwoPi * (doy - 80.0) / 365.0);
        double solar = 0.0;
        if (hour > sunrise && hour < sunrise + day_length) {
            solar = peak * std::sin(std::numbers::pi * (hour - sunrise) / day_length);
            solar *= std::clamp(cloud + 0.1 * normal(rng), 0.05, 1.0);
        }
        solar = std::max(solar, 0.0);

        // Neighbouring zone: held near its own setpoint with slow drift.
        neigh_ar = 0.99 * neigh_ar + 0.05 * normal(rng);
        const double neigh_base = mode == Mode::heating ? 22.0 : 24.5;
        const double t_neigh =
            std::clamp(neigh_base + 0.04 * (t_out - 12.0) + 0.6 * neigh_ar + 0.0015 * solar, 15.0, 32.0);

        // Historical controller: daily random setpoints, 1 K hysteresis with a
        // random power level, plus random excitation pulses.
        if (k % kStepsPerDay == 0) {
            ctl.heat_setpoint = 20.5 + 2.5 * uniform(rng);
            ctl.cool_setpoint = 24.0 + 2.0 * uniform(rng);
        }
        const bool occupied = hour < 8.0 || hour >= 18.0;
        const double internal_w = occupied ? 120.0 : 40.0;
        double power = 0.0;
        if (mode == Mode::heating) {
            if (!ctl.on && state.t_zone < ctl.heat_setpoint) {
                ctl.on = true;
                ctl.level_kw = 0.5 + 1.5 * uniform(rng);
            } else if (ctl.on && state.t_zone >= ctl.heat_setpoint + 1.0) {
                ctl.on = false;
            }
            power = ctl.on ? ctl.level_kw : 0.0;
        } else {
            if (!ctl.on && state.t_zone > ctl.cool_setpoint) {
                ctl.on = true;
                ctl.level_kw = 0.5 + 1.5 * uniform(rng);
            } else if (ctl.on && state.t_zone <= ctl.cool_setpoint - 1.0) {
                ctl.on = false;
            }
            power = ctl.on ? -ctl.level_kw : 0.0;
        }
        if (ctl.excitation_left == 0 && uniform(rng) < 0.03) {
            ctl.excitation_left = 1 + static_cast<int>(4.0 * uniform(rng));
            ctl.excitation_kw = 2.0 * uniform(rng);
        }
        if (ctl.excitation_left > 0) {
            --ctl.excitation_left;
            power = mode == Mode::heating ? ctl.excitation_kw : -ctl.excitation_kw;
        }

        RawRecord rec;
        rec.timestamp = t;
        rec.t_zone = state.t_zone + config.measurement_sigma * normal(rng);
        rec.t_neigh = t_neigh;
        rec.t_out = t_out;
        rec.solar = solar;
        rec.power = power;
        rec.mode = mode;
        out.push_back(rec);

        state = advance(building, state, t_out, t_neigh, solar, internal_w, power);
    }
    return out;
}

std::vector<RawRecord> generate_synthetic(int days, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.days = days;
    cfg.seed = seed;
    return generate_synthetic(cfg);
}

}  // namespace zonectl::data

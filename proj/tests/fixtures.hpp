#pragma once

#include <memory>
#include <random>
#include <vector>

#include "zonectl/data.hpp"
#include "zonectl/env.hpp"
#include "zonectl/pcnn.hpp"

namespace zonectl::testing {

// 30 synthetic days, split and normalized once per process.
struct SmallWorld {
    std::vector<data::RawRecord> records;
    data::DatasetSplit split;
    data::Normalizer normalizer;
};

inline const SmallWorld& small_world() {
    static const SmallWorld w = [] {
        SmallWorld s;
        data::GeneratorConfig g;
        g.days = 30;
        g.seed = 11;
        s.records = data::generate_synthetic(g);
        s.split = data::split_dataset(s.records);
        s.normalizer = data::fit_normalizer(s.split.train);
        return s;
    }();
    return w;
}

// Untrained but well-formed PCNN; f is small and smooth.
inline std::shared_ptr<const pcnn::PcnnModel> small_model(std::uint64_t seed = 3) {
    pcnn::PcnnModelConfig cfg;
    cfg.output_init_scale = 0.05;
    return std::make_shared<const pcnn::PcnnModel>(pcnn::pcnn_init(cfg, small_world().normalizer, seed));
}

// A PCNN with exactly the given coefficients and f == 0.
inline std::shared_ptr<const pcnn::PcnnModel> linear_model(double a, double b, double c, double d) {
    pcnn::PcnnModelConfig cfg;
    auto m = pcnn::pcnn_init(cfg, small_world().normalizer, 1);
    m.f_net.set_zero();
    m.phys = pcnn::PcnnPhysParams::from_effective(a, b, c, d);
    return std::make_shared<const pcnn::PcnnModel>(std::move(m));
}

// A trajectory of exactly n samples cut from the small world.
inline data::Trajectory short_trajectory(std::size_t n, std::size_t which = 0) {
    const auto& pool = small_world().split.train;
    const auto& src = pool.at(which % pool.size());
    data::Trajectory t;
    t.records.assign(src.records.begin(), src.records.begin() + static_cast<std::ptrdiff_t>(n));
    return t;
}

// Hand-made trajectory starting at midnight, constant temperatures.
inline data::Trajectory flat_trajectory(std::size_t n, double t_zone, double t_around,
                                        data::Mode mode = data::Mode::heating) {
    data::Trajectory t;
    const data::Timestamp start = std::chrono::sys_days{std::chrono::year{2023} / (mode == data::Mode::heating ? 2 : 7) / 1};
    for (std::size_t i = 0; i < n; ++i) {
        data::RawRecord r;
        r.timestamp = start + data::kStep * static_cast<int>(i);
        r.t_zone = t_zone;
        r.t_neigh = t_around;
        r.t_out = t_around;
        r.mode = mode;
        t.records.push_back(r);
    }
    return t;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace zonectl::testing

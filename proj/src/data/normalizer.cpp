#include <algorithm>
#include <limits>
#include <stdexcept>

#include "zonectl/data.hpp"

namespace zonectl::data {

Normalizer::Normalizer(std::vector<FeatureRange> ranges) : ranges_(std::move(ranges)) {
    if (ranges_.size() != kFeatureCount) throw std::invalid_argument("Normalizer: wrong feature count");
    for (const auto& r : ranges_) {
        if (!(r.max > r.min)) throw std::invalid_argument("Normalizer: constant feature (max <= min)");
    }
}

const FeatureRange& Normalizer::range(Feature f) const {
    return ranges_.at(static_cast<std::size_t>(f));
}

double Normalizer::scale(Feature f) const {
    const auto& r = range(f);
    return (kHigh - kLow) / (r.max - r.min);
}

double Normalizer::apply(Feature f, double value) const {
    const auto& r = range(f);
    return kLow + (value - r.min) * (kHigh - kLow) / (r.max - r.min);
}

double Normalizer::invert(Feature f, double normalized) const {
    const auto& r = range(f);
    return r.min + (normalized - kLow) * (r.max - r.min) / (kHigh - kLow);
}

Normalizer fit_normalizer(const std::vector<Trajectory>& train) {
    if (train.empty()) throw std::invalid_argument("fit_normalizer: empty training set");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<FeatureRange> ranges(kFeatureCount, FeatureRange{inf, -inf});
    auto widen = [&](Feature f, double v) {
        auto& r = ranges[static_cast<std::size_t>(f)];
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
    };
    for (const auto& traj : train) {
        for (const auto& rec : traj.records) {
            widen(Feature::temperature, rec.t_zone);
            widen(Feature::temperature, rec.t_neigh);
            widen(Feature::temperature, rec.t_out);
            widen(Feature::solar, rec.solar);
        }
    }
    return Normalizer(std::move(ranges));
}

}  // namespace zonectl::data

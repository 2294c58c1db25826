#include <stdexcept>

#include "zonectl/data.hpp"

namespace zonectl::data {

std::vector<Trajectory> extract_trajectories(const std::vector<RawRecord>& records,
                                             std::size_t min_len, std::size_t max_len,
                                             std::size_t stride) {
    if (min_len < 1 || max_len < min_len || stride < 1) {
        throw std::invalid_argument("extract_trajectories: need 1 <= min_len <= max_len, stride >= 1");
    }
    std::vector<Trajectory> out;
    auto emit_run = [&](std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        if (n < min_len) return;
        if (n < max_len) {
            out.push_back({{records.begin() + begin, records.begin() + end}});
            return;
        }
        for (std::size_t s = begin; s + max_len <= end; s += stride) {
            out.push_back({{records.begin() + s, records.begin() + s + max_len}});
        }
    };

    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.valid) {
            if (in_run) emit_run(run_start, i);
            in_run = false;
            continue;
        }
        if (in_run) {
            const auto& prev = records[i - 1];
            if (r.timestamp - prev.timestamp != kStep || r.mode != prev.mode) {
                emit_run(run_start, i);
                run_start = i;
            }
        } else {
            run_start = i;
            in_run = true;
        }
    }
    if (in_run) emit_run(run_start, records.size());
    return out;
}

DatasetSplit split_dataset(const std::vector<RawRecord>& records, const SplitConfig& config) {
    if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0)) {
        throw std::invalid_argument("validation_fraction must lie in (0, 1)");
    }
    DatasetSplit split;
    if (records.empty()) return split;
    const auto first = records.front().timestamp;
    const auto last = records.back().timestamp;
    const auto span = (last - first).count();
    const Timestamp cut =
        first + std::chrono::seconds(static_cast<std::int64_t>(span * (1.0 - config.validation_fraction)));
    std::vector<RawRecord> train, validation;
    for (const auto& r : records) (r.timestamp < cut ? train : validation).push_back(r);
    split.train = extract_trajectories(train, config.min_len, config.max_len, config.stride);
    split.validation = extract_trajectories(validation, config.min_len, config.max_len, config.stride);
    return split;
}

std::vector<std::size_t> evenly_spaced(std::size_t n, std::size_t count) {
    std::vector<std::size_t> idx;
    if (count >= n) {
        for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
        return idx;
    }
    for (std::size_t i = 0; i < count; ++i) idx.push_back(i * n / count);
    return idx;
}

}  // namespace zonectl::data

#include "zonectl/env.hpp"
#include "zonectl/oracle.hpp"

namespace zonectl::env {

double unavoidable_penalty(const data::Trajectory& trajectory, std::shared_ptr<const pcnn::PcnnModel> model,
                           const EnvConfig& config, std::uint64_t seed) {
    EnvConfig comfort_only = config;
    comfort_only.lambda = 0.0;
    const auto res = oracle::oracle_rollout(trajectory, std::move(model), comfort_only, seed);
    return res.comfort_violation;
}

}  // namespace zonectl::env

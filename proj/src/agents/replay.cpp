#include <algorithm>
#include <stdexcept>

#include "zonectl/agents.hpp"

namespace zonectl::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim) : capacity_(capacity), obs_dim_(obs_dim) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    if (obs_dim == 0) throw std::invalid_argument("ReplayBuffer: obs_dim must be >= 1");
}

void ReplayBuffer::add(std::span<const double> obs, double action, double reward,
                       std::span<const double> next_obs, bool done) {
    if (obs.size() != obs_dim_ || next_obs.size() != obs_dim_) {
        throw std::invalid_argument("ReplayBuffer::add: observation dimension mismatch");
    }
    if (size_ < capacity_ && next_ == size_) {
        obs_.insert(obs_.end(), obs.begin(), obs.end());
        next_obs_.insert(next_obs_.end(), next_obs.begin(), next_obs.end());
        action_.push_back(action);
        reward_.push_back(reward);
        done_.push_back(done ? 1.0 : 0.0);
    } else {
        std::copy(obs.begin(), obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(next_ * obs_dim_));
        std::copy(next_obs.begin(), next_obs.end(),
                  next_obs_.begin() + static_cast<std::ptrdiff_t>(next_ * obs_dim_));
        action_[next_] = action;
        reward_[next_] = reward;
        done_[next_] = done ? 1.0 : 0.0;
    }
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
    ++insertions_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, std::mt19937_64& rng) const {
    if (size_ == 0) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    std::vector<std::size_t> idx(count);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

void ReplayBuffer::gather(std::span<const std::size_t> indices, ReplayBatch& out) const {
    const std::size_t n = indices.size();
    out.size = n;
    out.obs_dim = obs_dim_;
    out.obs.resize(n * obs_dim_);
    out.next_obs.resize(n * obs_dim_);
    out.action.resize(n);
    out.reward.resize(n);
    out.done.resize(n);
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t i = indices[b];
        if (i >= size_) throw std::out_of_range("ReplayBuffer::gather: index out of range");
        std::copy_n(obs_.begin() + static_cast<std::ptrdiff_t>(i * obs_dim_), obs_dim_,
                    out.obs.begin() + static_cast<std::ptrdiff_t>(b * obs_dim_));
        std::copy_n(next_obs_.begin() + static_cast<std::ptrdiff_t>(i * obs_dim_), obs_dim_,
                    out.next_obs.begin() + static_cast<std::ptrdiff_t>(b * obs_dim_));
        out.action[b] = action_[i];
        out.reward[b] = reward_[i];
        out.done[b] = done_[i];
    }
}

ReplayBatch ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
    ReplayBatch batch;
    const auto idx = sample_indices(count, rng);
    gather(idx, batch);
    return batch;
}

}  // namespace zonectl::agents

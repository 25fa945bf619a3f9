#pragma once

#include <cstdint>
#include <vector>

#include "cxflow/rng.hpp"
#include "cxflow/vehicle.hpp"

namespace cxflow {

struct Transition {
    std::vector<float> obs;
    std::vector<float> next_obs;
    Action action = Action::Stop;
    double reward = 0.0;
    double discount_next = 0.0; // gamma, or 0 on terminal
};

struct SampledBatch {
    std::vector<size_t> indices;   // buffer positions, for priority updates
    std::vector<const Transition*> items;
    std::vector<double> is_weights; // normalized by the batch maximum
};

// Proportional prioritized replay over a fixed-capacity ring (oldest-first
// eviction). The sum tree stores priority^alpha; new transitions enter at the
// current maximum priority.
class PrioritizedReplay {
public:
    PrioritizedReplay(size_t capacity, double alpha);

    void add(Transition t);
    size_t size() const { return size_; }
    size_t capacity() const { return capacity_; }

    // P(i) = p_i^alpha / sum_j p_j^alpha; w_i = (N * P(i))^-beta / max_batch.
    // Throws when fewer than batch transitions are stored.
    SampledBatch sample(size_t batch, double beta, Rng& rng) const;

    // priorities become |td_error| + 1e-6
    void update_priorities(const std::vector<size_t>& indices,
                           const std::vector<double>& td_errors);

    const Transition& at(size_t i) const { return data_[i]; }

private:
    size_t capacity_;
    double alpha_;
    size_t size_ = 0;
    size_t head_ = 0;
    double max_priority_ = 1.0;
    std::vector<Transition> data_;
    std::vector<double> tree_; // binary sum tree over priority^alpha
    size_t tree_base_ = 0;

    void tree_set(size_t i, double value);
    size_t tree_find(double mass) const;
};

} // namespace cxflow

#include "cxflow/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace cxflow {

PrioritizedReplay::PrioritizedReplay(size_t capacity, double alpha)
    : capacity_(capacity), alpha_(alpha) {
    if (capacity == 0) throw std::invalid_argument("PrioritizedReplay: zero capacity");
    tree_base_ = 1;
    while (tree_base_ < capacity_) tree_base_ <<= 1;
    tree_.assign(2 * tree_base_, 0.0);
    data_.resize(capacity_);
}

void PrioritizedReplay::tree_set(size_t i, double value) {
    size_t node = tree_base_ + i;
    tree_[node] = value;
    node >>= 1;
    while (node >= 1) {
        tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
        node >>= 1;
    }
}

size_t PrioritizedReplay::tree_find(double mass) const {
    size_t node = 1;
    while (node < tree_base_) {
        if (mass < tree_[2 * node] || tree_[2 * node + 1] == 0.0) {
            node = 2 * node;
        } else {
            mass -= tree_[2 * node];
            node = 2 * node + 1;
        }
    }
    size_t idx = node - tree_base_;
    return idx < size_ ? idx : size_ - 1;
}

void PrioritizedReplay::add(Transition t) {
    data_[head_] = std::move(t);
    tree_set(head_, std::pow(max_priority_, alpha_));
    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

SampledBatch PrioritizedReplay::sample(size_t batch, double beta, Rng& rng) const {
    if (size_ == 0) throw std::runtime_error("PrioritizedReplay: empty buffer");
    if (size_ < batch) throw std::runtime_error("PrioritizedReplay: fewer transitions than batch");
    double total = tree_[1];
    SampledBatch out;
    out.indices.reserve(batch);
    out.items.reserve(batch);
    out.is_weights.reserve(batch);
    double n = static_cast<double>(size_);
    double max_w = 0.0;
    for (size_t k = 0; k < batch; ++k) {
        size_t idx = tree_find(rng.uniform() * total);
        out.indices.push_back(idx);
        out.items.push_back(&data_[idx]);
        double prob = tree_[tree_base_ + idx] / total;
        double w = std::pow(n * prob, -beta);
        out.is_weights.push_back(w);
        max_w = std::max(max_w, w);
    }
    if (max_w > 0.0)
        for (double& w : out.is_weights) w /= max_w;
    return out;
}

void PrioritizedReplay::update_priorities(const std::vector<size_t>& indices,
                                          const std::vector<double>& td_errors) {
    for (size_t k = 0; k < indices.size(); ++k) {
        double p = std::abs(td_errors[k]) + 1e-6;
        max_priority_ = std::max(max_priority_, p);
        tree_set(indices[k], std::pow(p, alpha_));
    }
}

} // namespace cxflow

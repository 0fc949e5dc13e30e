#include "sardonics/weight_tree.hpp"

#include <cmath>
#include <stdexcept>

namespace sardonics {

namespace {

constexpr std::size_t kRebuildInterval = 1u << 16;  // bounds ancestor-sum drift

void check_weight(double w) {
    if (!(w >= 0.0) || !std::isfinite(w))
        throw std::invalid_argument("weights must be finite and non-negative");
}

std::size_t pow2_at_least(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

WeightTree::WeightTree(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("empty weight tree");
    base_ = pow2_at_least(capacity_);
    nodes_.assign(2 * base_, 0.0);
    leaves_.assign(capacity_, 0.0);
}

WeightTree::WeightTree(const std::vector<double>& weights)
    : WeightTree(weights.size()) {
    assign(weights);
}

void WeightTree::assign(const std::vector<double>& weights) {
    if (weights.size() != capacity_)
        throw std::invalid_argument("weight vector size mismatch");
    for (double w : weights) check_weight(w);
    leaves_ = weights;
    rebuild();
}

void WeightTree::rebuild() {
    for (std::size_t i = 0; i < base_; ++i)
        nodes_[base_ + i] = i < capacity_ ? leaves_[i] : 0.0;
    for (std::size_t i = base_ - 1; i >= 1; --i)
        nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
    updates_since_rebuild_ = 0;
}

double WeightTree::get(std::size_t i) const {
    if (i >= capacity_) throw std::out_of_range("leaf index out of range");
    return leaves_[i];
}

void WeightTree::update(std::size_t i, double weight) {
    if (i >= capacity_) throw std::out_of_range("leaf index out of range");
    check_weight(weight);
    leaves_[i] = weight;
    if (++updates_since_rebuild_ >= kRebuildInterval) {
        rebuild();
        return;
    }
    std::size_t node = base_ + i;
    nodes_[node] = weight;
    for (node /= 2; node >= 1; node /= 2)
        nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
}

std::size_t WeightTree::sample(double u) const {
    const double t = total();
    if (!(t > 0.0)) throw std::domain_error("sampling from empty support");
    double target = u * t;
    std::size_t node = 1;
    while (node < base_) {
        const double left = nodes_[2 * node];
        if (target < left) {
            node = 2 * node;
        } else {
            target -= left;
            node = 2 * node + 1;
        }
    }
    std::size_t leaf = node - base_;
    // rounding at a boundary can land on a zero leaf; step to the nearest
    // positive one
    if (leaf >= capacity_ || leaves_[leaf] == 0.0) {
        std::size_t lo = leaf >= capacity_ ? capacity_ - 1 : leaf;
        while (lo > 0 && leaves_[lo] == 0.0) --lo;
        if (leaves_[lo] == 0.0) {
            lo = leaf;
            while (lo + 1 < capacity_ && leaves_[lo] == 0.0) ++lo;
        }
        leaf = lo;
    }
    return leaf;
}

FlatWeightStore::FlatWeightStore(std::size_t capacity) : weights_(capacity, 0.0) {
    if (capacity == 0) throw std::invalid_argument("empty weight store");
}

FlatWeightStore::FlatWeightStore(const std::vector<double>& weights)
    : FlatWeightStore(weights.size()) {
    assign(weights);
}

void FlatWeightStore::assign(const std::vector<double>& weights) {
    if (weights.size() != weights_.size())
        throw std::invalid_argument("weight vector size mismatch");
    for (double w : weights) check_weight(w);
    weights_ = weights;
}

void FlatWeightStore::update(std::size_t i, double weight) {
    if (i >= weights_.size()) throw std::out_of_range("leaf index out of range");
    check_weight(weight);
    weights_[i] = weight;
}

double FlatWeightStore::total() const {
    double t = 0.0;
    for (double w : weights_) t += w;
    return t;
}

std::size_t FlatWeightStore::sample(double u) const {
    const double t = total();
    if (!(t > 0.0)) throw std::domain_error("sampling from empty support");
    const double target = u * t;
    double acc = 0.0;
    std::size_t last_positive = 0;
    bool seen = false;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] == 0.0) continue;
        acc += weights_[i];
        last_positive = i;
        seen = true;
        if (target < acc) return i;
    }
    if (!seen) throw std::domain_error("sampling from empty support");
    return last_positive;
}

}  // namespace sardonics

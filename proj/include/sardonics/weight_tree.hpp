#pragma once

#include <cstddef>
#include <vector>

namespace sardonics {

/// Sum tree over non-negative leaf weights supporting O(log n) inverse-CDF
/// sampling and single-leaf updates. Laid out as an implicit complete binary
/// tree over the next power of two >= capacity; missing leaves weigh zero.
class WeightTree {
public:
    explicit WeightTree(const std::vector<double>& weights);
    explicit WeightTree(std::size_t capacity);  // all-zero leaves

    std::size_t capacity() const { return capacity_; }
    double total() const { return nodes_[1]; }
    double get(std::size_t i) const;
    void update(std::size_t i, double weight);
    void assign(const std::vector<double>& weights);

    // Unique leaf i with prefix_sum(i) <= u * total < prefix_sum(i+1),
    // prefix sums taken in leaf order. Requires total > 0.
    std::size_t sample(double u) const;

private:
    void rebuild();

    std::size_t capacity_ = 0;
    std::size_t base_ = 1;                 // index of first leaf
    std::vector<double> nodes_;            // nodes_[1] is the root
    std::vector<double> leaves_;           // exact leaf values, drift-free
    std::size_t updates_since_rebuild_ = 0;
};

/// Flat candidate store with the same contract as WeightTree; sampling scans
/// the weight vector with a freshly accumulated prefix sum (O(n) per draw).
/// Cheaper than the tree for densely connected models.
class FlatWeightStore {
public:
    explicit FlatWeightStore(const std::vector<double>& weights);
    explicit FlatWeightStore(std::size_t capacity);

    std::size_t capacity() const { return weights_.size(); }
    double total() const;
    double get(std::size_t i) const { return weights_[i]; }
    void update(std::size_t i, double weight);
    void assign(const std::vector<double>& weights);
    std::size_t sample(double u) const;

private:
    std::vector<double> weights_;
};

}  // namespace sardonics

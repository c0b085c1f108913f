#pragma once

#include <cstddef>
#include <span>
#include <unordered_set>
#include <vector>

namespace trackcast::evalkit {

struct PairIndex {
    std::size_t t = 0;
    std::size_t l = 0;
    std::size_t side = 0;
    bool operator==(const PairIndex&) const = default;
};

struct Pair {
    double observed = 0.0;
    double predicted = 0.0;
    PairIndex index;
};

// Observed/predicted pairs with unique (t, l, side) provenance.
class PairSet {
public:
    PairSet() = default;

    // Throws UsageError if the index is already present.
    void add(double observed, double predicted, PairIndex index);
    void add(const Pair& pair) { add(pair.observed, pair.predicted, pair.index); }

    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    const std::vector<Pair>& pairs() const { return pairs_; }
    auto begin() const { return pairs_.begin(); }
    auto end() const { return pairs_.end(); }

private:
    struct Hash {
        std::size_t operator()(const PairIndex& i) const noexcept {
            return (i.t * 0x9E3779B97F4A7C15ull) ^ (i.l * 0xC2B2AE3D27D4EB4Full) ^ i.side;
        }
    };
    std::vector<Pair> pairs_;
    std::unordered_set<PairIndex, Hash> seen_;
};

// Empty sets throw UsageError.
double rmse(const PairSet& pairs);
// Needs at least two pairs; constant observed values throw DegenerateFitError.
double r_squared(const PairSet& pairs);
// Percentage of pairs with |y - yhat| < epsilon (strict). epsilon <= 0 throws UsageError.
double accuracy(const PairSet& pairs, double epsilon);
// Pairs whose observed value is below alpha; may be empty.
PairSet threshold_subset(const PairSet& pairs, double alpha);

// Rank correlation with average ranks for ties. Needs two equally sized
// series of length >= 2 that are not constant.
double spearman(std::span<const double> a, std::span<const double> b);

} // namespace trackcast::evalkit

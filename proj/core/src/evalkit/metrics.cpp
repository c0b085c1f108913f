#include "trackcast/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trackcast/errors.hpp"

namespace trackcast::evalkit {

void PairSet::add(double observed, double predicted, PairIndex index) {
    if (!seen_.insert(index).second) {
        throw UsageError("duplicate pair index t=" + std::to_string(index.t) + " l=" + std::to_string(index.l) +
                         " side=" + std::to_string(index.side));
    }
    pairs_.push_back({observed, predicted, index});
}

namespace {

void require_non_empty(const PairSet& pairs, const char* metric) {
    if (pairs.empty()) throw UsageError(std::string(metric) + " of an empty pair set");
}

} // namespace

double rmse(const PairSet& pairs) {
    require_non_empty(pairs, "rmse");
    double sq = 0.0;
    for (const auto& p : pairs) sq += (p.observed - p.predicted) * (p.observed - p.predicted);
    return std::sqrt(sq / static_cast<double>(pairs.size()));
}

double r_squared(const PairSet& pairs) {
    if (pairs.size() < 2) throw UsageError("r_squared needs at least two pairs");
    double mean = 0.0;
    for (const auto& p : pairs) mean += p.observed;
    mean /= static_cast<double>(pairs.size());
    double res = 0.0, tot = 0.0;
    for (const auto& p : pairs) {
        res += (p.observed - p.predicted) * (p.observed - p.predicted);
        tot += (p.observed - mean) * (p.observed - mean);
    }
    if (tot == 0.0) throw DegenerateFitError("r_squared undefined for constant observations");
    return 1.0 - res / tot;
}

double accuracy(const PairSet& pairs, double epsilon) {
    if (!(epsilon > 0.0)) throw UsageError("accuracy tolerance must be positive, got " + std::to_string(epsilon));
    require_non_empty(pairs, "accuracy");
    std::size_t inside = 0;
    for (const auto& p : pairs)
        if (std::abs(p.observed - p.predicted) < epsilon) ++inside;
    return 100.0 * static_cast<double>(inside) / static_cast<double>(pairs.size());
}

PairSet threshold_subset(const PairSet& pairs, double alpha) {
    PairSet out;
    for (const auto& p : pairs)
        if (p.observed < alpha) out.add(p);
    return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    return rank;
}

} // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("spearman series lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()) + " differ");
    }
    if (a.size() < 2) throw UsageError("spearman needs at least two observations");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DegenerateFitError("spearman undefined for a constant series");
    return sab / std::sqrt(saa * sbb);
}

} // namespace trackcast::evalkit

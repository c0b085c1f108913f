#include "trackcast/trackgen/dataset.hpp"

#include <cmath>

#include "trackcast/errors.hpp"

namespace trackcast::trackgen {

namespace {

nn::Tensor slice_leading(const nn::Tensor& t, std::size_t first, std::size_t count) {
    nn::Shape shape = t.shape();
    shape[0] = count;
    const std::size_t stride = t.size() / t.dim(0);
    const auto begin = t.storage().begin() + static_cast<std::ptrdiff_t>(first * stride);
    return nn::Tensor(shape, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * stride)));
}

} // namespace

TrackDataset TrackDataset::slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > inspections()) {
        throw RangeError("dataset slice [" + std::to_string(first) + ", " + std::to_string(first + count) +
                         ") outside " + std::to_string(inspections()) + " inspections");
    }
    TrackDataset out;
    out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(first),
                     dates.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.irregularities = slice_leading(irregularities, first, count);
    out.exogenous = exogenous.slice(first, count);
    if (has_ground_truth()) out.ground_truth_u = slice_leading(ground_truth_u, first, count);
    out.provenance = provenance;
    return out;
}

void TrackDataset::check() const {
    const std::size_t T = inspections();
    if (T == 0) throw ValidationError("dataset has no inspections");
    if (irregularities.shape() != nn::Shape{T, kIrregularityChannels, irregularities.dim(2)}) {
        throw ValidationError("irregularities shape " + nn::shape_string(irregularities.shape()) +
                              " does not match " + std::to_string(T) + " inspections x 10 channels");
    }
    const std::size_t L = positions();
    for (std::size_t t = 1; t < T; ++t) {
        if (!(dates[t] > dates[t - 1])) {
            throw ValidationError("dates not strictly increasing at inspection " + std::to_string(t));
        }
    }
    if (!irregularities.all_finite()) throw ValidationError("irregularities contain non-finite values");
    if (exogenous.inspections != T || exogenous.positions != L) {
        throw ValidationError("exogenous bundle is " + std::to_string(exogenous.inspections) + " x " +
                              std::to_string(exogenous.positions) + ", irregularities are " +
                              std::to_string(T) + " x " + std::to_string(L));
    }
    exo::require_valid(exogenous);
    if (has_ground_truth() && ground_truth_u.shape() != nn::Shape{T, kTargetChannels, L}) {
        throw ValidationError("ground truth shape " + nn::shape_string(ground_truth_u.shape()));
    }
}

Splits split_by_time(const TrackDataset& dataset, double first_cut, double second_cut) {
    const auto& d = dataset.dates;
    if (d.empty()) throw RangeError("cannot split an empty dataset");
    if (!(first_cut <= second_cut)) throw RangeError("split cut points are not ordered");
    std::size_t a = 0;
    while (a < d.size() && d[a] < first_cut) ++a;
    std::size_t b = a;
    while (b < d.size() && d[b] < second_cut) ++b;
    if (a == 0) throw RangeError("first cut " + std::to_string(first_cut) + " leaves the training split empty");
    if (b == a) throw RangeError("cuts leave the validation split empty");
    if (b == d.size()) throw RangeError("second cut " + std::to_string(second_cut) + " leaves the test split empty");
    Splits s;
    s.train = dataset.slice(0, a);
    s.validation = dataset.slice(a, b - a);
    s.test = dataset.slice(b, d.size() - b);
    s.validation_begin = a;
    s.test_begin = b;
    return s;
}

Splits split_by_ratio(const TrackDataset& dataset, double train, double validation) {
    if (!(train > 0.0) || !(validation > 0.0) || !(train + validation < 1.0)) {
        throw RangeError("split ratios must be positive and sum below 1");
    }
    const std::size_t T = dataset.inspections();
    auto index = [&](double r) {
        return std::min(T - 1, static_cast<std::size_t>(std::lround(r * static_cast<double>(T))));
    };
    const std::size_t a = index(train), b = index(train + validation);
    if (T == 0 || a == 0) throw RangeError("training split would be empty");
    return split_by_time(dataset, dataset.dates[a], dataset.dates[b]);
}

std::vector<WindowIndex> make_windows(std::size_t inspections, std::size_t tau) {
    if (tau == 0) throw SizeError("window length must be positive");
    if (inspections < tau + 1) {
        throw SizeError("split of " + std::to_string(inspections) + " inspections is too short for window " +
                        std::to_string(tau) + " plus a target");
    }
    std::vector<WindowIndex> out;
    out.reserve(inspections - tau);
    for (std::size_t first = 0; first + tau < inspections; ++first) out.push_back({first, first + tau});
    return out;
}

} // namespace trackcast::trackgen

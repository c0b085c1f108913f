#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trackcast/exo/bundle.hpp"
#include "trackcast/nn/tensor.hpp"

namespace trackcast::trackgen {

inline constexpr std::size_t kIrregularityChannels = 10;
inline constexpr std::size_t kTargetChannels = 2;

// Channel order of the irregularity panel. The first two are the forecast
// targets (vertical alignment of the left and right rail, mm).
inline constexpr std::array<std::string_view, kIrregularityChannels> kChannelNames = {
    "vertical_left",      "vertical_right", "lateral_left", "lateral_right",
    "gauge",              "cross_level",    "twist",        "vertical_vibration",
    "lateral_vibration",  "speed"};

inline constexpr int kDatasetFormatVersion = 1;

struct TrackDataset {
    std::vector<double> dates;       // day stamps, strictly increasing
    nn::Tensor irregularities;       // (T, 10, L)
    exo::ExogenousBundle exogenous;
    nn::Tensor ground_truth_u;       // (T, 2, L), empty unless simulated
    std::string provenance;

    std::size_t inspections() const { return dates.size(); }
    std::size_t positions() const { return irregularities.empty() ? 0 : irregularities.dim(2); }
    bool has_ground_truth() const { return !ground_truth_u.empty(); }

    // Inspections [first, first + count).
    TrackDataset slice(std::size_t first, std::size_t count) const;
    // Throws ValidationError on inconsistent shapes, non-increasing dates or
    // invalid exogenous content.
    void check() const;
};

struct Splits {
    TrackDataset train;
    TrackDataset validation;
    TrackDataset test;
    std::size_t validation_begin = 0;  // index of the first validation inspection
    std::size_t test_begin = 0;
};

// train: dates < first_cut; validation: first_cut <= date < second_cut;
// test: the rest. Every part must be non-empty, otherwise RangeError.
Splits split_by_time(const TrackDataset& dataset, double first_cut, double second_cut);
// Cuts at the dates of inspections round(train * T) and round((train + validation) * T).
Splits split_by_ratio(const TrackDataset& dataset, double train = 0.60, double validation = 0.15);

// Input inspections [first, first + tau), target inspection first + tau.
struct WindowIndex {
    std::size_t first = 0;
    std::size_t target = 0;
    bool operator==(const WindowIndex&) const = default;
};

// Every stride-1 window of a split: T - tau of them. SizeError if T < tau + 1.
std::vector<WindowIndex> make_windows(std::size_t inspections, std::size_t tau);
inline std::vector<WindowIndex> make_windows(const TrackDataset& split, std::size_t tau) {
    return make_windows(split.inspections(), tau);
}

// Directory layout: meta, dates.csv, irregularities.csv, exogenous/*.csv and
// optionally ground_truth_u.csv. Every tensor file has rows "t,channel,v_0,...,v_{L-1}"
// where t is "-" for spatial-only sources. Reals use the shortest decimal
// form that parses back to the same double.
void write_dataset(const TrackDataset& dataset, const std::filesystem::path& dir);
// Throws ParseError naming file, line and field on any schema violation.
TrackDataset read_dataset(const std::filesystem::path& dir);

// Shortest round-trip decimal text for a double.
std::string format_real(double value);

} // namespace trackcast::trackgen

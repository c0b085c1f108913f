#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trackcast/nn/parameters.hpp"
#include "trackcast/trackgen/dataset.hpp"

namespace trackcast::trackgen {

inline constexpr std::size_t kChordHalfSpan = 5;

// 10 m chord versine: v(l) = u(l) - (u(l-5) + u(l+5)) / 2 + eps.
// Beyond the ends u is extended by u(-k) = 3u(0) - 3u(k) + u(2k) (and the
// mirror image at the far end), which reproduces any quadratic exactly, so
// lines map to 0 and l^2 maps to -25 at every position. Needs L >= 11.
std::vector<double> chord_offset(std::span<const double> u);
std::vector<double> chord_offset(std::span<const double> u, double sigma, std::uint64_t seed);
std::vector<double> chord_offset(std::span<const double> u, double sigma, nn::Rng& rng);

// Degradation rate multipliers. All rates are settlement speeds in mm/day;
// a position settles at
//   base_rate
//   + weak(l) * (tonnage * tonnage_ratio + rainfall * rainfall_ratio + ballast_age * age / 10 y)
//   + structure_boundary * exp(-d_s^2 / 18) + joint * exp(-d_j^2 / 4.5)
// where weak(l) in [0, ~1] is a fixed random field of soft spots, the ratios
// are the interval's tonnage and accumulated rainfall over their means and
// d_s, d_j are distances (m) to the nearest structure boundary and joint.
struct Sensitivities {
    double ballast_age = 0.006;
    double tonnage = 0.02;
    double rainfall = 0.012;
    double structure_boundary = 0.02;
    double joint = 0.015;
};

struct TrackScenario {
    std::size_t positions = 512;
    std::size_t inspections = 120;
    double interval_days = 10.0;
    double interval_jitter = 2.0;  // dates step by interval_days + U(-jitter, jitter)

    double base_rate = 0.001;
    double weak_spot_density = 0.025;  // soft spots per metre
    Sensitivities sensitivity;

    // Maintenance policy. A run of positions whose observed vertical
    // alignment is below the threshold is repaired with trigger_probability
    // per inspection, scheduling_delay inspections later. Preventive work
    // hits a random position with preventive_probability per inspection.
    double trigger_threshold = -4.0;
    double trigger_probability = 0.6;
    std::size_t scheduling_delay = 0;
    double preventive_probability = 0.1;
    std::size_t repair_half_width = 5;
    double repair_effectiveness = 0.9;  // in (0, 1]; scales every category's factor
    std::array<double, exo::kMaintenanceCategories> category_weights = {
        0.25, 0.2, 0.15, 0.05, 0.05, 0.05, 0.1, 0.05, 0.1};
    std::array<double, exo::kMaintenanceCategories> category_effectiveness = {
        0.8, 1.0, 0.7, 1.0, 0.9, 0.9, 0.85, 0.95, 0.6};

    double measurement_sigma = 0.1;  // mm
    double process_sigma = 0.005;    // mm per sqrt(day)
    double daily_tonnage = 0.3;
    double rainfall_scale = 25.0;    // mean accumulated rainfall per interval, mm

    std::uint64_t seed = 1;

    // Throws ConfigurationError naming the offending field.
    void validate() const;
    // Stable text form of every field, used for provenance.
    std::string describe() const;
    std::string hash() const;
};

// Runs the scenario. Maintenance flags at inspection t mark work done
// before inspection t + 1; the repair is applied to u at the end of that
// interval, after the interval's settlement.
TrackDataset simulate(const TrackScenario& scenario);

} // namespace trackcast::trackgen

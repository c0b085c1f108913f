#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackcast/nn/tensor.hpp"

namespace trackcast::exo {

inline constexpr std::size_t kMaintenanceCategories = 9;
inline constexpr std::size_t kStructureTypes = 5;
inline constexpr std::size_t kJointTypes = 4;
inline constexpr std::size_t kRainfallChannels = 4;

inline constexpr std::array<std::string_view, kMaintenanceCategories> kMaintenanceNames = {
    "uneven_fixing",     "multiple_tie_tamper", "manual_tamping",
    "ballast_replacement", "right_rail_replacement", "left_rail_replacement",
    "sleeper_maintenance", "mud_pumping_remediation", "others"};

enum class UnderStructure : std::uint8_t { bridge = 0, tunnel, overpass, embankment, excavation };

inline constexpr std::array<std::string_view, kStructureTypes> kStructureNames = {
    "bridge", "tunnel", "overpass", "embankment", "excavation"};

inline constexpr std::array<std::string_view, kJointTypes> kJointNames = {
    "insulated", "welded", "expansion_left", "expansion_right"};

inline constexpr std::array<std::string_view, kRainfallChannels> kRainfallNames = {
    "accumulated", "max_10min", "max_hourly", "max_daily"};

enum class Source { maintenance, under_structure, rail_joint, ballast_age, tonnage, rainfall };

inline constexpr std::array<Source, 6> kAllSources = {
    Source::maintenance, Source::under_structure, Source::rail_joint,
    Source::ballast_age, Source::tonnage,         Source::rainfall};

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view name);

// Which exogenous sources feed the model.
struct ExogenousFlags {
    bool maintenance = true;
    bool under_structure = true;
    bool rail_joint = true;
    bool ballast_age = true;
    bool tonnage = true;
    bool rainfall = true;

    static ExogenousFlags all() { return {}; }
    static ExogenousFlags none() { return {false, false, false, false, false, false}; }

    bool enabled(Source s) const;
    void set(Source s, bool on);
    bool any() const;
    bool operator==(const ExogenousFlags&) const = default;
};

// Per-source channel counts after embedding; the sum over all sources is 62.
std::size_t embedded_channels(Source source);
std::size_t embedded_channels(const ExogenousFlags& flags);

// The six exogenous sources aligned to inspections (T) and 1 m positions (L).
//   maintenance     (T, 9, L)  binary, flag at t = work scheduled before t + 1
//   under_structure (L)        category index 0..4
//   rail_joint      (4, L)     binary per joint type
//   ballast_age     (T, L)     years, zero on bridges
//   tonnage         (T, L)     load since the previous inspection
//   rainfall        (T, 4, L)  accumulated, max 10 min, max hourly, max daily
struct ExogenousBundle {
    std::size_t inspections = 0;
    std::size_t positions = 0;
    nn::Tensor maintenance;
    std::vector<std::uint8_t> under_structure;
    nn::Tensor rail_joint;
    nn::Tensor ballast_age;
    nn::Tensor tonnage;
    nn::Tensor rainfall;

    // All-zero bundle of the given size (every position an embankment).
    static ExogenousBundle empty(std::size_t inspections, std::size_t positions);

    // Inspections [first, first + count) of the temporal sources.
    ExogenousBundle slice(std::size_t first, std::size_t count) const;
};

struct ValidationIssue {
    std::string source;
    std::optional<std::size_t> t;
    std::size_t l = 0;
    std::string message;

    // "<source> <t> <l> <message>", with "-" for t on spatial-only sources.
    std::string to_line() const;
};

// Every invariant violation, in source order then (t, l) order.
std::vector<ValidationIssue> validate(const ExogenousBundle& bundle);
// Same, restricting the temporal sources to inspections [first, first + count).
std::vector<ValidationIssue> validate(const ExogenousBundle& bundle, std::size_t first,
                                      std::size_t count);
// Throws ValidationError quoting the first issue.
void require_valid(const ExogenousBundle& bundle);

} // namespace trackcast::exo

#include "trackcast/exo/bundle.hpp"

#include <cmath>

#include "trackcast/errors.hpp"

namespace trackcast::exo {

std::string_view to_string(Source source) {
    switch (source) {
    case Source::maintenance: return "maintenance";
    case Source::under_structure: return "under_structure";
    case Source::rail_joint: return "rail_joint";
    case Source::ballast_age: return "ballast_age";
    case Source::tonnage: return "tonnage";
    case Source::rainfall: return "rainfall";
    }
    return "?";
}

std::optional<Source> parse_source(std::string_view name) {
    for (auto s : kAllSources) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

bool ExogenousFlags::enabled(Source s) const {
    switch (s) {
    case Source::maintenance: return maintenance;
    case Source::under_structure: return under_structure;
    case Source::rail_joint: return rail_joint;
    case Source::ballast_age: return ballast_age;
    case Source::tonnage: return tonnage;
    case Source::rainfall: return rainfall;
    }
    return false;
}

void ExogenousFlags::set(Source s, bool on) {
    switch (s) {
    case Source::maintenance: maintenance = on; break;
    case Source::under_structure: under_structure = on; break;
    case Source::rail_joint: rail_joint = on; break;
    case Source::ballast_age: ballast_age = on; break;
    case Source::tonnage: tonnage = on; break;
    case Source::rainfall: rainfall = on; break;
    }
}

bool ExogenousFlags::any() const {
    for (auto s : kAllSources) {
        if (enabled(s)) return true;
    }
    return false;
}

std::size_t embedded_channels(Source source) {
    switch (source) {
    case Source::maintenance: return kMaintenanceCategories * 4;
    case Source::under_structure: return 4;
    case Source::rail_joint: return kJointTypes * 4;
    case Source::ballast_age: return 1;
    case Source::tonnage: return 1;
    case Source::rainfall: return kRainfallChannels;
    }
    return 0;
}

std::size_t embedded_channels(const ExogenousFlags& flags) {
    std::size_t n = 0;
    for (auto s : kAllSources) {
        if (flags.enabled(s)) n += embedded_channels(s);
    }
    return n;
}

ExogenousBundle ExogenousBundle::empty(std::size_t inspections, std::size_t positions) {
    ExogenousBundle b;
    b.inspections = inspections;
    b.positions = positions;
    b.maintenance = nn::Tensor({inspections, kMaintenanceCategories, positions});
    b.under_structure.assign(positions, static_cast<std::uint8_t>(UnderStructure::embankment));
    b.rail_joint = nn::Tensor({kJointTypes, positions});
    b.ballast_age = nn::Tensor({inspections, positions});
    b.tonnage = nn::Tensor({inspections, positions});
    b.rainfall = nn::Tensor({inspections, kRainfallChannels, positions});
    return b;
}

namespace {

nn::Tensor slice_leading(const nn::Tensor& t, std::size_t first, std::size_t count) {
    nn::Shape shape = t.shape();
    shape[0] = count;
    const std::size_t stride = t.size() / t.dim(0);
    const auto begin = t.storage().begin() + static_cast<std::ptrdiff_t>(first * stride);
    return nn::Tensor(shape, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * stride)));
}

} // namespace

ExogenousBundle ExogenousBundle::slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > inspections) {
        throw RangeError("bundle slice [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") outside " +
                         std::to_string(inspections) + " inspections");
    }
    ExogenousBundle b = *this;
    b.inspections = count;
    b.maintenance = slice_leading(maintenance, first, count);
    b.ballast_age = slice_leading(ballast_age, first, count);
    b.tonnage = slice_leading(tonnage, first, count);
    b.rainfall = slice_leading(rainfall, first, count);
    return b;
}

std::string ValidationIssue::to_line() const {
    return source + " " + (t ? std::to_string(*t) : std::string("-")) + " " + std::to_string(l) +
           " " + message;
}

std::vector<ValidationIssue> validate(const ExogenousBundle& b) {
    return validate(b, 0, b.inspections);
}

std::vector<ValidationIssue> validate(const ExogenousBundle& b, std::size_t first, std::size_t count) {
    std::vector<ValidationIssue> issues;
    const std::size_t T = b.inspections, L = b.positions;
    if (first + count > T) {
        issues.push_back({"bundle", std::nullopt, 0,
                          "inspection range [" + std::to_string(first) + ", " + std::to_string(first + count) +
                              ") outside " + std::to_string(T) + " inspections"});
        return issues;
    }
    const std::size_t t_end = first + count;
    auto shape_issue = [&](const char* source, const nn::Tensor& t, const nn::Shape& want) {
        if (t.shape() != want) {
            issues.push_back({source, std::nullopt, 0,
                              "shape " + nn::shape_string(t.shape()) + " expected " + nn::shape_string(want)});
            return true;
        }
        return false;
    };
    bool bad = false;
    bad |= shape_issue("maintenance", b.maintenance, {T, kMaintenanceCategories, L});
    bad |= shape_issue("rail_joint", b.rail_joint, {kJointTypes, L});
    bad |= shape_issue("ballast_age", b.ballast_age, {T, L});
    bad |= shape_issue("tonnage", b.tonnage, {T, L});
    bad |= shape_issue("rainfall", b.rainfall, {T, kRainfallChannels, L});
    if (b.under_structure.size() != L) {
        issues.push_back({"under_structure", std::nullopt, 0,
                          "length " + std::to_string(b.under_structure.size()) + " expected " + std::to_string(L)});
        bad = true;
    }
    if (bad) return issues;

    auto binary = [](double v) { return v == 0.0 || v == 1.0; };
    for (std::size_t t = first; t < t_end; ++t)
        for (std::size_t k = 0; k < kMaintenanceCategories; ++k)
            for (std::size_t l = 0; l < L; ++l)
                if (!binary(b.maintenance(t, k, l)))
                    issues.push_back({"maintenance", t, l,
                                      "category " + std::string(kMaintenanceNames[k]) +
                                          " value " + std::to_string(b.maintenance(t, k, l)) +
                                          " is not 0 or 1"});
    for (std::size_t l = 0; l < L; ++l)
        if (b.under_structure[l] >= kStructureTypes)
            issues.push_back({"under_structure", std::nullopt, l,
                              "category " + std::to_string(b.under_structure[l]) + " outside 0..4"});
    for (std::size_t j = 0; j < kJointTypes; ++j)
        for (std::size_t l = 0; l < L; ++l)
            if (!binary(b.rail_joint(j, l)))
                issues.push_back({"rail_joint", std::nullopt, l,
                                  std::string(kJointNames[j]) + " value " +
                                      std::to_string(b.rail_joint(j, l)) + " is not 0 or 1"});
    for (std::size_t t = first; t < t_end; ++t)
        for (std::size_t l = 0; l < L; ++l) {
            const double age = b.ballast_age(t, l);
            if (!std::isfinite(age) || age < 0.0)
                issues.push_back({"ballast_age", t, l, "age " + std::to_string(age) + " is negative or non-finite"});
            else if (b.under_structure[l] == static_cast<std::uint8_t>(UnderStructure::bridge) && age != 0.0)
                issues.push_back({"ballast_age", t, l, "age " + std::to_string(age) + " on a bridge must be 0"});
        }
    for (std::size_t t = first; t < t_end; ++t)
        for (std::size_t l = 0; l < L; ++l) {
            const double ton = b.tonnage(t, l);
            if (!std::isfinite(ton) || ton < 0.0)
                issues.push_back({"tonnage", t, l, "tonnage " + std::to_string(ton) + " is negative or non-finite"});
        }
    for (std::size_t t = first; t < t_end; ++t)
        for (std::size_t r = 0; r < kRainfallChannels; ++r)
            for (std::size_t l = 0; l < L; ++l) {
                const double rain = b.rainfall(t, r, l);
                if (!std::isfinite(rain) || rain < 0.0)
                    issues.push_back({"rainfall", t, l,
                                      std::string(kRainfallNames[r]) + " " + std::to_string(rain) +
                                          " is negative or non-finite"});
            }
    return issues;
}

void require_valid(const ExogenousBundle& bundle) {
    auto issues = validate(bundle);
    if (!issues.empty()) {
        throw ValidationError("invalid exogenous bundle (" + std::to_string(issues.size()) +
                              " issues), first: " + issues.front().to_line());
    }
}

} // namespace trackcast::exo

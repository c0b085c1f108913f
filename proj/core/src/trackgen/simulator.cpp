#include "trackcast/trackgen/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "trackcast/errors.hpp"

namespace trackcast::trackgen {

namespace {

double extended(std::span<const double> u, std::ptrdiff_t i) {
    const auto L = static_cast<std::ptrdiff_t>(u.size());
    if (i < 0) {
        const std::size_t k = static_cast<std::size_t>(-i);
        return 3.0 * u[0] - 3.0 * u[k] + u[2 * k];
    }
    if (i >= L) {
        const std::size_t last = u.size() - 1;
        const std::size_t k = static_cast<std::size_t>(i - (L - 1));
        return 3.0 * u[last] - 3.0 * u[last - k] + u[last - 2 * k];
    }
    return u[static_cast<std::size_t>(i)];
}

} // namespace

std::vector<double> chord_offset(std::span<const double> u) {
    if (u.size() < 2 * kChordHalfSpan + 1) {
        throw SizeError("chord offset needs at least 11 positions, got " + std::to_string(u.size()));
    }
    const auto h = static_cast<std::ptrdiff_t>(kChordHalfSpan);
    std::vector<double> v(u.size());
    for (std::size_t l = 0; l < u.size(); ++l) {
        const auto i = static_cast<std::ptrdiff_t>(l);
        v[l] = u[l] - (extended(u, i - h) + extended(u, i + h)) / 2.0;
    }
    return v;
}

std::vector<double> chord_offset(std::span<const double> u, double sigma, nn::Rng& rng) {
    if (!(sigma >= 0.0)) throw ConfigurationError("measurement sigma must be >= 0");
    auto v = chord_offset(u);
    if (sigma > 0.0) {
        for (auto& x : v) x += rng.normal(0.0, sigma);
    }
    return v;
}

std::vector<double> chord_offset(std::span<const double> u, double sigma, std::uint64_t seed) {
    auto rng = nn::Rng::stream(seed, "measurement");
    return chord_offset(u, sigma, rng);
}

void TrackScenario::validate() const {
    auto require = [](bool ok, const std::string& field, const std::string& rule) {
        if (!ok) throw ConfigurationError("scenario." + field + " " + rule);
    };
    auto non_negative = [&](double v, const std::string& field) {
        require(std::isfinite(v) && v >= 0.0, field, "must be a finite value >= 0");
    };
    auto probability = [&](double v, const std::string& field) {
        require(v >= 0.0 && v <= 1.0, field, "must lie in [0, 1]");
    };
    require(positions >= 2 * kChordHalfSpan + 1, "positions", "must be at least 11");
    require(inspections >= 2, "inspections", "must be at least 2");
    require(std::isfinite(interval_days) && interval_days > 0.0, "interval_days", "must be > 0");
    require(interval_jitter >= 0.0 && interval_jitter < interval_days, "interval_jitter",
            "must lie in [0, interval_days) so dates stay increasing");
    non_negative(base_rate, "base_rate");
    non_negative(weak_spot_density, "weak_spot_density");
    non_negative(sensitivity.ballast_age, "sensitivity.ballast_age");
    non_negative(sensitivity.tonnage, "sensitivity.tonnage");
    non_negative(sensitivity.rainfall, "sensitivity.rainfall");
    non_negative(sensitivity.structure_boundary, "sensitivity.structure_boundary");
    non_negative(sensitivity.joint, "sensitivity.joint");
    require(std::isfinite(trigger_threshold), "trigger_threshold", "must be finite");
    probability(trigger_probability, "trigger_probability");
    probability(preventive_probability, "preventive_probability");
    require(repair_effectiveness > 0.0 && repair_effectiveness <= 1.0, "repair_effectiveness", "must lie in (0, 1]");
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < exo::kMaintenanceCategories; ++k) {
        const std::string name(exo::kMaintenanceNames[k]);
        non_negative(category_weights[k], "category_weights." + name);
        probability(category_effectiveness[k], "category_effectiveness." + name);
        weight_sum += category_weights[k];
    }
    require(weight_sum > 0.0, "category_weights", "must not all be zero");
    non_negative(measurement_sigma, "measurement_sigma");
    non_negative(process_sigma, "process_sigma");
    non_negative(daily_tonnage, "daily_tonnage");
    non_negative(rainfall_scale, "rainfall_scale");
}

std::string TrackScenario::describe() const {
    std::ostringstream out;
    auto real = [&](const char* key, double v) { out << key << ' ' << format_real(v) << '\n'; };
    out << "positions " << positions << '\n' << "inspections " << inspections << '\n';
    real("interval_days", interval_days);
    real("interval_jitter", interval_jitter);
    real("base_rate", base_rate);
    real("weak_spot_density", weak_spot_density);
    real("sensitivity.ballast_age", sensitivity.ballast_age);
    real("sensitivity.tonnage", sensitivity.tonnage);
    real("sensitivity.rainfall", sensitivity.rainfall);
    real("sensitivity.structure_boundary", sensitivity.structure_boundary);
    real("sensitivity.joint", sensitivity.joint);
    real("trigger_threshold", trigger_threshold);
    real("trigger_probability", trigger_probability);
    out << "scheduling_delay " << scheduling_delay << '\n';
    real("preventive_probability", preventive_probability);
    out << "repair_half_width " << repair_half_width << '\n';
    real("repair_effectiveness", repair_effectiveness);
    for (std::size_t k = 0; k < exo::kMaintenanceCategories; ++k) {
        out << "category." << exo::kMaintenanceNames[k] << ' ' << format_real(category_weights[k]) << ' '
            << format_real(category_effectiveness[k]) << '\n';
    }
    real("measurement_sigma", measurement_sigma);
    real("process_sigma", process_sigma);
    real("daily_tonnage", daily_tonnage);
    real("rainfall_scale", rainfall_scale);
    out << "seed " << seed << '\n';
    return out.str();
}

std::string TrackScenario::hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : describe()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

constexpr std::size_t kBallastReplacement = 3;
constexpr std::size_t kRightRail = 4;
constexpr std::size_t kLeftRail = 5;
constexpr double kDaysPerYear = 365.25;

struct Job {
    std::size_t category = 0;
    std::size_t lo = 0;
    std::size_t hi = 0;  // inclusive
    bool left = true;
    bool right = true;
};

struct Layout {
    std::vector<std::uint8_t> structure;
    nn::Tensor joints;                 // (4, L)
    std::vector<double> boundary_kernel;
    std::vector<double> joint_kernel;
    nn::Tensor weak;                   // (2, L)
    std::vector<double> renewal_day;   // day the ballast was last renewed
    std::vector<double> settle_phase;  // days of settlement accumulated before day 0
};

std::vector<double> proximity_kernel(const std::vector<std::size_t>& sites, std::size_t L, double sigma) {
    std::vector<double> k(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double best = std::numeric_limits<double>::infinity();
        for (auto s : sites) best = std::min(best, std::abs(static_cast<double>(l) - static_cast<double>(s)));
        if (std::isfinite(best)) k[l] = std::exp(-best * best / (2.0 * sigma * sigma));
    }
    return k;
}

Layout make_layout(const TrackScenario& sc, nn::Rng& rng) {
    const std::size_t L = sc.positions;
    Layout g;
    g.structure.assign(L, static_cast<std::uint8_t>(exo::UnderStructure::embankment));
    g.joints = nn::Tensor({exo::kJointTypes, L});

    // Structures separated by plain embankment.
    std::vector<std::size_t> boundaries;
    const std::array<exo::UnderStructure, 4> kinds = {exo::UnderStructure::bridge, exo::UnderStructure::tunnel,
                                                      exo::UnderStructure::overpass, exo::UnderStructure::excavation};
    std::size_t l = static_cast<std::size_t>(rng.uniform(10.0, 80.0));
    while (l < L) {
        const auto kind = kinds[rng.index(kinds.size())];
        const std::size_t len = static_cast<std::size_t>(rng.uniform(15.0, 60.0));
        const std::size_t end = std::min(L, l + len);
        for (std::size_t i = l; i < end; ++i) g.structure[i] = static_cast<std::uint8_t>(kind);
        boundaries.push_back(l);
        if (end < L) boundaries.push_back(end);
        if (kind == exo::UnderStructure::bridge) {
            g.joints(2, l) = 1.0;
            g.joints(3, l) = 1.0;
            if (end < L) {
                g.joints(2, end - 1) = 1.0;
                g.joints(3, end - 1) = 1.0;
            }
        }
        l = end + static_cast<std::size_t>(rng.uniform(40.0, 120.0));
    }
    for (std::size_t j = 0; j < 2; ++j) {
        const double lo = j == 0 ? 60.0 : 30.0, hi = j == 0 ? 150.0 : 80.0;
        for (double p = rng.uniform(0.0, hi); p < static_cast<double>(L); p += rng.uniform(lo, hi)) {
            g.joints(j, static_cast<std::size_t>(p)) = 1.0;
        }
    }
    std::vector<std::size_t> joint_sites;
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < exo::kJointTypes; ++j) {
            if (g.joints(j, i) == 1.0) {
                joint_sites.push_back(i);
                break;
            }
        }
    }
    g.boundary_kernel = proximity_kernel(boundaries, L, 3.0);
    g.joint_kernel = proximity_kernel(joint_sites, L, 1.5);

    // Soft spots: Gaussian bumps with rail-specific weights.
    g.weak = nn::Tensor({2, L});
    const auto spots = static_cast<std::size_t>(std::lround(sc.weak_spot_density * static_cast<double>(L)));
    for (std::size_t s = 0; s < spots; ++s) {
        const double centre = rng.uniform(0.0, static_cast<double>(L));
        const double width = rng.uniform(1.5, 4.0);
        const double amp = rng.uniform(0.3, 1.0);
        const double side[2] = {rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0)};
        for (std::size_t i = 0; i < L; ++i) {
            const double d = static_cast<double>(i) - centre;
            const double bump = amp * std::exp(-d * d / (2.0 * width * width));
            for (std::size_t r = 0; r < 2; ++r) g.weak(r, i) += side[r] * bump;
        }
    }

    // Ballast renewed per section at random ages up to 25 years.
    g.renewal_day.assign(L, 0.0);
    for (double p = 0.0; p < static_cast<double>(L);) {
        const double len = rng.uniform(50.0, 150.0);
        const double age = rng.uniform(0.0, 25.0);
        for (auto i = static_cast<std::size_t>(p); i < std::min(L, static_cast<std::size_t>(p + len)); ++i) {
            g.renewal_day[i] = -age * kDaysPerYear;
        }
        p += len;
    }

    const double phi1 = rng.uniform(0.0, 2.0 * std::numbers::pi), phi2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    g.settle_phase.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        const double x = static_cast<double>(i);
        g.settle_phase[i] = 80.0 + 70.0 * std::sin(2.0 * std::numbers::pi * x / 173.0 + phi1) *
                                       std::cos(2.0 * std::numbers::pi * x / 61.0 + phi2);
    }
    return g;
}

double ballast_age(const Layout& g, std::size_t l, double day) {
    if (g.structure[l] == static_cast<std::uint8_t>(exo::UnderStructure::bridge)) return 0.0;
    return std::max(0.0, (day - g.renewal_day[l]) / kDaysPerYear);
}

} // namespace

TrackDataset simulate(const TrackScenario& sc) {
    sc.validate();
    const std::size_t L = sc.positions, T = sc.inspections;
    auto layout_rng = nn::Rng::stream(sc.seed, "simulate.layout");
    auto weather_rng = nn::Rng::stream(sc.seed, "simulate.weather");
    auto process_rng = nn::Rng::stream(sc.seed, "simulate.process");
    auto maint_rng = nn::Rng::stream(sc.seed, "simulate.maintenance");
    auto measure_rng = nn::Rng::stream(sc.seed, "simulate.measurement");
    auto aux_rng = nn::Rng::stream(sc.seed, "simulate.auxiliary");

    Layout g = make_layout(sc, layout_rng);

    TrackDataset ds;
    ds.provenance = "simulated scenario " + sc.hash();
    ds.dates.resize(T);
    for (std::size_t t = 1; t < T; ++t) {
        ds.dates[t] = ds.dates[t - 1] + sc.interval_days + weather_rng.uniform(-sc.interval_jitter, sc.interval_jitter);
    }

    auto& ex = ds.exogenous;
    ex = exo::ExogenousBundle::empty(T, L);
    ex.under_structure = g.structure;
    ex.rail_joint = g.joints;

    // Weather and traffic are uniform along the section; they vary per interval.
    std::vector<double> tonnage_ratio(T), rain_ratio(T);
    std::gamma_distribution<double> rain_shape(1.2, 1.0 / 1.2);
    for (std::size_t t = 0; t < T; ++t) {
        const double days = t == 0 ? sc.interval_days : ds.dates[t] - ds.dates[t - 1];
        const double ton = std::max(0.0, sc.daily_tonnage * days * (1.0 + weather_rng.normal(0.0, 0.05)));
        const double season = 1.0 + 0.6 * std::sin(2.0 * std::numbers::pi * ds.dates[t] / kDaysPerYear);
        const double accumulated = sc.rainfall_scale * season * rain_shape(weather_rng.engine());
        const double max_daily = accumulated * weather_rng.uniform(0.25, 0.6);
        const double max_hourly = max_daily * weather_rng.uniform(0.15, 0.4);
        const double max_10min = max_hourly * weather_rng.uniform(0.3, 0.6);
        const double mean_ton = sc.daily_tonnage * sc.interval_days;
        tonnage_ratio[t] = mean_ton > 0.0 ? ton / mean_ton : 0.0;
        rain_ratio[t] = sc.rainfall_scale > 0.0 ? accumulated / sc.rainfall_scale : 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            ex.tonnage(t, l) = ton;
            ex.rainfall(t, 0, l) = accumulated;
            ex.rainfall(t, 1, l) = max_10min;
            ex.rainfall(t, 2, l) = max_hourly;
            ex.rainfall(t, 3, l) = max_daily;
        }
    }

    const auto& S = sc.sensitivity;
    auto settle_speed = [&](std::size_t side, std::size_t l, std::size_t t, double day) {
        return sc.base_rate +
               g.weak(side, l) * (S.tonnage * tonnage_ratio[t] + S.rainfall * rain_ratio[t] +
                                  S.ballast_age * ballast_age(g, l, day) / 10.0) +
               S.structure_boundary * g.boundary_kernel[l] + S.joint * g.joint_kernel[l];
    };

    nn::Tensor u({2, L});
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t l = 0; l < L; ++l) u(s, l) = -settle_speed(s, l, 0, 0.0) * g.settle_phase[l];

    ds.irregularities = nn::Tensor({T, kIrregularityChannels, L});
    ds.ground_truth_u = nn::Tensor({T, kTargetChannels, L});
    nn::Tensor lateral({2, L}), gauge({1, L});

    std::map<std::size_t, std::vector<Job>> schedule;
    std::vector<bool> pending(L, false);
    std::discrete_distribution<std::size_t> category(sc.category_weights.begin(), sc.category_weights.end());

    auto plan = [&](std::size_t t, std::size_t centre, std::size_t lo, std::size_t hi, std::size_t side) {
        Job job;
        job.category = category(maint_rng.engine());
        const auto h = sc.repair_half_width;
        job.lo = std::min(lo, centre >= h ? centre - h : 0);
        job.hi = std::max(hi, std::min(L - 1, centre + h));
        if (job.category == kLeftRail || job.category == kRightRail) {
            job.category = side == 0 ? kLeftRail : kRightRail;
            job.left = side == 0;
            job.right = side == 1;
        }
        const std::size_t when = t + sc.scheduling_delay;
        if (when + 1 >= T) return;
        for (std::size_t i = job.lo; i <= job.hi; ++i) pending[i] = true;
        schedule[when].push_back(job);
    };

    for (std::size_t t = 0; t < T; ++t) {
        const double day = ds.dates[t];
        for (std::size_t l = 0; l < L; ++l) ex.ballast_age(t, l) = ballast_age(g, l, day);

        // Measurement.
        nn::Tensor v({2, L});
        for (std::size_t s = 0; s < 2; ++s) {
            auto row = chord_offset(u.values().subspan(s * L, L), sc.measurement_sigma, measure_rng);
            for (std::size_t l = 0; l < L; ++l) {
                v(s, l) = row[l];
                ds.irregularities(t, s, l) = row[l];
                ds.ground_truth_u(t, s, l) = u(s, l);
            }
        }

        // Auxiliary channels: AR(1) lateral and gauge, cross level and twist
        // from the true rails, vibrations from local roughness, line speed.
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t s = 0; s < 2; ++s) {
                lateral(s, l) = 0.8 * lateral(s, l) + 0.1 * v(s, l) + aux_rng.normal(0.0, 0.3);
                ds.irregularities(t, 2 + s, l) = lateral(s, l);
            }
            gauge(0, l) = 0.9 * gauge(0, l) + aux_rng.normal(0.0, 0.2);
            ds.irregularities(t, 4, l) = gauge(0, l);
            ds.irregularities(t, 5, l) = u(0, l) - u(1, l) + aux_rng.normal(0.0, 0.1);
        }
        for (std::size_t l = 0; l < L; ++l) {
            const std::size_t back = l >= 5 ? l - 5 : 0;
            ds.irregularities(t, 6, l) = ds.irregularities(t, 5, l) - ds.irregularities(t, 5, back);
            ds.irregularities(t, 7, l) = 0.02 + 0.03 * (std::abs(v(0, l)) + std::abs(v(1, l))) +
                                         0.01 * std::abs(aux_rng.normal(0.0, 1.0));
            ds.irregularities(t, 8, l) = 0.02 + 0.03 * (std::abs(lateral(0, l)) + std::abs(lateral(1, l))) +
                                         0.01 * std::abs(aux_rng.normal(0.0, 1.0));
            ds.irregularities(t, 9, l) = 250.0 + 5.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(l) /
                                                                 static_cast<double>(L)) +
                                         aux_rng.normal(0.0, 2.0);
        }
        if (t + 1 == T) break;

        // Maintenance planning from the observed alignment.
        for (std::size_t s = 0; s < 2; ++s) {
            std::size_t l = 0;
            while (l < L) {
                if (!(v(s, l) < sc.trigger_threshold) || pending[l]) {
                    ++l;
                    continue;
                }
                std::size_t a = l, worst = l;
                while (l < L && v(s, l) < sc.trigger_threshold && !pending[l]) {
                    if (v(s, l) < v(s, worst)) worst = l;
                    ++l;
                }
                if (maint_rng.bernoulli(sc.trigger_probability)) plan(t, worst, a, l - 1, s);
            }
        }
        if (maint_rng.bernoulli(sc.preventive_probability)) {
            const std::size_t centre = maint_rng.index(L);
            const std::size_t side = maint_rng.index(2);
            if (!pending[centre]) plan(t, centre, centre, centre, side);
        }

        auto jobs_it = schedule.find(t);
        const std::vector<Job> jobs = jobs_it == schedule.end() ? std::vector<Job>{} : jobs_it->second;
        for (const auto& job : jobs)
            for (std::size_t l = job.lo; l <= job.hi; ++l) ex.maintenance(t, job.category, l) = 1.0;

        // Settlement over the interval, then the scheduled repairs.
        const double next_day = ds.dates[t + 1];
        const double days = next_day - day;
        for (std::size_t s = 0; s < 2; ++s) {
            for (std::size_t l = 0; l < L; ++l) {
                u(s, l) -= settle_speed(s, l, t + 1, next_day) * days;
                if (sc.process_sigma > 0.0) u(s, l) += process_rng.normal(0.0, sc.process_sigma * std::sqrt(days));
            }
        }
        for (const auto& job : jobs) {
            const double keep = 1.0 - sc.repair_effectiveness * sc.category_effectiveness[job.category];
            for (std::size_t l = job.lo; l <= job.hi; ++l) {
                if (job.left) u(0, l) *= keep;
                if (job.right) u(1, l) *= keep;
                pending[l] = false;
                if (job.category == kBallastReplacement) g.renewal_day[l] = next_day;
            }
        }
        schedule.erase(t);
    }
    return ds;
}

} // namespace trackcast::trackgen

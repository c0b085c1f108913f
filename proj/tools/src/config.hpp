#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "trackcast/evalkit/report.hpp"
#include "trackcast/forecaster/train.hpp"
#include "trackcast/trackgen/simulator.hpp"

namespace trackcast::cli {

struct SplitRatios {
    double train = 0.60;
    double validation = 0.15;
};

// One document drives every command. All randomness derives from `seed`
// through named streams, so the scenario, model and training seeds are
// always equal to it.
struct RunConfig {
    std::uint64_t seed = 1;
    trackgen::TrackScenario scenario;
    forecaster::ModelConfig model;
    forecaster::TrainConfig training;
    evalkit::EvalConfig evaluation;
    SplitRatios split;

    // Propagates `seed` into the sections and validates all of them.
    void finalize();
};

// Parses a JSON document. Unknown keys, wrong types and a missing seed
// (unless `seed_override` is given) throw ConfigurationError naming the
// dotted field path.
RunConfig parse_config(const nlohmann::ordered_json& doc, std::optional<std::uint64_t> seed_override = {});
RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});
// Defaults with the given seed, for commands run without --config.
RunConfig default_config(std::uint64_t seed = 1);

nlohmann::ordered_json to_json(const RunConfig& config);
// Writes config.resolved.json into `dir`.
void write_resolved(const RunConfig& config, const std::filesystem::path& dir);

} // namespace trackcast::cli

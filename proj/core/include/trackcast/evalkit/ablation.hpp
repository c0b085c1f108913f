#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackcast/evalkit/report.hpp"
#include "trackcast/forecaster/train.hpp"

namespace trackcast::evalkit {

struct AblationCase {
    std::string name;
    exo::ExogenousFlags flags;
};

// with-all, without-<source> for each of the six sources, without-all.
const std::vector<AblationCase>& ablation_grid();
// Throws UsageError naming the unknown case.
AblationCase parse_case(std::string_view name);
// Comma separated list; empty selects the whole grid.
std::vector<AblationCase> parse_cases(std::string_view list);

struct AblationRow {
    AblationCase ablation;
    forecaster::ModelConfig config;
    std::optional<EvalReport> report;
    std::size_t best_epoch = 0;
    std::string error;  // set when training or evaluation failed

    bool ok() const { return report.has_value(); }
};

using CaseCallback = std::function<void(const AblationRow&, const forecaster::ForecastModel&,
                                        const forecaster::TrainResult&)>;

// Trains one model per case from `base`, changing only the exogenous flags,
// and evaluates it on the test split. Failures are recorded per row.
std::vector<AblationRow> run_ablation(const forecaster::ModelConfig& base, const forecaster::TrainConfig& training,
                                      const trackgen::Splits& splits, const std::vector<AblationCase>& cases,
                                      const EvalConfig& eval, const CaseCallback& on_case = {});

std::vector<std::string> ablation_header(const EvalConfig& eval);
void write_ablation_csv(const std::vector<AblationRow>& rows, const EvalConfig& eval,
                        const std::filesystem::path& path);

} // namespace trackcast::evalkit

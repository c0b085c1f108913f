#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trackcast::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 2, kNumeric = 3 };

struct CommonOptions {
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
};

struct EvaluateOptions {
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> checkpoint;
    bool oracle = false;  // predictions taken from the observations themselves
    bool svg = false;
};

struct PlotOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    std::string x;
    std::vector<std::string> y;
    bool scatter = false;
    std::string title;
};

int cmd_simulate(const CommonOptions& common);
int cmd_train(const CommonOptions& common, const std::filesystem::path& dataset);
int cmd_evaluate(const CommonOptions& common, const EvaluateOptions& options);
int cmd_ablate(const CommonOptions& common, const std::filesystem::path& dataset, const std::string& cases);
int cmd_compare(const CommonOptions& common, const std::filesystem::path& dataset,
                const std::vector<std::filesystem::path>& checkpoints);
int cmd_plot(const PlotOptions& options);

} // namespace trackcast::cli

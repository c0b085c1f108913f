#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "trackcast/errors.hpp"

using namespace trackcast;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"trackcast: track irregularity simulation, forecasting and evaluation"};
    app.require_subcommand(1);

    cli::CommonOptions common;
    std::string config_path;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "output directory")->required();
        sub->add_option("--seed", seed, "override the configuration seed");
    };

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
    add_common(simulate);

    fs::path dataset;
    auto* train = app.add_subcommand("train", "train a forecaster on a dataset");
    add_common(train);
    train->add_option("--dataset", dataset, "dataset directory")->required();

    cli::EvaluateOptions eval;
    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint and the linear baseline on the test split");
    add_common(evaluate);
    evaluate->add_option("--dataset", eval.dataset, "dataset directory")->required();
    evaluate->add_option("--checkpoint", eval.checkpoint, "trained model")->check(CLI::ExistingFile);
    evaluate->add_flag("--oracle", eval.oracle, "predict the observations themselves (test mode)");
    evaluate->add_flag("--svg", eval.svg, "also render frequency_scatter.svg");

    std::string cases;
    auto* ablate = app.add_subcommand("ablate", "train one model per exogenous ablation case");
    add_common(ablate);
    ablate->add_option("--dataset", dataset, "dataset directory")->required();
    ablate->add_option("--cases", cases, "comma separated case names (default: all eight)");

    std::vector<fs::path> checkpoints;
    auto* compare = app.add_subcommand("compare", "score several checkpoints and the linear baseline");
    add_common(compare);
    compare->add_option("--dataset", dataset, "dataset directory")->required();
    compare->add_option("--checkpoint", checkpoints, "trained model (repeatable)")->required()->check(CLI::ExistingFile);

    cli::PlotOptions plot;
    std::string y_columns;
    auto* plot_cmd = app.add_subcommand("plot", "render CSV columns as an SVG chart");
    plot_cmd->add_option("--input", plot.input, "CSV file")->required()->check(CLI::ExistingFile);
    plot_cmd->add_option("--out", plot.output, "SVG file")->required();
    plot_cmd->add_option("--x", plot.x, "abscissa column")->required();
    plot_cmd->add_option("--y", y_columns, "comma separated ordinate columns")->required();
    plot_cmd->add_flag("--scatter", plot.scatter, "draw points instead of lines");
    plot_cmd->add_option("--title", plot.title, "chart title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kSuccess : cli::kUsage;
    }
    if (!config_path.empty()) common.config = config_path;
    for (auto* sub : {simulate, train, evaluate, ablate, compare})
        if (sub->count("--seed")) common.seed = seed;

    try {
        if (*simulate) return cli::cmd_simulate(common);
        if (*train) return cli::cmd_train(common, dataset);
        if (*evaluate) return cli::cmd_evaluate(common, eval);
        if (*ablate) return cli::cmd_ablate(common, dataset, cases);
        if (*compare) return cli::cmd_compare(common, dataset, checkpoints);
        if (*plot_cmd) {
            for (std::size_t pos = 0; pos <= y_columns.size();) {
                const auto comma = y_columns.find(',', pos);
                const auto end = comma == std::string::npos ? y_columns.size() : comma;
                if (end > pos) plot.y.push_back(y_columns.substr(pos, end - pos));
                pos = end + 1;
            }
            return cli::cmd_plot(plot);
        }
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return cli::kUsage;
}

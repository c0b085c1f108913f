#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>

#include "config.hpp"
#include "trackcast/errors.hpp"
#include "trackcast/evalkit/ablation.hpp"
#include "trackcast/evalkit/plot.hpp"
#include "trackcast/forecaster/checkpoint.hpp"
#include "trackcast/trackgen/simulator.hpp"

namespace trackcast::cli {

namespace fs = std::filesystem;
using trackgen::format_real;

namespace {

// Wall-clock stamps live only here so every other output stays reproducible.
class RunLog {
public:
    RunLog(const fs::path& dir, const std::string& command) : out_(dir / "run.log", std::ios::trunc) {
        start_ = std::chrono::steady_clock::now();
        line("start " + command);
    }
    ~RunLog() {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        line("finish after " + std::to_string(secs) + " s");
    }
    void line(const std::string& msg) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out_ << stamp << ' ' << msg << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
    std::chrono::steady_clock::time_point start_;
};

RunConfig resolve(const CommonOptions& common) {
    if (common.config) return load_config(*common.config, common.seed);
    return default_config(common.seed.value_or(1));
}

void prepare_out(const fs::path& out) {
    if (out.empty()) throw UsageError("--out is required");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw UsageError("cannot create output directory " + out.string() + ": " + ec.message());
}

std::ofstream open_text(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

trackgen::Splits split(const RunConfig& c, const trackgen::TrackDataset& ds) {
    return trackgen::split_by_ratio(ds, c.split.train, c.split.validation);
}

// Compares everything the checkpoint fixes except seed and positions.
void require_matching(const forecaster::ModelConfig& checkpoint, const forecaster::ModelConfig& configured) {
    auto a = checkpoint, b = configured;
    a.seed = b.seed = 0;
    a.positions = b.positions = 0;
    if (!(a == b)) {
        throw UsageError("checkpoint model (" + std::string(cells::to_string(checkpoint.variant)) + ", window " +
                         std::to_string(checkpoint.window) + ", layers " + std::to_string(checkpoint.layers) +
                         ", hidden " + std::to_string(checkpoint.hidden) +
                         ") does not match the model section of the configuration");
    }
}

void write_report_files(const fs::path& out, const trackgen::TrackDataset& full, const trackgen::TrackDataset& test,
                        const std::vector<evalkit::EvalReport>& reports, bool svg) {
    evalkit::write_comparison_csv(reports, out / "comparison.csv");
    // Frequency scatter: linear baseline (last report) against the first model.
    const auto& model = reports.front();
    const auto& linear = reports.back();
    const auto rows = evalkit::maintenance_frequency_report(full, linear.position_rmse, model.position_rmse);
    evalkit::write_frequency_csv(rows, linear.model, model.model, out / "frequency_scatter.csv");

    std::vector<double> freq, gain;
    for (const auto& r : rows) {
        freq.push_back(r.frequency);
        gain.push_back(r.rmse_a - r.rmse_b);
    }
    auto summary = open_text(out / "evaluation_summary.txt");
    summary << "test_inspections " << test.inspections() << '\n';
    for (const auto& r : reports) {
        summary << r.model << " rmse " << format_real(*r.entire.rmse);
        if (r.r_squared) summary << " r_squared " << format_real(*r.r_squared);
        summary << '\n';
    }
    try {
        summary << "spearman_frequency_vs_rmse_gain " << format_real(evalkit::spearman(freq, gain)) << '\n';
    } catch (const DegenerateFitError&) {
        summary << "spearman_frequency_vs_rmse_gain absent\n";
    }
    if (svg) {
        evalkit::PlotSpec spec;
        spec.kind = evalkit::PlotKind::scatter;
        spec.title = "maintenance frequency vs RMSE";
        spec.x_label = "annual maintenance";
        spec.y_label = "rmse (mm)";
        spec.series.push_back({linear.model, freq, linear.position_rmse});
        spec.series.push_back({model.model, freq, model.position_rmse});
        open_text(out / "frequency_scatter.svg") << evalkit::render_svg(spec);
    }
}

void print_report(const evalkit::EvalReport& r) {
    std::cout << r.model << ": rmse " << format_real(*r.entire.rmse);
    for (const auto& s : r.thresholds)
        std::cout << ", " << s.name << " rmse " << (s.rmse ? format_real(*s.rmse) : "absent") << " (n=" << s.count << ")";
    std::cout << '\n';
}

} // namespace

int cmd_simulate(const CommonOptions& common) {
    auto config = resolve(common);
    prepare_out(common.out);
    RunLog log(common.out, "simulate");
    const auto ds = trackgen::simulate(config.scenario);
    trackgen::write_dataset(ds, common.out / "dataset");
    write_resolved(config, common.out);

    double flags = 0.0, sq = 0.0;
    std::size_t below = 0, n = 0;
    for (double f : ds.exogenous.maintenance.values()) flags += f;
    for (std::size_t t = 0; t < ds.inspections(); ++t)
        for (std::size_t s = 0; s < trackgen::kTargetChannels; ++s)
            for (std::size_t l = 0; l < ds.positions(); ++l) {
                const double v = ds.irregularities(t, s, l);
                sq += v * v;
                below += v < config.scenario.trigger_threshold;
                ++n;
            }
    auto summary = open_text(common.out / "scenario_summary.txt");
    summary << "scenario_hash " << config.scenario.hash() << '\n'
            << "positions " << ds.positions() << '\n'
            << "inspections " << ds.inspections() << '\n'
            << "maintenance_flags " << static_cast<std::size_t>(flags) << '\n'
            << "vertical_rms_mm " << format_real(std::sqrt(sq / static_cast<double>(n))) << '\n'
            << "points_below_threshold " << below << '\n'
            << config.scenario.describe();
    std::cout << "simulated " << ds.inspections() << " inspections x " << ds.positions() << " m, "
              << static_cast<std::size_t>(flags) << " maintenance flags -> " << (common.out / "dataset").string()
              << '\n';
    log.line("scenario " + config.scenario.hash());
    return kSuccess;
}

int cmd_train(const CommonOptions& common, const fs::path& dataset) {
    auto config = resolve(common);
    prepare_out(common.out);
    RunLog log(common.out, "train");
    const auto ds = trackgen::read_dataset(dataset);
    const auto splits = split(config, ds);
    config.model.positions = ds.positions();
    write_resolved(config, common.out);

    forecaster::ForecastModel model(config.model);
    const auto result = forecaster::train(model, splits.train, splits.validation, config.training,
                                          [&](const forecaster::EpochLoss& e) {
                                              if (e.epoch == 1 || e.epoch % 50 == 0 || e.epoch == config.training.epochs)
                                                  log.line("epoch " + std::to_string(e.epoch) + " train " +
                                                           format_real(e.train_loss) + " val " + format_real(e.val_loss));
                                          });
    forecaster::write_checkpoint(model, common.out / "model.ckpt");
    forecaster::write_loss_csv(result.history, common.out / "loss.csv");
    auto summary = open_text(common.out / "training_summary.txt");
    summary << "variant " << cells::to_string(config.model.variant) << '\n'
            << "epochs " << result.history.size() << '\n'
            << "best_epoch " << result.best_epoch << '\n'
            << "best_val_loss " << format_real(result.best_val_loss) << '\n'
            << "train_windows " << trackgen::make_windows(splits.train, config.model.window).size() << '\n';
    std::cout << "trained " << cells::to_string(config.model.variant) << " for " << result.history.size()
              << " epochs, best epoch " << result.best_epoch << " (val mse " << format_real(result.best_val_loss)
              << ")\n";
    return kSuccess;
}

int cmd_evaluate(const CommonOptions& common, const EvaluateOptions& options) {
    auto config = resolve(common);
    prepare_out(common.out);
    RunLog log(common.out, "evaluate");
    const auto ds = trackgen::read_dataset(options.dataset);
    const auto splits = split(config, ds);

    std::vector<evalkit::EvalReport> reports;
    std::size_t window = config.model.window;
    if (options.oracle) {
        reports.push_back(evalkit::evaluate_pairs("oracle", evalkit::oracle_pairs(splits.test, window),
                                                  ds.positions(), config.evaluation));
    } else {
        if (!options.checkpoint) throw UsageError("evaluate needs --checkpoint (or --oracle)");
        const auto model = forecaster::read_checkpoint(*options.checkpoint);
        if (common.config) require_matching(model.config(), config.model);
        if (model.config().positions != ds.positions()) {
            throw DimensionError("checkpoint expects " + std::to_string(model.config().positions) +
                                 " positions, dataset has " + std::to_string(ds.positions()));
        }
        window = model.config().window;
        config.model = model.config();
        reports.push_back(evalkit::evaluate_pairs(std::string(cells::to_string(model.config().variant)),
                                                  evalkit::model_pairs(model, splits.test), ds.positions(),
                                                  config.evaluation));
    }
    reports.push_back(evalkit::evaluate_pairs("linear", evalkit::linear_pairs(splits.test, window), ds.positions(),
                                              config.evaluation));
    write_resolved(config, common.out);
    write_report_files(common.out, ds, splits.test, reports, options.svg);
    for (const auto& r : reports) print_report(r);
    return kSuccess;
}

int cmd_ablate(const CommonOptions& common, const fs::path& dataset, const std::string& cases) {
    auto config = resolve(common);
    const auto selected = evalkit::parse_cases(cases);
    prepare_out(common.out);
    RunLog log(common.out, "ablate");
    const auto ds = trackgen::read_dataset(dataset);
    const auto splits = split(config, ds);
    config.model.positions = ds.positions();
    write_resolved(config, common.out);

    const auto rows = evalkit::run_ablation(
        config.model, config.training, splits, selected, config.evaluation,
        [&](const evalkit::AblationRow& row, const forecaster::ForecastModel& model,
            const forecaster::TrainResult& result) {
            const auto dir = common.out / "cases" / row.ablation.name;
            fs::create_directories(dir);
            forecaster::write_checkpoint(model, dir / "model.ckpt");
            forecaster::write_loss_csv(result.history, dir / "loss.csv");
            log.line("case " + row.ablation.name + " done, best epoch " + std::to_string(result.best_epoch));
        });
    evalkit::write_ablation_csv(rows, config.evaluation, common.out / "ablation.csv");
    std::size_t ok = 0;
    for (const auto& r : rows) {
        if (r.ok()) {
            ++ok;
            print_report(*r.report);
        } else {
            std::cerr << "warning: case " << r.ablation.name << " failed: " << r.error << '\n';
            log.line("case " + r.ablation.name + " failed: " + r.error);
        }
    }
    if (ok < rows.size()) std::cerr << "warning: " << rows.size() - ok << " of " << rows.size() << " cases failed\n";
    return ok > 0 ? kSuccess : kNumeric;
}

int cmd_compare(const CommonOptions& common, const fs::path& dataset, const std::vector<fs::path>& checkpoints) {
    if (checkpoints.empty()) throw UsageError("compare needs at least one --checkpoint");
    auto config = resolve(common);
    prepare_out(common.out);
    RunLog log(common.out, "compare");
    const auto ds = trackgen::read_dataset(dataset);
    const auto splits = split(config, ds);

    std::vector<std::pair<std::string, forecaster::ForecastModel>> models;
    std::set<std::string> names;
    for (const auto& path : checkpoints) {
        auto model = forecaster::read_checkpoint(path);
        if (model.config().positions != ds.positions()) {
            throw DimensionError(path.string() + " expects " + std::to_string(model.config().positions) +
                                 " positions, dataset has " + std::to_string(ds.positions()));
        }
        auto name = path.stem().string();
        if (name == "model" && path.has_parent_path()) name = path.parent_path().filename().string();
        if (!names.insert(name).second) throw UsageError("two checkpoints are both named " + name);
        models.emplace_back(name, std::move(model));
    }
    const std::size_t window = models.front().second.config().window;
    // Every model must be scored on the same targets.
    for (const auto& [name, model] : models)
        if (model.config().window != window) throw UsageError("compared checkpoints must share the window length");

    std::vector<evalkit::EvalReport> reports;
    for (const auto& [name, model] : models) {
        reports.push_back(evalkit::evaluate_pairs(name, evalkit::model_pairs(model, splits.test), ds.positions(),
                                                  config.evaluation));
        log.line("evaluated " + name);
    }
    reports.push_back(evalkit::evaluate_pairs("linear", evalkit::linear_pairs(splits.test, window), ds.positions(),
                                              config.evaluation));
    write_resolved(config, common.out);
    write_report_files(common.out, ds, splits.test, reports, false);
    for (const auto& r : reports) print_report(r);
    return kSuccess;
}

int cmd_plot(const PlotOptions& options) {
    if (options.output.empty()) throw UsageError("--out is required");
    if (options.y.empty()) throw UsageError("--y needs at least one column");
    auto spec = evalkit::plot_from_csv(options.input, options.scatter ? evalkit::PlotKind::scatter : evalkit::PlotKind::line,
                                       options.x, options.y);
    if (!options.title.empty()) spec.title = options.title;
    if (options.output.has_parent_path()) fs::create_directories(options.output.parent_path());
    open_text(options.output) << evalkit::render_svg(spec);
    return kSuccess;
}

} // namespace trackcast::cli

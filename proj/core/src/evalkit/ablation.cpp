#include "trackcast/evalkit/ablation.hpp"

#include <fstream>

#include "trackcast/errors.hpp"

namespace trackcast::evalkit {

using trackgen::format_real;

const std::vector<AblationCase>& ablation_grid() {
    static const std::vector<AblationCase> grid = [] {
        std::vector<AblationCase> g;
        g.push_back({"with-all", exo::ExogenousFlags::all()});
        for (auto s : exo::kAllSources) {
            auto flags = exo::ExogenousFlags::all();
            flags.set(s, false);
            g.push_back({"without-" + std::string(exo::to_string(s)), flags});
        }
        g.push_back({"without-all", exo::ExogenousFlags::none()});
        return g;
    }();
    return grid;
}

AblationCase parse_case(std::string_view name) {
    for (const auto& c : ablation_grid())
        if (c.name == name) return c;
    std::string known;
    for (const auto& c : ablation_grid()) known += (known.empty() ? "" : ", ") + c.name;
    throw UsageError("unknown ablation case '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<AblationCase> parse_cases(std::string_view list) {
    if (list.empty()) return ablation_grid();
    std::vector<AblationCase> out;
    while (true) {
        const auto comma = list.find(',');
        const auto item = list.substr(0, comma);
        const auto c = parse_case(item);
        for (const auto& prev : out)
            if (prev.name == c.name) throw UsageError("ablation case '" + c.name + "' listed twice");
        out.push_back(c);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<AblationRow> run_ablation(const forecaster::ModelConfig& base, const forecaster::TrainConfig& training,
                                      const trackgen::Splits& splits, const std::vector<AblationCase>& cases,
                                      const EvalConfig& eval, const CaseCallback& on_case) {
    eval.validate();
    std::vector<AblationRow> rows;
    for (const auto& c : cases) {
        AblationRow row;
        row.ablation = c;
        row.config = base;
        row.config.flags = c.flags;
        try {
            forecaster::ForecastModel model(row.config);
            const auto result = forecaster::train(model, splits.train, splits.validation, training);
            row.best_epoch = result.best_epoch;
            const auto pairs = model_pairs(model, splits.test, training.threads);
            row.report = evaluate_pairs(c.name, pairs, splits.test.positions(), eval);
            if (on_case) on_case(row, model, result);
        } catch (const Error& e) {
            row.report.reset();
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> ablation_header(const EvalConfig& eval) {
    std::vector<std::string> h = {"case", "status", "best_epoch"};
    for (auto s : exo::kAllSources) h.emplace_back(exo::to_string(s));
    auto subset_columns = [&](const std::string& name) {
        h.push_back("n_" + name);
        h.push_back("rmse_" + name);
        for (double e : eval.epsilons) h.push_back("accuracy_" + name + "_eps" + format_real(e));
    };
    subset_columns("entire");
    for (double a : eval.alphas) subset_columns(subset_name(a));
    h.emplace_back("error");
    return h;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + '"';
}

} // namespace

void write_ablation_csv(const std::vector<AblationRow>& rows, const EvalConfig& eval,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    const auto header = ablation_header(eval);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    const std::size_t subsets = 1 + eval.alphas.size();
    for (const auto& r : rows) {
        out << r.ablation.name << ',' << (r.ok() ? "ok" : "failed") << ',' << r.best_epoch;
        for (auto s : exo::kAllSources) out << ',' << (r.ablation.flags.enabled(s) ? 1 : 0);
        for (std::size_t k = 0; k < subsets; ++k) {
            if (!r.ok()) {
                out << ",,";
                for (std::size_t e = 0; e < eval.epsilons.size(); ++e) out << ',';
                continue;
            }
            const auto& s = k == 0 ? r.report->entire : r.report->thresholds[k - 1];
            out << ',' << s.count << ',' << (s.rmse ? format_real(*s.rmse) : "");
            for (const auto& a : s.accuracy) out << ',' << (a ? format_real(*a) : "");
        }
        out << ',' << csv_field(r.error) << '\n';
    }
}

} // namespace trackcast::evalkit

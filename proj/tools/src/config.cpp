#include "config.hpp"

#include <fstream>
#include <set>

#include "trackcast/errors.hpp"

namespace trackcast::cli {

using json = nlohmann::ordered_json;

namespace {

// Reads the keys of one JSON object, remembering which were consumed so the
// rest can be rejected as unknown.
class Section {
public:
    Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ConfigurationError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    Section child(const std::string& key) {
        used_.insert(key);
        return Section(doc_.at(key), field(key));
    }

    void get(const std::string& key, double& out) {
        if (const auto* v = take(key)) {
            if (!v->is_number()) throw type_error(key, "a number");
            out = v->get<double>();
        }
    }
    void get(const std::string& key, std::size_t& out) {
        if (const auto* v = take(key)) out = unsigned_value(*v, key);
    }
    void get(const std::string& key, bool& out) {
        if (const auto* v = take(key)) {
            if (!v->is_boolean()) throw type_error(key, "true or false");
            out = v->get<bool>();
        }
    }
    void get(const std::string& key, std::string& out) {
        if (const auto* v = take(key)) {
            if (!v->is_string()) throw type_error(key, "a string");
            out = v->get<std::string>();
        }
    }
    void get(const std::string& key, std::vector<double>& out) {
        if (const auto* v = take(key)) {
            if (!v->is_array()) throw type_error(key, "an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) throw type_error(key, "an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }
    template <std::size_t N>
    void get(const std::string& key, std::array<double, N>& out) {
        std::vector<double> v(out.begin(), out.end());
        get(key, v);
        if (v.size() != N) {
            throw ConfigurationError(field(key) + " must have " + std::to_string(N) + " entries, got " +
                                     std::to_string(v.size()));
        }
        std::copy(v.begin(), v.end(), out.begin());
    }

    // Rejects keys nobody asked for.
    void finish() const {
        for (const auto& [key, value] : doc_.items())
            if (!used_.count(key)) throw ConfigurationError("unknown configuration key " + field(key));
    }

private:
    std::string where() const { return path_.empty() ? "configuration" : path_; }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* take(const std::string& key) {
        used_.insert(key);
        const auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }
    ConfigurationError type_error(const std::string& key, const char* expected) const {
        return ConfigurationError(field(key) + " must be " + expected);
    }
    std::uint64_t unsigned_value(const json& v, const std::string& key) const {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        throw type_error(key, "a non-negative integer");
    }

    const json& doc_;
    std::string path_;
    std::set<std::string> used_;
};

void read_scenario(Section s, trackgen::TrackScenario& sc) {
    s.get("positions", sc.positions);
    s.get("inspections", sc.inspections);
    s.get("interval_days", sc.interval_days);
    s.get("interval_jitter", sc.interval_jitter);
    s.get("base_rate", sc.base_rate);
    s.get("weak_spot_density", sc.weak_spot_density);
    if (s.has("sensitivity")) {
        auto sens = s.child("sensitivity");
        sens.get("ballast_age", sc.sensitivity.ballast_age);
        sens.get("tonnage", sc.sensitivity.tonnage);
        sens.get("rainfall", sc.sensitivity.rainfall);
        sens.get("structure_boundary", sc.sensitivity.structure_boundary);
        sens.get("joint", sc.sensitivity.joint);
        sens.finish();
    }
    s.get("trigger_threshold", sc.trigger_threshold);
    s.get("trigger_probability", sc.trigger_probability);
    s.get("scheduling_delay", sc.scheduling_delay);
    s.get("preventive_probability", sc.preventive_probability);
    s.get("repair_half_width", sc.repair_half_width);
    s.get("repair_effectiveness", sc.repair_effectiveness);
    s.get("category_weights", sc.category_weights);
    s.get("category_effectiveness", sc.category_effectiveness);
    s.get("measurement_sigma", sc.measurement_sigma);
    s.get("process_sigma", sc.process_sigma);
    s.get("daily_tonnage", sc.daily_tonnage);
    s.get("rainfall_scale", sc.rainfall_scale);
    s.finish();
}

void read_model(Section s, forecaster::ModelConfig& m) {
    std::string variant(cells::to_string(m.variant));
    s.get("variant", variant);
    try {
        m.variant = cells::parse_cell_kind(variant);
    } catch (const Error&) {
        throw ConfigurationError("model.variant must be convlstm, lstm or gru, got '" + variant + "'");
    }
    s.get("window", m.window);
    s.get("layers", m.layers);
    s.get("hidden", m.hidden);
    s.get("kernel_width", m.kernel_width);
    s.get("output_width", m.output_width);
    s.get("per_category_embedding", m.per_category_embedding);
    if (s.has("exogenous")) {
        auto ex = s.child("exogenous");
        for (auto src : exo::kAllSources) {
            bool on = m.flags.enabled(src);
            ex.get(std::string(exo::to_string(src)), on);
            m.flags.set(src, on);
        }
        ex.finish();
    }
    s.finish();
}

void read_training(Section s, forecaster::TrainConfig& t) {
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    s.get("learning_rate", t.adam.learning_rate);
    s.get("beta1", t.adam.beta1);
    s.get("beta2", t.adam.beta2);
    s.get("epsilon", t.adam.epsilon);
    s.finish();
}

void read_evaluation(Section s, evalkit::EvalConfig& e, SplitRatios& split) {
    s.get("alphas", e.alphas);
    s.get("epsilons", e.epsilons);
    s.get("train_ratio", split.train);
    s.get("validation_ratio", split.validation);
    s.finish();
}

} // namespace

void RunConfig::finalize() {
    scenario.seed = seed;
    model.seed = seed;
    training.seed = seed;
    scenario.validate();
    model.validate();
    training.validate();
    evaluation.validate();
    if (!(split.train > 0.0) || !(split.validation > 0.0) || !(split.train + split.validation < 1.0)) {
        throw ConfigurationError("evaluation.train_ratio and evaluation.validation_ratio must be positive and sum below 1");
    }
}

RunConfig parse_config(const json& doc, std::optional<std::uint64_t> seed_override) {
    RunConfig c;
    Section root(doc, "");
    if (!root.has("seed") && !seed_override) throw ConfigurationError("missing required field seed");
    std::size_t seed = c.seed;
    root.get("seed", seed);
    c.seed = seed;
    if (seed_override) c.seed = *seed_override;
    if (root.has("scenario")) read_scenario(root.child("scenario"), c.scenario);
    if (root.has("model")) read_model(root.child("model"), c.model);
    if (root.has("training")) read_training(root.child("training"), c.training);
    if (root.has("evaluation")) read_evaluation(root.child("evaluation"), c.evaluation, c.split);
    root.finish();
    c.finalize();
    return c;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
    return parse_config(doc, seed_override);
}

RunConfig default_config(std::uint64_t seed) {
    RunConfig c;
    c.seed = seed;
    c.finalize();
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    const auto& sc = c.scenario;
    j["scenario"] = {
        {"positions", sc.positions},
        {"inspections", sc.inspections},
        {"interval_days", sc.interval_days},
        {"interval_jitter", sc.interval_jitter},
        {"base_rate", sc.base_rate},
        {"weak_spot_density", sc.weak_spot_density},
        {"sensitivity",
         {{"ballast_age", sc.sensitivity.ballast_age},
          {"tonnage", sc.sensitivity.tonnage},
          {"rainfall", sc.sensitivity.rainfall},
          {"structure_boundary", sc.sensitivity.structure_boundary},
          {"joint", sc.sensitivity.joint}}},
        {"trigger_threshold", sc.trigger_threshold},
        {"trigger_probability", sc.trigger_probability},
        {"scheduling_delay", sc.scheduling_delay},
        {"preventive_probability", sc.preventive_probability},
        {"repair_half_width", sc.repair_half_width},
        {"repair_effectiveness", sc.repair_effectiveness},
        {"category_weights", sc.category_weights},
        {"category_effectiveness", sc.category_effectiveness},
        {"measurement_sigma", sc.measurement_sigma},
        {"process_sigma", sc.process_sigma},
        {"daily_tonnage", sc.daily_tonnage},
        {"rainfall_scale", sc.rainfall_scale},
    };
    json flags;
    for (auto src : exo::kAllSources) flags[std::string(exo::to_string(src))] = c.model.flags.enabled(src);
    j["model"] = {
        {"variant", std::string(cells::to_string(c.model.variant))},
        {"window", c.model.window},
        {"layers", c.model.layers},
        {"hidden", c.model.hidden},
        {"kernel_width", c.model.kernel_width},
        {"output_width", c.model.output_width},
        {"per_category_embedding", c.model.per_category_embedding},
        {"exogenous", flags},
    };
    j["training"] = {
        {"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"learning_rate", c.training.adam.learning_rate},
        {"beta1", c.training.adam.beta1},
        {"beta2", c.training.adam.beta2},
        {"epsilon", c.training.adam.epsilon},
    };
    j["evaluation"] = {
        {"alphas", c.evaluation.alphas},
        {"epsilons", c.evaluation.epsilons},
        {"train_ratio", c.split.train},
        {"validation_ratio", c.split.validation},
    };
    return j;
}

void write_resolved(const RunConfig& config, const std::filesystem::path& dir) {
    std::ofstream out(dir / "config.resolved.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "config.resolved.json").string());
    out << to_json(config).dump(2) << '\n';
}

} // namespace trackcast::cli

#include "trackcast/exo/embedding.hpp"

#include <cmath>

#include "trackcast/errors.hpp"
#include "trackcast/nn/ops.hpp"

namespace trackcast::exo {

namespace ops = nn::ops;

std::array<double, 2> encode_binary(double b) {
    if (b == 1.0) return {1.0, 0.0};
    if (b == 0.0) return {0.0, 1.0};
    throw EncodingError("binary value " + std::to_string(b) + " is not 0 or 1");
}

std::array<double, kStructureTypes> encode_structure(std::size_t category) {
    if (category >= kStructureTypes) {
        throw EncodingError("structure category " + std::to_string(category) + " outside 0..4");
    }
    std::array<double, kStructureTypes> v{};
    v[category] = 1.0;
    return v;
}

EmbeddingParams EmbeddingParams::create(nn::ParameterStore& store, const std::string& prefix,
                                        nn::Rng& rng, bool per_category) {
    EmbeddingParams p;
    p.per_category = per_category;
    auto layer = [&](const std::string& name, std::size_t in, std::size_t& w, std::size_t& b) {
        nn::Tensor weights({kEmbeddingWidth, in, 1});
        nn::Tensor bias({kEmbeddingWidth});
        nn::init_uniform(weights, in, rng);
        nn::init_uniform(bias, in, rng);
        w = store.add(prefix + "." + name + ".w", std::move(weights));
        b = store.add(prefix + "." + name + ".b", std::move(bias));
    };
    const std::size_t maint_layers = per_category ? kMaintenanceCategories : 1;
    p.maintenance_weights.resize(maint_layers);
    p.maintenance_bias.resize(maint_layers);
    for (std::size_t k = 0; k < maint_layers; ++k) {
        const std::string name = per_category ? "maintenance." + std::string(kMaintenanceNames[k]) : "maintenance";
        layer(name, 2, p.maintenance_weights[k], p.maintenance_bias[k]);
    }
    layer("structure", kStructureTypes, p.structure_weights, p.structure_bias);
    const std::size_t joint_layers = per_category ? kJointTypes : 1;
    p.joint_weights.resize(joint_layers);
    p.joint_bias.resize(joint_layers);
    for (std::size_t j = 0; j < joint_layers; ++j) {
        const std::string name = per_category ? "joint." + std::string(kJointNames[j]) : "joint";
        layer(name, 2, p.joint_weights[j], p.joint_bias[j]);
    }
    return p;
}

namespace {

double passthrough_value(const ExogenousBundle& b, std::size_t c, std::size_t t, std::size_t l) {
    if (c == 0) return b.ballast_age(t, l);
    if (c == 1) return b.tonnage(t, l);
    return b.rainfall(t, c - 2, l);
}

void check_window(const ExogenousBundle& bundle, Window window) {
    if (window.length == 0 || window.first + window.length > bundle.inspections) {
        throw RangeError("window [" + std::to_string(window.first) + ", " +
                         std::to_string(window.first + window.length) + ") outside " +
                         std::to_string(bundle.inspections) + " inspections");
    }
    auto issues = validate(bundle, window.first, window.length);
    if (!issues.empty()) {
        throw ValidationError("invalid exogenous bundle (" + std::to_string(issues.size()) +
                              " issues), first: " + issues.front().to_line());
    }
}

nn::Tensor binary_onehot(std::span<const double> row) {
    const std::size_t L = row.size();
    nn::Tensor out({2, L});
    for (std::size_t l = 0; l < L; ++l) {
        const auto e = encode_binary(row[l]);
        out(0, l) = e[0];
        out(1, l) = e[1];
    }
    return out;
}

std::span<const double> row_of(const nn::Tensor& t, std::size_t offset, std::size_t L) {
    return std::span<const double>(t.data() + offset, L);
}

} // namespace

PassthroughScaling PassthroughScaling::fit(const ExogenousBundle& bundle, std::size_t first,
                                           std::size_t count) {
    if (count == 0 || first + count > bundle.inspections) {
        throw RangeError("scaling range [" + std::to_string(first) + ", " + std::to_string(first + count) +
                         ") outside " + std::to_string(bundle.inspections) + " inspections");
    }
    PassthroughScaling s;
    const std::size_t L = bundle.positions;
    const double n = static_cast<double>(count * L);
    for (std::size_t c = 0; c < kPassthroughChannels; ++c) {
        double sum = 0.0;
        for (std::size_t t = first; t < first + count; ++t)
            for (std::size_t l = 0; l < L; ++l) sum += passthrough_value(bundle, c, t, l);
        const double mean = sum / n;
        double sq = 0.0;
        for (std::size_t t = first; t < first + count; ++t)
            for (std::size_t l = 0; l < L; ++l) {
                const double d = passthrough_value(bundle, c, t, l) - mean;
                sq += d * d;
            }
        const double sd = std::sqrt(sq / n);
        s.mean[c] = mean;
        s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

EmbeddingInputs embedding_inputs(const ExogenousBundle& bundle, Window window,
                                 const ExogenousFlags& flags) {
    check_window(bundle, window);
    const std::size_t L = bundle.positions;
    EmbeddingInputs in;
    if (flags.maintenance) {
        in.maintenance.resize(window.length);
        for (std::size_t s = 0; s < window.length; ++s) {
            const std::size_t t = window.first + s;
            for (std::size_t k = 0; k < kMaintenanceCategories; ++k) {
                in.maintenance[s].push_back(
                    binary_onehot(row_of(bundle.maintenance, (t * kMaintenanceCategories + k) * L, L)));
            }
        }
    }
    if (flags.under_structure) {
        in.structure = nn::Tensor({kStructureTypes, L});
        for (std::size_t l = 0; l < L; ++l) {
            const auto e = encode_structure(bundle.under_structure[l]);
            for (std::size_t c = 0; c < kStructureTypes; ++c) in.structure(c, l) = e[c];
        }
    }
    if (flags.rail_joint) {
        for (std::size_t j = 0; j < kJointTypes; ++j) {
            in.joints.push_back(binary_onehot(row_of(bundle.rail_joint, j * L, L)));
        }
    }
    return in;
}

std::vector<nn::Var> embed_bundle(nn::Tape& tape, const nn::ParameterStore& store,
                                  const EmbeddingParams& params, const PassthroughScaling& scaling,
                                  const ExogenousBundle& bundle, Window window,
                                  const ExogenousFlags& flags) {
    if (!flags.any()) {
        check_window(bundle, window);
        return {};
    }
    const EmbeddingInputs in = embedding_inputs(bundle, window, flags);
    const std::size_t L = bundle.positions;

    auto apply = [&](const nn::Tensor& x, std::size_t w, std::size_t b) {
        return ops::conv1d(tape.constant(x), tape.parameter(store[w]), tape.parameter(store[b]));
    };

    // Spatial-only sources are embedded once and shared by every step.
    nn::Var structure;
    if (flags.under_structure) structure = apply(in.structure, params.structure_weights, params.structure_bias);
    std::vector<nn::Var> joints;
    for (std::size_t j = 0; j < in.joints.size(); ++j) {
        const std::size_t layer = params.joint_layer(j);
        joints.push_back(apply(in.joints[j], params.joint_weights[layer], params.joint_bias[layer]));
    }

    std::vector<nn::Var> steps;
    steps.reserve(window.length);
    for (std::size_t s = 0; s < window.length; ++s) {
        const std::size_t t = window.first + s;
        std::vector<nn::Var> parts;
        if (flags.maintenance) {
            for (std::size_t k = 0; k < kMaintenanceCategories; ++k) {
                const std::size_t layer = params.maintenance_layer(k);
                parts.push_back(apply(in.maintenance[s][k], params.maintenance_weights[layer],
                                      params.maintenance_bias[layer]));
            }
        }
        if (flags.under_structure) parts.push_back(structure);
        parts.insert(parts.end(), joints.begin(), joints.end());

        std::vector<std::size_t> channels;
        if (flags.ballast_age) channels.push_back(0);
        if (flags.tonnage) channels.push_back(1);
        if (flags.rainfall) {
            for (std::size_t r = 0; r < kRainfallChannels; ++r) channels.push_back(2 + r);
        }
        if (!channels.empty()) {
            nn::Tensor pass({channels.size(), L});
            for (std::size_t i = 0; i < channels.size(); ++i) {
                const std::size_t c = channels[i];
                for (std::size_t l = 0; l < L; ++l) {
                    pass(i, l) = (passthrough_value(bundle, c, t, l) - scaling.mean[c]) / scaling.scale[c];
                }
            }
            parts.push_back(tape.constant(std::move(pass)));
        }
        steps.push_back(parts.size() == 1 ? parts.front() : ops::concat_channels(parts));
    }
    return steps;
}

nn::Tensor embed_bundle(const nn::ParameterStore& store, const EmbeddingParams& params,
                        const PassthroughScaling& scaling, const ExogenousBundle& bundle,
                        Window window, const ExogenousFlags& flags) {
    nn::Tape tape;
    auto steps = embed_bundle(tape, store, params, scaling, bundle, window, flags);
    if (steps.empty()) return {};
    const std::size_t C = steps.front().value().dim(0), L = bundle.positions;
    nn::Tensor out({window.length, C, L});
    for (std::size_t s = 0; s < steps.size(); ++s) out.set_slice(s, steps[s].value());
    return out;
}

} // namespace trackcast::exo

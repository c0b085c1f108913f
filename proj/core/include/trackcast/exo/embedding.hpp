#pragma once

#include <array>
#include <string>
#include <vector>

#include "trackcast/exo/bundle.hpp"
#include "trackcast/nn/parameters.hpp"
#include "trackcast/nn/tape.hpp"

namespace trackcast::exo {

inline constexpr std::size_t kEmbeddingWidth = 4;
inline constexpr std::size_t kPassthroughChannels = 6;

// 1 -> (1, 0), 0 -> (0, 1). Anything else is an EncodingError.
std::array<double, 2> encode_binary(double b);
// One-hot of length 5 with the 1 at `category`.
std::array<double, kStructureTypes> encode_structure(std::size_t category);

// Dense embedding layers, one per sparse data format. Each layer is stored as
// a width-1 kernel (4, n, 1) plus a bias (4) so it can be applied to every
// position at once. With `per_category` the maintenance and joint formats get
// one layer per category instead of a shared one.
struct EmbeddingParams {
    bool per_category = false;
    std::vector<std::size_t> maintenance_weights;
    std::vector<std::size_t> maintenance_bias;
    std::size_t structure_weights = 0;
    std::size_t structure_bias = 0;
    std::vector<std::size_t> joint_weights;
    std::vector<std::size_t> joint_bias;

    static EmbeddingParams create(nn::ParameterStore& store, const std::string& prefix,
                                  nn::Rng& rng, bool per_category = false);

    std::size_t maintenance_layer(std::size_t category) const { return per_category ? category : 0; }
    std::size_t joint_layer(std::size_t joint) const { return per_category ? joint : 0; }
};

// Affine standardisation of the real-valued channels, in the order
// ballast_age, tonnage, rainfall[0..3]: value -> (value - mean) / scale.
struct PassthroughScaling {
    std::array<double, kPassthroughChannels> mean{};
    std::array<double, kPassthroughChannels> scale{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

    static PassthroughScaling identity() { return {}; }
    // Mean and population standard deviation over inspections
    // [first, first + count); a constant channel keeps scale 1.
    static PassthroughScaling fit(const ExogenousBundle& bundle, std::size_t first, std::size_t count);

    bool operator==(const PassthroughScaling&) const = default;
};

struct Window {
    std::size_t first = 0;
    std::size_t length = 0;
};

// Every vector that enters an embedding layer for one window, as (n, L)
// tensors whose columns are the per-position one-hot inputs.
struct EmbeddingInputs {
    std::vector<std::vector<nn::Tensor>> maintenance;  // [step][category] (2, L)
    nn::Tensor structure;                              // (5, L)
    std::vector<nn::Tensor> joints;                    // [joint] (2, L)
};

EmbeddingInputs embedding_inputs(const ExogenousBundle& bundle, Window window,
                                 const ExogenousFlags& flags);

// Embedded exogenous features for each step of the window, each (C_e, L)
// with channels, in order: maintenance (category-major, 9 x 4), structure
// (4), joints (joint-major, 4 x 4), ballast_age, tonnage, rainfall (4),
// restricted to the enabled sources. Returns an empty vector when no source
// is enabled. Throws ValidationError on invalid bundle content.
std::vector<nn::Var> embed_bundle(nn::Tape& tape, const nn::ParameterStore& store,
                                  const EmbeddingParams& params, const PassthroughScaling& scaling,
                                  const ExogenousBundle& bundle, Window window,
                                  const ExogenousFlags& flags = {});

// Untaped form: (length, C_e, L), or an empty tensor when no source is enabled.
nn::Tensor embed_bundle(const nn::ParameterStore& store, const EmbeddingParams& params,
                        const PassthroughScaling& scaling, const ExogenousBundle& bundle,
                        Window window, const ExogenousFlags& flags = {});

} // namespace trackcast::exo

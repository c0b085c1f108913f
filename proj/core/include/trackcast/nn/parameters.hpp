#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "trackcast/nn/tensor.hpp"

namespace trackcast::nn {

struct Parameter {
    std::string name;
    Tensor value;
    std::size_t id = 0;
};

// Owns every learnable tensor of a model. Ids are dense indices in insertion
// order; references stay valid as parameters are added.
class ParameterStore {
public:
    std::size_t add(std::string name, Tensor initial);

    std::size_t size() const { return params_.size(); }
    Parameter& operator[](std::size_t id) { return params_[id]; }
    const Parameter& operator[](std::size_t id) const { return params_[id]; }
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t total_elements() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::deque<Parameter> params_;
};

// One gradient slot per parameter id. Slots a loss never touched stay empty.
class Gradients {
public:
    Gradients() = default;
    explicit Gradients(std::size_t count) : slots_(count) {}

    std::size_t size() const { return slots_.size(); }
    bool has(std::size_t id) const { return id < slots_.size() && !slots_[id].empty(); }
    const Tensor& operator[](std::size_t id) const { return slots_.at(id); }
    Tensor& slot(std::size_t id);

    // Dense copy with zeros for untouched parameters.
    std::vector<Tensor> densify(const ParameterStore& store) const;

private:
    std::vector<Tensor> slots_;
};

// Seeded generator with named, independent sub-streams ("simulate", "init",
// "shuffle", ...) so one config seed drives every random decision.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    static Rng stream(std::uint64_t seed, std::string_view name);

    std::mt19937_64& engine() { return engine_; }
    double uniform(double lo, double hi);
    double normal(double mean, double stddev);
    std::size_t index(std::size_t n);
    bool bernoulli(double p);

private:
    std::mt19937_64 engine_;
};

// Fills `t` uniformly in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng);

} // namespace trackcast::nn

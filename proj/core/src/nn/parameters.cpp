#include "trackcast/nn/parameters.hpp"

#include <cmath>

#include "trackcast/errors.hpp"

namespace trackcast::nn {

std::size_t ParameterStore::add(std::string name, Tensor initial) {
    if (find(name)) throw UsageError("duplicate parameter name '" + name + "'");
    const std::size_t id = params_.size();
    params_.push_back(Parameter{std::move(name), std::move(initial), id});
    return id;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
    for (const auto& p : params_) {
        if (p.name == name) return p.id;
    }
    return std::nullopt;
}

std::size_t ParameterStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

Tensor& Gradients::slot(std::size_t id) {
    if (id >= slots_.size()) slots_.resize(id + 1);
    return slots_[id];
}

std::vector<Tensor> Gradients::densify(const ParameterStore& store) const {
    std::vector<Tensor> out;
    out.reserve(store.size());
    for (const auto& p : store) {
        out.push_back(has(p.id) ? slots_[p.id] : Tensor::zeros_like(p.value));
    }
    return out;
}

Rng Rng::stream(std::uint64_t seed, std::string_view name) {
    // FNV-1a over the stream name, mixed with the seed through splitmix64.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (h | 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
}

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
}

std::size_t Rng::index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

bool Rng::bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return std::bernoulli_distribution(p)(engine_);
}

void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
    for (auto& v : t.values()) v = rng.uniform(-bound, bound);
}

} // namespace trackcast::nn

#include "trackcast/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trackcast::nn {

namespace {

double evaluate(const std::function<Var(Tape&)>& loss_fn) {
    Tape tape;
    return loss_fn(tape).value()[0];
}

} // namespace

GradCheckResult check_gradients(ParameterStore& params,
                                const std::function<Var(Tape&)>& loss_fn,
                                const GradCheckOptions& options) {
    std::vector<Tensor> analytic;
    {
        Tape tape;
        Var loss = loss_fn(tape);
        analytic = tape.backward(loss).densify(params);
    }

    Rng rng = Rng::stream(options.seed, "gradcheck");
    GradCheckResult result;
    for (auto& p : params) {
        std::vector<std::size_t> entries(p.value.size());
        std::iota(entries.begin(), entries.end(), std::size_t{0});
        if (options.max_entries_per_parameter != 0 &&
            entries.size() > options.max_entries_per_parameter) {
            std::shuffle(entries.begin(), entries.end(), rng.engine());
            entries.resize(options.max_entries_per_parameter);
            std::sort(entries.begin(), entries.end());
        }
        for (auto i : entries) {
            const double saved = p.value[i];
            p.value[i] = saved + options.step;
            const double plus = evaluate(loss_fn);
            p.value[i] = saved - options.step;
            const double minus = evaluate(loss_fn);
            p.value[i] = saved;

            const double numeric = (plus - minus) / (2.0 * options.step);
            const double a = analytic[p.id][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
            const double rel = std::abs(a - numeric) / denom;
            ++result.entries_checked;
            if (rel >= result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst_parameter = p.name;
                result.worst_index = i;
                result.worst_analytic = a;
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

} // namespace trackcast::nn

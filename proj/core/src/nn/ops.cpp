#include "trackcast/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "trackcast/errors.hpp"
#include "trackcast/nn/conv.hpp"

namespace trackcast::nn::ops {

namespace {

Tape& tape_of(Var v) {
    if (!v.valid()) throw UsageError("operation on an unbound Var");
    return *v.tape();
}

void same_tape(Var a, Var b) {
    if (a.tape() != b.tape()) throw UsageError("operands recorded on different tapes");
}

} // namespace

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Var conv1d(Var input, Var weights, std::optional<Var> bias) {
    Tape& tape = tape_of(input);
    same_tape(input, weights);
    if (bias) same_tape(input, *bias);
    const Tensor* b = bias ? &bias->value() : nullptr;
    kernels::check_conv_shapes(input.value(), weights.value(), b);

    Tensor out({weights.value().dim(0), input.value().dim(1)});
    kernels::conv1d_forward(input.value(), weights.value(), b, out);

    const auto x = input.id();
    const auto w = weights.id();
    const auto bid = bias ? std::optional<std::size_t>(bias->id()) : std::nullopt;
    auto backprop = [x, w, bid](const Tensor& g, BackwardContext& ctx) {
        kernels::conv1d_backward(ctx.value(x), ctx.value(w), g,
                                 ctx.wants(x) ? &ctx.grad(x) : nullptr,
                                 ctx.wants(w) ? &ctx.grad(w) : nullptr,
                                 bid && ctx.wants(*bid) ? &ctx.grad(*bid) : nullptr);
    };
    if (bias) return tape.record(std::move(out), {input, weights, *bias}, backprop);
    return tape.record(std::move(out), {input, weights}, backprop);
}

Var dense(Var input, Var weights, Var bias) {
    Tape& tape = tape_of(input);
    same_tape(input, weights);
    same_tape(input, bias);
    Tensor out = nn::dense(input.value(), weights.value(), bias.value());
    const auto x = input.id();
    const auto w = weights.id();
    const auto b = bias.id();
    return tape.record(std::move(out), {input, weights, bias},
                       [x, w, b](const Tensor& g, BackwardContext& ctx) {
                           const Tensor& wv = ctx.value(w);
                           const Tensor& xv = ctx.value(x);
                           const std::size_t rows = wv.dim(0), cols = wv.dim(1);
                           if (ctx.wants(b)) ctx.grad(b) += g;
                           if (ctx.wants(w)) {
                               Tensor& gw = ctx.grad(w);
                               for (std::size_t r = 0; r < rows; ++r)
                                   for (std::size_t c = 0; c < cols; ++c) gw(r, c) += g[r] * xv[c];
                           }
                           if (ctx.wants(x)) {
                               Tensor& gx = ctx.grad(x);
                               for (std::size_t r = 0; r < rows; ++r)
                                   for (std::size_t c = 0; c < cols; ++c) gx[c] += wv(r, c) * g[r];
                           }
                       });
}

Var add(Var a, Var b) {
    Tape& tape = tape_of(a);
    same_tape(a, b);
    require_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    out += b.value();
    const auto ia = a.id(), ib = b.id();
    return tape.record(std::move(out), {a, b}, [ia, ib](const Tensor& g, BackwardContext& ctx) {
        if (ctx.wants(ia)) ctx.grad(ia) += g;
        if (ctx.wants(ib)) ctx.grad(ib) += g;
    });
}

Var sub(Var a, Var b) {
    Tape& tape = tape_of(a);
    same_tape(a, b);
    require_same_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    const auto& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    const auto ia = a.id(), ib = b.id();
    return tape.record(std::move(out), {a, b}, [ia, ib](const Tensor& g, BackwardContext& ctx) {
        if (ctx.wants(ia)) ctx.grad(ia) += g;
        if (ctx.wants(ib)) {
            Tensor& gb = ctx.grad(ib);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    Tape& tape = tape_of(a);
    same_tape(a, b);
    require_same_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    const auto& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    const auto ia = a.id(), ib = b.id();
    return tape.record(std::move(out), {a, b}, [ia, ib](const Tensor& g, BackwardContext& ctx) {
        if (ctx.wants(ia)) {
            Tensor& ga = ctx.grad(ia);
            const Tensor& bv = ctx.value(ib);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (ctx.wants(ib)) {
            Tensor& gb = ctx.grad(ib);
            const Tensor& av = ctx.value(ia);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var scale(Var a, double factor) {
    Tape& tape = tape_of(a);
    Tensor out = a.value();
    out *= factor;
    const auto ia = a.id();
    return tape.record(std::move(out), {a}, [ia, factor](const Tensor& g, BackwardContext& ctx) {
        Tensor& ga = ctx.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    });
}

Var sigmoid(Var a) {
    Tape& tape = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.values()) v = sigmoid(v);
    const auto ia = a.id();
    const auto self = tape.size();
    return tape.record(std::move(out), {a}, [ia, self](const Tensor& g, BackwardContext& ctx) {
        Tensor& ga = ctx.grad(ia);
        const Tensor& s = ctx.value(self);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s[i] * (1.0 - s[i]);
    });
}

Var tanh(Var a) {
    Tape& tape = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.values()) v = std::tanh(v);
    const auto ia = a.id();
    const auto self = tape.size();
    return tape.record(std::move(out), {a}, [ia, self](const Tensor& g, BackwardContext& ctx) {
        Tensor& ga = ctx.grad(ia);
        const Tensor& t = ctx.value(self);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - t[i] * t[i]);
    });
}

Var concat_channels(const std::vector<Var>& parts) {
    if (parts.empty()) throw UsageError("concat_channels: no inputs");
    Tape& tape = tape_of(parts.front());
    const std::size_t positions = parts.front().value().dim(1);
    std::size_t channels = 0;
    for (const auto& p : parts) {
        same_tape(parts.front(), p);
        require_rank(p.value(), 2, "concat_channels");
        if (p.value().dim(1) != positions) {
            throw DimensionError("concat_channels: position counts differ (" +
                                 std::to_string(p.value().dim(1)) + " vs " +
                                 std::to_string(positions) + ")");
        }
        channels += p.value().dim(0);
    }
    Tensor out({channels, positions});
    std::vector<std::size_t> ids;
    std::size_t offset = 0;
    for (const auto& p : parts) {
        std::copy(p.value().storage().begin(), p.value().storage().end(), out.data() + offset);
        offset += p.value().size();
        ids.push_back(p.id());
    }
    return tape.record(std::move(out), parts, [ids](const Tensor& g, BackwardContext& ctx) {
        std::size_t off = 0;
        for (auto id : ids) {
            const std::size_t n = ctx.value(id).size();
            if (ctx.wants(id)) {
                Tensor& gp = ctx.grad(id);
                for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
            }
            off += n;
        }
    });
}

Var slice_channels(Var a, std::size_t begin, std::size_t count) {
    Tape& tape = tape_of(a);
    require_rank(a.value(), 2, "slice_channels");
    if (count == 0 || begin + count > a.value().dim(0)) {
        throw DimensionError("slice_channels: rows [" + std::to_string(begin) + ", " +
                             std::to_string(begin + count) + ") out of " +
                             shape_string(a.value().shape()));
    }
    const std::size_t positions = a.value().dim(1);
    const auto first = a.value().storage().begin() + static_cast<std::ptrdiff_t>(begin * positions);
    Tensor out({count, positions},
               std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * positions)));
    const auto ia = a.id();
    return tape.record(std::move(out), {a},
                       [ia, begin, positions](const Tensor& g, BackwardContext& ctx) {
                           Tensor& ga = ctx.grad(ia);
                           const std::size_t off = begin * positions;
                           for (std::size_t i = 0; i < g.size(); ++i) ga[off + i] += g[i];
                       });
}

Var mse_loss(Var prediction, Var target) {
    Tape& tape = tape_of(prediction);
    same_tape(prediction, target);
    require_same_shape(prediction.value(), target.value(), "mse_loss");
    const auto& p = prediction.value();
    const auto& t = target.value();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        acc += d * d;
    }
    const double n = static_cast<double>(p.size());
    const auto ip = prediction.id(), it = target.id();
    return tape.record(Tensor({1}, acc / n), {prediction, target},
                       [ip, it, n](const Tensor& g, BackwardContext& ctx) {
                           const Tensor& pv = ctx.value(ip);
                           const Tensor& tv = ctx.value(it);
                           const double s = 2.0 * g[0] / n;
                           if (ctx.wants(ip)) {
                               Tensor& gp = ctx.grad(ip);
                               for (std::size_t i = 0; i < pv.size(); ++i) gp[i] += s * (pv[i] - tv[i]);
                           }
                           if (ctx.wants(it)) {
                               Tensor& gt = ctx.grad(it);
                               for (std::size_t i = 0; i < pv.size(); ++i) gt[i] -= s * (pv[i] - tv[i]);
                           }
                       });
}

Var sum(const std::vector<Var>& scalars) {
    if (scalars.empty()) throw UsageError("sum: no inputs");
    Tape& tape = tape_of(scalars.front());
    double acc = 0.0;
    std::vector<std::size_t> ids;
    for (const auto& s : scalars) {
        same_tape(scalars.front(), s);
        if (s.value().size() != 1) throw DimensionError("sum: inputs must be scalars");
        acc += s.value()[0];
        ids.push_back(s.id());
    }
    return tape.record(Tensor({1}, acc), scalars, [ids](const Tensor& g, BackwardContext& ctx) {
        for (auto id : ids) {
            if (ctx.wants(id)) ctx.grad(id)[0] += g[0];
        }
    });
}

} // namespace trackcast::nn::ops

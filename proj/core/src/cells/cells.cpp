#include "trackcast/cells/cells.hpp"

#include "trackcast/errors.hpp"
#include "trackcast/nn/ops.hpp"

namespace trackcast::cells {

namespace ops = nn::ops;
using nn::Tensor;
using nn::Var;

std::string_view to_string(CellKind kind) {
    switch (kind) {
    case CellKind::convlstm: return "convlstm";
    case CellKind::lstm: return "lstm";
    case CellKind::gru: return "gru";
    }
    return "?";
}

CellKind parse_cell_kind(std::string_view text) {
    if (text == "convlstm") return CellKind::convlstm;
    if (text == "lstm") return CellKind::lstm;
    if (text == "gru") return CellKind::gru;
    throw ConfigurationError("unknown cell variant '" + std::string(text) +
                             "' (expected convlstm, lstm or gru)");
}

ConvLSTMCellParams ConvLSTMCellParams::create(nn::ParameterStore& store, const std::string& prefix,
                                              std::size_t input_channels,
                                              std::size_t hidden_channels, std::size_t width,
                                              std::size_t positions, nn::Rng& rng) {
    if (width % 2 == 0) {
        throw ConfigurationError("convlstm kernel width must be odd, got " + std::to_string(width));
    }
    if (input_channels == 0 || hidden_channels == 0 || positions == 0) {
        throw ConfigurationError("convlstm cell needs non-zero channels and positions");
    }
    const std::size_t fan_in = (input_channels + hidden_channels) * width;
    const std::size_t gates = 4 * hidden_channels;
    auto make = [&](const std::string& name, nn::Shape shape) {
        Tensor t(std::move(shape));
        nn::init_uniform(t, fan_in, rng);
        return store.add(prefix + name, std::move(t));
    };
    ConvLSTMCellParams p;
    p.input_channels = input_channels;
    p.hidden_channels = hidden_channels;
    p.width = width;
    p.positions = positions;
    p.input_kernel = make(".w_x", {gates, input_channels, width});
    p.hidden_kernel = make(".w_h", {gates, hidden_channels, width});
    p.bias = make(".b", {gates});
    p.peephole_i = make(".w_ci", {hidden_channels, positions});
    p.peephole_f = make(".w_cf", {hidden_channels, positions});
    p.peephole_o = make(".w_co", {hidden_channels, positions});
    return p;
}

PointwiseRNNParams PointwiseRNNParams::create(nn::ParameterStore& store, const std::string& prefix,
                                              CellKind kind, std::size_t input_channels,
                                              std::size_t hidden_channels, nn::Rng& rng) {
    if (kind == CellKind::convlstm) throw ConfigurationError("pointwise cell must be lstm or gru");
    if (input_channels == 0 || hidden_channels == 0) {
        throw ConfigurationError("pointwise cell needs non-zero channels");
    }
    const std::size_t gates = (kind == CellKind::lstm ? 4 : 3) * hidden_channels;
    const std::size_t fan_in = input_channels + hidden_channels;
    auto make = [&](const std::string& name, nn::Shape shape) {
        Tensor t(std::move(shape));
        nn::init_uniform(t, fan_in, rng);
        return store.add(prefix + name, std::move(t));
    };
    PointwiseRNNParams p;
    p.kind = kind;
    p.input_channels = input_channels;
    p.hidden_channels = hidden_channels;
    p.input_weights = make(".w_x", {gates, input_channels, 1});
    p.hidden_weights = make(".w_h", {gates, hidden_channels, 1});
    p.input_bias = make(".b_x", {gates});
    p.hidden_bias = make(".b_h", {gates});
    return p;
}

namespace {

void check_state(const Tensor& t, std::size_t channels, std::size_t positions, const char* what) {
    if (t.rank() != 2 || t.dim(0) != channels || t.dim(1) != positions) {
        throw DimensionError(std::string(what) + ": expected (" + std::to_string(channels) + ", " +
                             std::to_string(positions) + "), got " + nn::shape_string(t.shape()));
    }
}

void check_input(const Tensor& x, std::size_t channels, const char* what) {
    if (x.rank() != 2 || x.dim(0) != channels) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(channels) +
                             " input channels, got shape " + nn::shape_string(x.shape()));
    }
}

Var param(nn::Tape& tape, const nn::ParameterStore& store, std::size_t id) {
    return tape.parameter(store[id]);
}

// (C) -> (C, 1); (C, L) unchanged.
Tensor as_columns(const Tensor& t) {
    if (t.rank() == 1) return Tensor({t.dim(0), 1}, t.storage());
    return t;
}

Tensor restore_rank(const Tensor& t, std::size_t rank) {
    if (rank == 1) return Tensor({t.dim(0)}, t.storage());
    return t;
}

} // namespace

StateVars convlstm_step(nn::Tape& tape, const nn::ParameterStore& store,
                        const ConvLSTMCellParams& p, Var x, const StateVars& prev) {
    const std::size_t h = p.hidden_channels;
    check_state(x.value(), p.input_channels, p.positions, "convlstm_step input");
    check_state(prev.hidden.value(), h, p.positions, "convlstm_step hidden");
    check_state(prev.cell.value(), h, p.positions, "convlstm_step cell");

    Var gates = ops::add(ops::conv1d(x, param(tape, store, p.input_kernel), param(tape, store, p.bias)),
                         ops::conv1d(prev.hidden, param(tape, store, p.hidden_kernel)));
    Var i = ops::sigmoid(ops::add(ops::slice_channels(gates, 0, h),
                                  ops::mul(param(tape, store, p.peephole_i), prev.cell)));
    Var f = ops::sigmoid(ops::add(ops::slice_channels(gates, h, h),
                                  ops::mul(param(tape, store, p.peephole_f), prev.cell)));
    Var candidate = ops::tanh(ops::slice_channels(gates, 2 * h, h));
    Var cell = ops::add(ops::mul(f, prev.cell), ops::mul(i, candidate));
    Var o = ops::sigmoid(ops::add(ops::slice_channels(gates, 3 * h, h),
                                  ops::mul(param(tape, store, p.peephole_o), cell)));
    Var hidden = ops::mul(o, ops::tanh(cell));
    return {hidden, cell};
}

StateVars lstm_step(nn::Tape& tape, const nn::ParameterStore& store, const PointwiseRNNParams& p,
                    Var x, const StateVars& prev) {
    if (p.kind != CellKind::lstm) throw UsageError("lstm_step called with non-LSTM parameters");
    const std::size_t h = p.hidden_channels;
    check_input(x.value(), p.input_channels, "lstm_step input");
    const std::size_t positions = x.value().dim(1);
    check_state(prev.hidden.value(), h, positions, "lstm_step hidden");
    check_state(prev.cell.value(), h, positions, "lstm_step cell");

    Var gates = ops::add(
        ops::conv1d(x, param(tape, store, p.input_weights), param(tape, store, p.input_bias)),
        ops::conv1d(prev.hidden, param(tape, store, p.hidden_weights),
                    param(tape, store, p.hidden_bias)));
    Var i = ops::sigmoid(ops::slice_channels(gates, 0, h));
    Var f = ops::sigmoid(ops::slice_channels(gates, h, h));
    Var g = ops::tanh(ops::slice_channels(gates, 2 * h, h));
    Var o = ops::sigmoid(ops::slice_channels(gates, 3 * h, h));
    Var cell = ops::add(ops::mul(f, prev.cell), ops::mul(i, g));
    Var hidden = ops::mul(o, ops::tanh(cell));
    return {hidden, cell};
}

Var gru_step(nn::Tape& tape, const nn::ParameterStore& store, const PointwiseRNNParams& p, Var x,
             Var prev_hidden) {
    if (p.kind != CellKind::gru) throw UsageError("gru_step called with non-GRU parameters");
    const std::size_t h = p.hidden_channels;
    check_input(x.value(), p.input_channels, "gru_step input");
    check_state(prev_hidden.value(), h, x.value().dim(1), "gru_step hidden");

    Var gx = ops::conv1d(x, param(tape, store, p.input_weights), param(tape, store, p.input_bias));
    Var gh = ops::conv1d(prev_hidden, param(tape, store, p.hidden_weights),
                         param(tape, store, p.hidden_bias));
    Var r = ops::sigmoid(ops::add(ops::slice_channels(gx, 0, h), ops::slice_channels(gh, 0, h)));
    Var z = ops::sigmoid(ops::add(ops::slice_channels(gx, h, h), ops::slice_channels(gh, h, h)));
    Var n = ops::tanh(ops::add(ops::slice_channels(gx, 2 * h, h),
                               ops::mul(r, ops::slice_channels(gh, 2 * h, h))));
    // h = (1 - z) . n + z . h_prev
    return ops::add(n, ops::mul(z, ops::sub(prev_hidden, n)));
}

CellState convlstm_step(const Tensor& x, const CellState& prev, const nn::ParameterStore& store,
                        const ConvLSTMCellParams& params) {
    nn::Tape tape;
    auto next = convlstm_step(tape, store, params, tape.constant(x),
                              {tape.constant(prev.hidden), tape.constant(prev.cell)});
    return {next.hidden.value(), next.cell.value()};
}

CellState lstm_step(const Tensor& x, const CellState& prev, const nn::ParameterStore& store,
                    const PointwiseRNNParams& params) {
    nn::Tape tape;
    auto next = lstm_step(tape, store, params, tape.constant(as_columns(x)),
                          {tape.constant(as_columns(prev.hidden)), tape.constant(as_columns(prev.cell))});
    return {restore_rank(next.hidden.value(), x.rank()), restore_rank(next.cell.value(), x.rank())};
}

Tensor gru_step(const Tensor& x, const Tensor& prev_hidden, const nn::ParameterStore& store,
                const PointwiseRNNParams& params) {
    nn::Tape tape;
    Var h = gru_step(tape, store, params, tape.constant(as_columns(x)),
                     tape.constant(as_columns(prev_hidden)));
    return restore_rank(h.value(), x.rank());
}

CellKind RecurrentLayer::kind() const {
    if (std::holds_alternative<ConvLSTMCellParams>(params)) return CellKind::convlstm;
    return std::get<PointwiseRNNParams>(params).kind;
}

std::size_t RecurrentLayer::input_channels() const {
    return std::visit([](const auto& p) { return p.input_channels; }, params);
}

std::size_t RecurrentLayer::hidden_channels() const {
    return std::visit([](const auto& p) { return p.hidden_channels; }, params);
}

StateVars zero_state(nn::Tape& tape, const RecurrentLayer& layer, std::size_t positions) {
    const Tensor zeros({layer.hidden_channels(), positions});
    StateVars s{tape.constant(zeros), {}};
    if (layer.kind() != CellKind::gru) s.cell = tape.constant(zeros);
    return s;
}

StateVars step(nn::Tape& tape, const nn::ParameterStore& store, const RecurrentLayer& layer, Var x,
               const StateVars& prev) {
    switch (layer.kind()) {
    case CellKind::convlstm:
        return convlstm_step(tape, store, std::get<ConvLSTMCellParams>(layer.params), x, prev);
    case CellKind::lstm:
        return lstm_step(tape, store, std::get<PointwiseRNNParams>(layer.params), x, prev);
    case CellKind::gru:
        return {gru_step(tape, store, std::get<PointwiseRNNParams>(layer.params), x, prev.hidden), {}};
    }
    throw UsageError("unknown cell kind");
}

std::vector<Var> unroll(nn::Tape& tape, const nn::ParameterStore& store,
                        const RecurrentLayer& layer, std::span<const Var> inputs) {
    if (inputs.empty()) throw UsageError("unroll: empty input sequence");
    StateVars state = zero_state(tape, layer, inputs.front().value().dim(1));
    std::vector<Var> hidden;
    hidden.reserve(inputs.size());
    for (const auto& x : inputs) {
        state = step(tape, store, layer, x, state);
        hidden.push_back(state.hidden);
    }
    return hidden;
}

std::vector<Tensor> unroll(const nn::ParameterStore& store, const RecurrentLayer& layer,
                           std::span<const Tensor> inputs) {
    if (inputs.empty()) throw UsageError("unroll: empty input sequence");
    nn::Tape tape;
    std::vector<Var> xs;
    for (const auto& x : inputs) xs.push_back(tape.constant(as_columns(x)));
    std::vector<Tensor> out;
    for (const auto& h : unroll(tape, store, layer, xs)) {
        out.push_back(restore_rank(h.value(), inputs.front().rank()));
    }
    return out;
}

} // namespace trackcast::cells

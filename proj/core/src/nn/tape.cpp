#include "trackcast/nn/tape.hpp"

#include "trackcast/errors.hpp"

namespace trackcast::nn {

const Tensor& Var::value() const {
    if (!tape_) throw UsageError("value() on an unbound Var");
    return tape_->value(id_);
}

const Tensor& BackwardContext::value(std::size_t id) const { return tape_.value(id); }

bool BackwardContext::wants(std::size_t id) const { return tape_.requires_grad(id); }

Tensor& BackwardContext::grad(std::size_t id) {
    auto& g = grads_[id];
    if (g.empty()) g = Tensor::zeros_like(tape_.value(id));
    return g;
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), nullptr, false, -1, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const Parameter& p) {
    if (auto it = parameter_nodes_.find(p.id); it != parameter_nodes_.end()) {
        return Var(this, it->second);
    }
    nodes_.push_back(Node{Tensor{}, &p.value, true, static_cast<std::ptrdiff_t>(p.id), {}});
    parameter_nodes_.emplace(p.id, nodes_.size() - 1);
    return Var(this, nodes_.size() - 1);
}

bool Tape::any_requires_grad(const Var* first, const Var* last) const {
    for (auto it = first; it != last; ++it) {
        if (it->tape_ != this) throw UsageError("operand recorded on a different tape");
        if (nodes_[it->id_].requires_grad) return true;
    }
    return false;
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backprop backprop) {
    const bool needs = any_requires_grad(inputs.begin(), inputs.end());
    nodes_.push_back(Node{std::move(value), nullptr, needs, -1, needs ? std::move(backprop) : Backprop{}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, Backprop backprop) {
    const bool needs = any_requires_grad(inputs.data(), inputs.data() + inputs.size());
    nodes_.push_back(Node{std::move(value), nullptr, needs, -1, needs ? std::move(backprop) : Backprop{}});
    return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
    const auto& n = nodes_.at(id);
    return n.external ? *n.external : n.value;
}

Gradients Tape::backward(Var loss) const {
    if (loss.tape_ != this || loss.id_ >= nodes_.size()) {
        throw UsageError("backward: loss is not a node of this tape");
    }
    if (value(loss.id_).size() != 1) {
        throw UsageError("backward: loss must be a scalar, got shape " +
                         shape_string(value(loss.id_).shape()));
    }
    std::size_t max_param = 0;
    for (const auto& [pid, node] : parameter_nodes_) max_param = std::max(max_param, pid + 1);
    Gradients out(max_param);
    if (!nodes_[loss.id_].requires_grad) return out;

    std::vector<Tensor> grads(loss.id_ + 1);
    grads[loss.id_] = Tensor(value(loss.id_).shape(), 1.0);
    BackwardContext ctx(*this, grads);
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        const auto& node = nodes_[i];
        if (grads[i].empty() || !node.requires_grad) continue;
        if (node.parameter_id >= 0) {
            out.slot(static_cast<std::size_t>(node.parameter_id)) = std::move(grads[i]);
        } else if (node.backprop) {
            node.backprop(grads[i], ctx);
        }
        grads[i] = Tensor{};
    }
    return out;
}

} // namespace trackcast::nn

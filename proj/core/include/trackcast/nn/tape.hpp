#pragma once

#include <deque>
#include <functional>
#include <initializer_list>
#include <unordered_map>
#include <vector>

#include "trackcast/nn/parameters.hpp"
#include "trackcast/nn/tensor.hpp"

namespace trackcast::nn {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    std::size_t id() const { return id_; }
    Tape* tape() const { return tape_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// What a node's backprop function sees: forward values of any node and
// lazily zero-initialised gradient buffers of the nodes that need one.
class BackwardContext {
public:
    const Tensor& value(std::size_t id) const;
    bool wants(std::size_t id) const;
    Tensor& grad(std::size_t id);

private:
    friend class Tape;
    BackwardContext(const Tape& tape, std::vector<Tensor>& grads) : tape_(tape), grads_(grads) {}

    const Tape& tape_;
    std::vector<Tensor>& grads_;
};

using Backprop = std::function<void(const Tensor& grad_out, BackwardContext& ctx)>;

// Linear record of forward operations. Nodes are appended in evaluation
// order, so walking them backwards is a valid reverse topological order and
// gradient accumulation happens in a fixed, reproducible sequence.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    // Leaf that routes its gradient to `p.id`. The parameter must outlive the tape.
    Var parameter(const Parameter& p);
    Var record(Tensor value, std::initializer_list<Var> inputs, Backprop backprop);
    Var record(Tensor value, const std::vector<Var>& inputs, Backprop backprop);

    // d(loss)/d(parameter) for every parameter leaf. `loss` must be a
    // single-element node of this tape; anything else is a UsageError.
    Gradients backward(Var loss) const;

    const Tensor& value(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        const Tensor* external = nullptr;
        bool requires_grad = false;
        std::ptrdiff_t parameter_id = -1;
        Backprop backprop;
    };

    bool any_requires_grad(const Var* first, const Var* last) const;

    std::deque<Node> nodes_;
    std::unordered_map<std::size_t, std::size_t> parameter_nodes_;
};

} // namespace trackcast::nn

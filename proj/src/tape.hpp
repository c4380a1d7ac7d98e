#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "tensor.hpp"

namespace fvn {

// Receives the upstream gradient of a node's output and accumulates (+=) into
// the per-input gradient buffers. Buffers are zero-initialized, sized like the
// corresponding input, and may alias when one tensor feeds the node twice.
using BackwardFn =
    std::function<void(const std::vector<double>& grad_out, const std::vector<std::vector<double>*>& grad_in)>;

class GradientMap {
public:
    GradientMap() = default;

    bool has(const Tensor& t) const { return g_.count(t.uid()) > 0; }
    // Gradient of the loss w.r.t. t; zeros when t never received gradient.
    std::vector<double> get(const Tensor& t) const;
    Tensor get_tensor(const Tensor& t) const;
    size_t entry_count() const { return g_.size(); }

private:
    friend class Tape;
    std::unordered_map<uint64_t, std::vector<double>> g_;
};

// Define-by-run gradient tape. Constructing a Tape makes it the active tape of
// the current thread (restored on destruction); ops record nodes onto the
// active tape whenever an input requires gradient. One tape per training step.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    void record(std::vector<Tensor> inputs, const Tensor& output, BackwardFn fn);

    // Reverse sweep from a scalar loss. Visits each recorded node once, in
    // reverse topological (= recording) order. Returns gradients for every
    // requires_grad tensor that participated. A scalar that never touched the
    // tape yields an empty map (all gradients identically zero).
    GradientMap backward(const Tensor& loss) const;

    size_t node_count() const { return nodes_.size(); }

private:
    friend class NoGrad;
    struct Node {
        std::vector<std::shared_ptr<TensorStorage>> inputs;
        std::shared_ptr<TensorStorage> output;
        BackwardFn fn;
    };
    std::vector<Node> nodes_;
    Tape* prev_ = nullptr;
};

// Suspends recording on the current thread for its lifetime (inference,
// finite-difference probes). Nested use is fine.
class NoGrad {
public:
    NoGrad();
    ~NoGrad();
    NoGrad(const NoGrad&) = delete;
    NoGrad& operator=(const NoGrad&) = delete;

private:
    Tape* saved_;
};

} // namespace fvn

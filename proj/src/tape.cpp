#include "tape.hpp"

namespace fvn {

namespace {
thread_local Tape* g_active = nullptr;
}

std::vector<double> GradientMap::get(const Tensor& t) const {
    auto it = g_.find(t.uid());
    if (it == g_.end()) return std::vector<double>(static_cast<size_t>(t.size()), 0.0);
    return it->second;
}

Tensor GradientMap::get_tensor(const Tensor& t) const {
    return Tensor::from(t.shape(), get(t));
}

Tape::Tape() {
    prev_ = g_active;
    g_active = this;
}

Tape::~Tape() {
    g_active = prev_;
}

Tape* Tape::active() {
    return g_active;
}

NoGrad::NoGrad() : saved_(g_active) {
    g_active = nullptr;
}

NoGrad::~NoGrad() {
    g_active = saved_;
}

void Tape::record(std::vector<Tensor> inputs, const Tensor& output, BackwardFn fn) {
    Node n;
    n.inputs.reserve(inputs.size());
    for (const Tensor& t : inputs) n.inputs.push_back(t.storage_ptr());
    n.output = output.storage_ptr();
    n.fn = std::move(fn);
    nodes_.push_back(std::move(n));
}

GradientMap Tape::backward(const Tensor& loss) const {
    if (!loss.defined() || loss.size() != 1) {
        throw ArgumentError("backward() requires a scalar loss, got shape " +
                            (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
    }
    GradientMap out;
    std::unordered_map<uint64_t, std::vector<double>> grads;
    grads[loss.uid()] = {1.0};

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        const Node& n = *it;
        auto git = grads.find(n.output->uid);
        if (git == grads.end()) continue; // nothing flowed into this node's output
        const std::vector<double> gout = git->second; // copy: fn may touch the map via aliased buffers
        std::vector<std::vector<double>*> gin(n.inputs.size());
        for (size_t i = 0; i < n.inputs.size(); ++i) {
            auto& buf = grads[n.inputs[i]->uid];
            if (buf.size() != n.inputs[i]->data.size()) buf.assign(n.inputs[i]->data.size(), 0.0);
            gin[i] = &buf;
        }
        n.fn(gout, gin);
    }

    for (const Node& n : nodes_) {
        for (const auto& in : n.inputs) {
            if (!in->requires_grad) continue;
            auto git = grads.find(in->uid);
            if (git != grads.end()) out.g_[in->uid] = git->second;
        }
        if (n.output->requires_grad) {
            auto git = grads.find(n.output->uid);
            if (git != grads.end()) out.g_[n.output->uid] = git->second;
        }
    }
    return out;
}

} // namespace fvn

#include "tensor.hpp"

#include <cmath>
#include <sstream>

namespace fvn {

namespace {
std::atomic<uint64_t> g_next_uid{1};
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ",";
        os << s[i];
    }
    os << "}";
    return os.str();
}

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        if (d <= 0) throw DimensionError("non-positive extent in shape " + shape_str(s));
        n *= d;
    }
    return n;
}

std::shared_ptr<TensorStorage> Tensor::make_storage(Shape shape, std::vector<double> data) {
    int64_t n = shape_numel(shape);
    if (n != static_cast<int64_t>(data.size())) {
        throw DimensionError("data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }
    auto s = std::make_shared<TensorStorage>();
    s->shape = std::move(shape);
    s->data = std::move(data);
    s->uid = g_next_uid.fetch_add(1, std::memory_order_relaxed);
    return s;
}

Tensor Tensor::zeros(Shape shape) {
    int64_t n = shape_numel(shape);
    return Tensor(make_storage(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0)));
}

Tensor Tensor::full(Shape shape, double value) {
    int64_t n = shape_numel(shape);
    return Tensor(make_storage(std::move(shape), std::vector<double>(static_cast<size_t>(n), value)));
}

Tensor Tensor::from(Shape shape, std::vector<double> data) {
    return Tensor(make_storage(std::move(shape), std::move(data)));
}

Tensor Tensor::scalar(double value) {
    return Tensor(make_storage({1}, {value}));
}

Tensor Tensor::param(Shape shape, std::vector<double> data) {
    Tensor t(make_storage(std::move(shape), std::move(data)));
    t.set_requires_grad(true);
    return t;
}

TensorStorage& Tensor::storage() const {
    if (!s_) throw ArgumentError("operation on undefined tensor");
    return *s_;
}

int64_t Tensor::dim(int axis) const {
    const Shape& s = shape();
    if (axis < 0 || axis >= static_cast<int>(s.size())) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
    }
    return s[static_cast<size_t>(axis)];
}

double Tensor::item() const {
    if (size() != 1) throw ArgumentError("item() requires a scalar tensor, got shape " + shape_str(shape()));
    return storage().data[0];
}

double Tensor::at(int64_t r, int64_t c) const {
    if (rank() != 2) throw DimensionError("2-index access on tensor of shape " + shape_str(shape()));
    int64_t cols = shape()[1];
    return storage().data.at(static_cast<size_t>(r * cols + c));
}

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string("non-finite value in ") + what);
        }
    }
}

void check_finite(const Tensor& t, const char* what) {
    check_finite(t.data(), what);
}

} // namespace fvn

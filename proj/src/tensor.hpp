#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "error.hpp"

namespace fvn {

using Shape = std::vector<int64_t>;

std::string shape_str(const Shape& s);
int64_t shape_numel(const Shape& s);

struct TensorStorage {
    Shape shape;
    std::vector<double> data; // row-major
    bool requires_grad = false;
    uint64_t uid = 0;
};

// Value-semantics handle over shared storage. Ops allocate fresh storage for
// their outputs; parameter updates mutate storage in place between tapes.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor from(Shape shape, std::vector<double> data);
    static Tensor scalar(double value);
    // Leaf with requires_grad set; the trainer enumerates these.
    static Tensor param(Shape shape, std::vector<double> data);

    bool defined() const { return s_ != nullptr; }
    const Shape& shape() const { return storage().shape; }
    int64_t rank() const { return static_cast<int64_t>(shape().size()); }
    int64_t size() const { return static_cast<int64_t>(storage().data.size()); }
    int64_t dim(int axis) const;

    const std::vector<double>& data() const { return storage().data; }
    std::vector<double>& mutable_data() { return storage().data; }

    double item() const;
    double at(int64_t i) const { return storage().data.at(static_cast<size_t>(i)); }
    double at(int64_t r, int64_t c) const;

    bool requires_grad() const { return storage().requires_grad; }
    void set_requires_grad(bool v) { storage().requires_grad = v; }

    uint64_t uid() const { return storage().uid; }

    std::shared_ptr<TensorStorage> storage_ptr() const { return s_; }

private:
    explicit Tensor(std::shared_ptr<TensorStorage> s) : s_(std::move(s)) {}
    TensorStorage& storage() const;
    static std::shared_ptr<TensorStorage> make_storage(Shape shape, std::vector<double> data);

    std::shared_ptr<TensorStorage> s_;
};

// Throws NumericError naming `what` if any element is not finite.
void check_finite(const Tensor& t, const char* what);
void check_finite(const std::vector<double>& v, const char* what);

} // namespace fvn

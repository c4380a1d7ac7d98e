#pragma once

#include <functional>
#include <vector>

#include "tape.hpp"
#include "tensor.hpp"

namespace fvn {

// Differentiable primitives. Every op validates shapes (DimensionError) and
// rejects non-finite inputs (NumericError). A node is recorded on the active
// tape iff some input requires gradient; gradients accumulate (+=) into the
// per-input buffers during the reverse sweep.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b); // elementwise, exact shapes
Tensor smul(double c, const Tensor& a);       // scalar * tensor

// {m,k} x {k,n} -> {m,n}; {m,k} x {k} -> {m}
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a); // rank-2 only

Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& x, int axis, int64_t lo, int64_t hi);
Tensor stack_rows(const std::vector<Tensor>& rows); // k vectors {D} -> {k,D}
Tensor select_row(const Tensor& m, int64_t row);    // {L,D} -> {D}
// Embedding lookup: gathers rows of table {V,D} -> {n,D}; scatter-add on backward.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);
// {L,N} + {N} broadcast over rows
Tensor add_rowwise(const Tensor& m, const Tensor& v);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor softmax(const Tensor& x, int axis);
Tensor log(const Tensor& x);
Tensor sum(const Tensor& x);  // -> scalar
Tensor mean(const Tensor& x); // -> scalar

// -log softmax(logits)[target], stabilized by max-subtraction.
Tensor cross_entropy(const Tensor& logits, int64_t target);
// Sum_i [max(x,0) - x*t + log1p(exp(-|x|))] with constant targets in [0,1].
Tensor bce_with_logits_sum(const Tensor& logits, const std::vector<double>& targets);

// Value-identical tensor that blocks all gradient flow.
Tensor stop_gradient(const Tensor& x);

// Central differences (f(x+h*e_i) - f(x-h*e_i)) / (2h) per coordinate.
// Evaluations run with recording suspended.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h);

} // namespace fvn

#pragma once

#include <random>
#include <vector>

#include "ops.hpp"
#include "tensor.hpp"

namespace fvn {

// Index of the codebook row nearest to z under squared L2; ties break toward
// the lowest index. z has shape {D}, codebook {K, D}.
int nearest_code(const Tensor& z, const Tensor& codebook);
std::vector<int> nearest_codes(const Tensor& zs, const Tensor& codebook); // zs {M, D}

// Commitment objective for one quantized vector:
//   ||sg(z) - e_k||^2 + beta * ||z - sg(e_k)||^2
// The forward value is (1 + beta) * ||z - e_k||^2; the stop-gradients route
// the first term's gradient to the codebook row and the second's to z.
Tensor vq_loss(const Tensor& z, const Tensor& codebook, int index, double beta);

// Straight-through estimator: forward value is e_k, backward passes the
// upstream gradient to z unchanged and none to the codebook.
Tensor quantize_straight_through(const Tensor& z, const Tensor& codebook, int index);

// Fresh {k, d} codebook with entries uniform in [-1/k, 1/k].
Tensor make_content_codebook(std::mt19937_64& rng, int k, int d);

// Deep copy of an existing parameter matrix (e.g. embedding rows) as a new
// trainable codebook with independent storage.
Tensor codebook_from_rows(const Tensor& rows);

} // namespace fvn

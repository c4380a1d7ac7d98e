#include "codebook.hpp"

#include "rng.hpp"
#include "tape.hpp"

namespace fvn {

namespace {

void check_query(const Tensor& z, const Tensor& codebook) {
    if (codebook.rank() != 2) {
        throw DimensionError("codebook must be a matrix, got shape " + shape_str(codebook.shape()));
    }
    if (z.rank() != 1 || z.dim(0) != codebook.dim(1)) {
        throw DimensionError("codebook query shape " + shape_str(z.shape()) + " does not match codebook " +
                             shape_str(codebook.shape()));
    }
}

int nearest_row(const double* q, const Tensor& codebook) {
    const int64_t k = codebook.dim(0), d = codebook.dim(1);
    const double* cb = codebook.data().data();
    int best = 0;
    double best_dist = 0;
    for (int64_t r = 0; r < k; ++r) {
        double dist = 0;
        const double* row = cb + r * d;
        for (int64_t c = 0; c < d; ++c) {
            double diff = q[c] - row[c];
            dist += diff * diff;
        }
        if (r == 0 || dist < best_dist) {
            best_dist = dist;
            best = static_cast<int>(r);
        }
    }
    return best;
}

} // namespace

int nearest_code(const Tensor& z, const Tensor& codebook) {
    check_query(z, codebook);
    check_finite(z, "codebook query");
    return nearest_row(z.data().data(), codebook);
}

std::vector<int> nearest_codes(const Tensor& zs, const Tensor& codebook) {
    if (zs.rank() != 2 || codebook.rank() != 2 || zs.dim(1) != codebook.dim(1)) {
        throw DimensionError("nearest_codes: query shape " + shape_str(zs.shape()) + " vs codebook " +
                             shape_str(codebook.shape()));
    }
    check_finite(zs, "codebook queries");
    std::vector<int> out(static_cast<size_t>(zs.dim(0)));
    for (int64_t r = 0; r < zs.dim(0); ++r) {
        out[static_cast<size_t>(r)] = nearest_row(zs.data().data() + r * zs.dim(1), codebook);
    }
    return out;
}

Tensor vq_loss(const Tensor& z, const Tensor& codebook, int index, double beta) {
    check_query(z, codebook);
    if (index < 0 || index >= codebook.dim(0)) {
        throw ArgumentError("codebook index " + std::to_string(index) + " out of range [0, " +
                            std::to_string(codebook.dim(0)) + ")");
    }
    Tensor e = select_row(codebook, index);
    Tensor d1 = sub(stop_gradient(z), e); // gradient reaches the codebook row
    Tensor d2 = sub(z, stop_gradient(e)); // gradient reaches the encoder output
    Tensor codebook_term = sum(mul(d1, d1));
    Tensor commit_term = smul(beta, sum(mul(d2, d2)));
    return add(codebook_term, commit_term);
}

Tensor quantize_straight_through(const Tensor& z, const Tensor& codebook, int index) {
    check_query(z, codebook);
    if (index < 0 || index >= codebook.dim(0)) {
        throw ArgumentError("codebook index " + std::to_string(index) + " out of range [0, " +
                            std::to_string(codebook.dim(0)) + ")");
    }
    // Composing z + sg(e - z) would lose the last ulp to rounding; the forward
    // must be bit-identical to the codebook row, so copy it and record a node
    // that passes the upstream gradient through to z untouched.
    const int64_t d = codebook.dim(1);
    std::vector<double> vals(codebook.data().begin() + index * d, codebook.data().begin() + (index + 1) * d);
    Tensor out = Tensor::from({d}, std::move(vals));
    Tape* tape = Tape::active();
    if (tape && z.requires_grad()) {
        out.set_requires_grad(true);
        tape->record({z}, out,
                     [](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
                         for (size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
                     });
    }
    return out;
}

Tensor make_content_codebook(std::mt19937_64& rng, int k, int d) {
    if (k <= 0 || d <= 0) throw ArgumentError("codebook dimensions must be positive");
    double bound = 1.0 / static_cast<double>(k);
    std::vector<double> vals(static_cast<size_t>(k) * static_cast<size_t>(d));
    for (double& v : vals) v = uniform_double(rng, -bound, bound);
    return Tensor::param({k, d}, std::move(vals));
}

Tensor codebook_from_rows(const Tensor& rows) {
    if (rows.rank() != 2) {
        throw DimensionError("codebook_from_rows expects a matrix, got " + shape_str(rows.shape()));
    }
    return Tensor::param(rows.shape(), rows.data());
}

} // namespace fvn

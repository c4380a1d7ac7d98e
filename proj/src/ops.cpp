#include "ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace fvn {

namespace {

void maybe_record(std::vector<Tensor> inputs, Tensor& out, BackwardFn fn) {
    Tape* tape = Tape::active();
    bool need = false;
    for (const Tensor& t : inputs) {
        if (t.requires_grad()) {
            need = true;
            break;
        }
    }
    if (!need) return;
    out.set_requires_grad(true);
    if (tape) tape->record(std::move(inputs), out, std::move(fn));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
}

int64_t prod(const Shape& s, size_t lo, size_t hi) {
    int64_t p = 1;
    for (size_t i = lo; i < hi; ++i) p *= s[i];
    return p;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    check_finite(a, "add input");
    check_finite(b, "add input");
    std::vector<double> out(a.data());
    const auto& bd = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
    Tensor r = Tensor::from(a.shape(), std::move(out));
    maybe_record({a, b}, r, [](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (size_t i = 0; i < g.size(); ++i) {
            (*gin[0])[i] += g[i];
            (*gin[1])[i] += g[i];
        }
    });
    return r;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    check_finite(a, "sub input");
    check_finite(b, "sub input");
    std::vector<double> out(a.data());
    const auto& bd = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
    Tensor r = Tensor::from(a.shape(), std::move(out));
    maybe_record({a, b}, r, [](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (size_t i = 0; i < g.size(); ++i) {
            (*gin[0])[i] += g[i];
            (*gin[1])[i] -= g[i];
        }
    });
    return r;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    check_finite(a, "mul input");
    check_finite(b, "mul input");
    std::vector<double> out(a.data());
    const auto& bd = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
    Tensor r = Tensor::from(a.shape(), std::move(out));
    auto as = a.storage_ptr(), bs = b.storage_ptr();
    maybe_record({a, b}, r, [as, bs](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (size_t i = 0; i < g.size(); ++i) {
            (*gin[0])[i] += g[i] * bs->data[i];
            (*gin[1])[i] += g[i] * as->data[i];
        }
    });
    return r;
}

Tensor smul(double c, const Tensor& a) {
    if (!std::isfinite(c)) throw NumericError("smul: non-finite scalar");
    check_finite(a, "smul input");
    std::vector<double> out(a.data());
    for (double& x : out) x *= c;
    Tensor r = Tensor::from(a.shape(), std::move(out));
    maybe_record({a}, r, [c](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += c * g[i];
    });
    return r;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_finite(a, "matmul input");
    check_finite(b, "matmul input");
    if (a.rank() != 2) {
        throw DimensionError("matmul: left operand must be rank 2, got " + shape_str(a.shape()));
    }
    bool vec = b.rank() == 1;
    if (!vec && b.rank() != 2) {
        throw DimensionError("matmul: right operand must be rank 1 or 2, got " + shape_str(b.shape()));
    }
    int64_t m = a.shape()[0], k = a.shape()[1];
    int64_t k2 = b.shape()[0];
    int64_t n = vec ? 1 : b.shape()[1];
    if (k != k2) {
        throw DimensionError("matmul: inner dimensions disagree " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    std::vector<double> out(static_cast<size_t>(m * n), 0.0);
    const auto& ad = a.data();
    const auto& bd = b.data();
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t p = 0; p < k; ++p) {
            double av = ad[static_cast<size_t>(i * k + p)];
            if (av == 0.0) continue;
            const double* brow = bd.data() + p * n;
            double* orow = out.data() + i * n;
            for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    Shape oshape = vec ? Shape{m} : Shape{m, n};
    Tensor r = Tensor::from(std::move(oshape), std::move(out));
    auto as = a.storage_ptr(), bs = b.storage_ptr();
    maybe_record({a, b}, r,
                 [as, bs, m, k, n](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
                     // dA = g * B^T ; dB = A^T * g
                     const auto& ad = as->data;
                     const auto& bd = bs->data;
                     auto& ga = *gin[0];
                     auto& gb = *gin[1];
                     for (int64_t i = 0; i < m; ++i) {
                         for (int64_t p = 0; p < k; ++p) {
                             double acc = 0.0;
                             const double* grow = g.data() + i * n;
                             const double* brow = bd.data() + p * n;
                             for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                             ga[static_cast<size_t>(i * k + p)] += acc;
                         }
                     }
                     for (int64_t p = 0; p < k; ++p) {
                         for (int64_t i = 0; i < m; ++i) {
                             double av = ad[static_cast<size_t>(i * k + p)];
                             if (av == 0.0) continue;
                             const double* grow = g.data() + i * n;
                             double* gbrow = gb.data() + p * n;
                             for (int64_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
                         }
                     }
                 });
    return r;
}

Tensor transpose(const Tensor& a) {
    check_finite(a, "transpose input");
    if (a.rank() != 2) throw DimensionError("transpose: rank-2 tensor required, got " + shape_str(a.shape()));
    int64_t m = a.shape()[0], n = a.shape()[1];
    std::vector<double> out(static_cast<size_t>(m * n));
    const auto& ad = a.data();
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) out[static_cast<size_t>(j * m + i)] = ad[static_cast<size_t>(i * n + j)];
    Tensor r = Tensor::from({n, m}, std::move(out));
    maybe_record({a}, r, [m, n](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        auto& ga = *gin[0];
        for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < n; ++j) ga[static_cast<size_t>(i * n + j)] += g[static_cast<size_t>(j * m + i)];
    });
    return r;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ArgumentError("concat: no inputs");
    const Shape& s0 = parts[0].shape();
    size_t rank = s0.size();
    if (axis < 0 || static_cast<size_t>(axis) >= rank) {
        throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for shape " + shape_str(s0));
    }
    Shape oshape = s0;
    oshape[static_cast<size_t>(axis)] = 0;
    for (const Tensor& p : parts) {
        check_finite(p, "concat input");
        if (p.shape().size() != rank) {
            throw DimensionError("concat: rank mismatch " + shape_str(s0) + " vs " + shape_str(p.shape()));
        }
        for (size_t d = 0; d < rank; ++d) {
            if (d == static_cast<size_t>(axis)) continue;
            if (p.shape()[d] != s0[d]) {
                throw DimensionError("concat: shape mismatch off-axis " + shape_str(s0) + " vs " +
                                     shape_str(p.shape()));
            }
        }
        oshape[static_cast<size_t>(axis)] += p.shape()[static_cast<size_t>(axis)];
    }
    int64_t outer = prod(s0, 0, static_cast<size_t>(axis));
    int64_t inner = prod(s0, static_cast<size_t>(axis) + 1, rank);
    int64_t ostride = oshape[static_cast<size_t>(axis)] * inner;
    std::vector<double> out(static_cast<size_t>(shape_numel(oshape)));
    int64_t off = 0;
    std::vector<int64_t> blocks;
    for (const Tensor& p : parts) {
        int64_t block = p.shape()[static_cast<size_t>(axis)] * inner;
        blocks.push_back(block);
        const auto& pd = p.data();
        for (int64_t o = 0; o < outer; ++o) {
            std::copy_n(pd.data() + o * block, block, out.data() + o * ostride + off);
        }
        off += block;
    }
    Tensor r = Tensor::from(std::move(oshape), std::move(out));
    std::vector<Tensor> ins = parts;
    maybe_record(std::move(ins), r,
                 [outer, ostride, blocks](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
                     int64_t off = 0;
                     for (size_t pi = 0; pi < blocks.size(); ++pi) {
                         int64_t block = blocks[pi];
                         auto& gp = *gin[pi];
                         for (int64_t o = 0; o < outer; ++o) {
                             const double* src = g.data() + o * ostride + off;
                             double* dst = gp.data() + o * block;
                             for (int64_t i = 0; i < block; ++i) dst[i] += src[i];
                         }
                         off += block;
                     }
                 });
    return r;
}

Tensor slice(const Tensor& x, int axis, int64_t lo, int64_t hi) {
    check_finite(x, "slice input");
    const Shape& s = x.shape();
    if (axis < 0 || static_cast<size_t>(axis) >= s.size()) {
        throw DimensionError("slice: axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
    }
    int64_t extent = s[static_cast<size_t>(axis)];
    if (lo < 0 || hi > extent || lo >= hi) {
        throw DimensionError("slice: range [" + std::to_string(lo) + "," + std::to_string(hi) +
                             ") invalid for extent " + std::to_string(extent));
    }
    Shape oshape = s;
    oshape[static_cast<size_t>(axis)] = hi - lo;
    int64_t outer = prod(s, 0, static_cast<size_t>(axis));
    int64_t inner = prod(s, static_cast<size_t>(axis) + 1, s.size());
    int64_t istride = extent * inner;
    int64_t block = (hi - lo) * inner;
    std::vector<double> out(static_cast<size_t>(outer * block));
    const auto& xd = x.data();
    for (int64_t o = 0; o < outer; ++o) {
        std::copy_n(xd.data() + o * istride + lo * inner, block, out.data() + o * block);
    }
    Tensor r = Tensor::from(std::move(oshape), std::move(out));
    maybe_record({x}, r,
                 [outer, istride, inner, lo, block](const std::vector<double>& g,
                                                    const std::vector<std::vector<double>*>& gin) {
                     auto& gx = *gin[0];
                     for (int64_t o = 0; o < outer; ++o) {
                         const double* src = g.data() + o * block;
                         double* dst = gx.data() + o * istride + lo * inner;
                         for (int64_t i = 0; i < block; ++i) dst[i] += src[i];
                     }
                 });
    return r;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ArgumentError("stack_rows: no inputs");
    int64_t d = rows[0].size();
    for (const Tensor& t : rows) {
        check_finite(t, "stack_rows input");
        if (t.rank() != 1 || t.size() != d) {
            throw DimensionError("stack_rows: expected vectors of width " + std::to_string(d) + ", got " +
                                 shape_str(t.shape()));
        }
    }
    int64_t l = static_cast<int64_t>(rows.size());
    std::vector<double> out(static_cast<size_t>(l * d));
    for (int64_t i = 0; i < l; ++i) std::copy_n(rows[static_cast<size_t>(i)].data().data(), d, out.data() + i * d);
    Tensor r = Tensor::from({l, d}, std::move(out));
    std::vector<Tensor> ins = rows;
    maybe_record(std::move(ins), r, [l, d](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (int64_t i = 0; i < l; ++i) {
            auto& gr = *gin[static_cast<size_t>(i)];
            const double* src = g.data() + i * d;
            for (int64_t j = 0; j < d; ++j) gr[static_cast<size_t>(j)] += src[j];
        }
    });
    return r;
}

Tensor select_row(const Tensor& m, int64_t row) {
    check_finite(m, "select_row input");
    if (m.rank() != 2) throw DimensionError("select_row: rank-2 tensor required, got " + shape_str(m.shape()));
    int64_t l = m.shape()[0], d = m.shape()[1];
    if (row < 0 || row >= l) {
        throw ArgumentError("select_row: row " + std::to_string(row) + " out of range [0," + std::to_string(l) + ")");
    }
    std::vector<double> out(m.data().begin() + row * d, m.data().begin() + (row + 1) * d);
    Tensor r = Tensor::from({d}, std::move(out));
    maybe_record({m}, r, [row, d](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        auto& gm = *gin[0];
        for (int64_t j = 0; j < d; ++j) gm[static_cast<size_t>(row * d + j)] += g[static_cast<size_t>(j)];
    });
    return r;
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
    check_finite(table, "embedding_rows input");
    if (table.rank() != 2) {
        throw DimensionError("embedding_rows: rank-2 table required, got " + shape_str(table.shape()));
    }
    if (ids.empty()) throw ArgumentError("embedding_rows: empty id list");
    int64_t v = table.shape()[0], d = table.shape()[1];
    std::vector<double> out(ids.size() * static_cast<size_t>(d));
    const auto& td = table.data();
    for (size_t i = 0; i < ids.size(); ++i) {
        int id = ids[i];
        if (id < 0 || id >= v) {
            throw ArgumentError("embedding_rows: id " + std::to_string(id) + " out of range [0," + std::to_string(v) +
                                ")");
        }
        std::copy_n(td.data() + static_cast<int64_t>(id) * d, d, out.data() + i * static_cast<size_t>(d));
    }
    Tensor r = Tensor::from({static_cast<int64_t>(ids.size()), d}, std::move(out));
    maybe_record({table}, r, [ids, d](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        auto& gt = *gin[0];
        for (size_t i = 0; i < ids.size(); ++i) {
            const double* src = g.data() + i * static_cast<size_t>(d);
            double* dst = gt.data() + static_cast<int64_t>(ids[i]) * d;
            for (int64_t j = 0; j < d; ++j) dst[j] += src[j];
        }
    });
    return r;
}

Tensor add_rowwise(const Tensor& m, const Tensor& v) {
    check_finite(m, "add_rowwise input");
    check_finite(v, "add_rowwise input");
    if (m.rank() != 2 || v.rank() != 1 || m.shape()[1] != v.shape()[0]) {
        throw DimensionError("add_rowwise: incompatible shapes " + shape_str(m.shape()) + " and " +
                             shape_str(v.shape()));
    }
    int64_t l = m.shape()[0], d = m.shape()[1];
    std::vector<double> out(m.data());
    const auto& vd = v.data();
    for (int64_t i = 0; i < l; ++i)
        for (int64_t j = 0; j < d; ++j) out[static_cast<size_t>(i * d + j)] += vd[static_cast<size_t>(j)];
    Tensor r = Tensor::from({l, d}, std::move(out));
    maybe_record({m, v}, r, [l, d](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        auto& gm = *gin[0];
        auto& gv = *gin[1];
        for (int64_t i = 0; i < l; ++i) {
            for (int64_t j = 0; j < d; ++j) {
                gm[static_cast<size_t>(i * d + j)] += g[static_cast<size_t>(i * d + j)];
                gv[static_cast<size_t>(j)] += g[static_cast<size_t>(i * d + j)];
            }
        }
    });
    return r;
}

Tensor sigmoid(const Tensor& x) {
    check_finite(x, "sigmoid input");
    std::vector<double> out(x.data());
    for (double& v : out) v = stable_sigmoid(v);
    Tensor r = Tensor::from(x.shape(), std::move(out));
    auto rs = r.storage_ptr();
    maybe_record({x}, r, [rs](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (size_t i = 0; i < g.size(); ++i) {
            double s = rs->data[i];
            (*gin[0])[i] += g[i] * s * (1.0 - s);
        }
    });
    return r;
}

Tensor tanh(const Tensor& x) {
    check_finite(x, "tanh input");
    std::vector<double> out(x.data());
    for (double& v : out) v = std::tanh(v);
    Tensor r = Tensor::from(x.shape(), std::move(out));
    auto rs = r.storage_ptr();
    maybe_record({x}, r, [rs](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (size_t i = 0; i < g.size(); ++i) {
            double t = rs->data[i];
            (*gin[0])[i] += g[i] * (1.0 - t * t);
        }
    });
    return r;
}

Tensor softmax(const Tensor& x, int axis) {
    check_finite(x, "softmax input");
    const Shape& s = x.shape();
    if (axis < 0 || static_cast<size_t>(axis) >= s.size()) {
        throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
    }
    int64_t outer = prod(s, 0, static_cast<size_t>(axis));
    int64_t n = s[static_cast<size_t>(axis)];
    int64_t inner = prod(s, static_cast<size_t>(axis) + 1, s.size());
    std::vector<double> out(x.data().size());
    const auto& xd = x.data();
    for (int64_t o = 0; o < outer; ++o) {
        for (int64_t i = 0; i < inner; ++i) {
            int64_t base = o * n * inner + i;
            double mx = xd[static_cast<size_t>(base)];
            for (int64_t j = 1; j < n; ++j) mx = std::max(mx, xd[static_cast<size_t>(base + j * inner)]);
            double z = 0.0;
            for (int64_t j = 0; j < n; ++j) {
                double e = std::exp(xd[static_cast<size_t>(base + j * inner)] - mx);
                out[static_cast<size_t>(base + j * inner)] = e;
                z += e;
            }
            for (int64_t j = 0; j < n; ++j) out[static_cast<size_t>(base + j * inner)] /= z;
        }
    }
    Tensor r = Tensor::from(s, std::move(out));
    auto rs = r.storage_ptr();
    maybe_record({x}, r,
                 [rs, outer, n, inner](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
                     auto& gx = *gin[0];
                     for (int64_t o = 0; o < outer; ++o) {
                         for (int64_t i = 0; i < inner; ++i) {
                             int64_t base = o * n * inner + i;
                             double dot = 0.0;
                             for (int64_t j = 0; j < n; ++j) {
                                 size_t k = static_cast<size_t>(base + j * inner);
                                 dot += g[k] * rs->data[k];
                             }
                             for (int64_t j = 0; j < n; ++j) {
                                 size_t k = static_cast<size_t>(base + j * inner);
                                 gx[k] += rs->data[k] * (g[k] - dot);
                             }
                         }
                     }
                 });
    return r;
}

Tensor log(const Tensor& x) {
    check_finite(x, "log input");
    std::vector<double> out(x.data());
    for (double& v : out) {
        if (v <= 0.0) throw NumericError("log: non-positive input");
        v = std::log(v);
    }
    Tensor r = Tensor::from(x.shape(), std::move(out));
    auto xs = x.storage_ptr();
    maybe_record({x}, r, [xs](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] / xs->data[i];
    });
    return r;
}

Tensor sum(const Tensor& x) {
    check_finite(x, "sum input");
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    Tensor r = Tensor::scalar(acc);
    maybe_record({x}, r, [](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (double& v : *gin[0]) v += g[0];
    });
    return r;
}

Tensor mean(const Tensor& x) {
    check_finite(x, "mean input");
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    double n = static_cast<double>(x.size());
    Tensor r = Tensor::scalar(acc / n);
    maybe_record({x}, r, [n](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
        for (double& v : *gin[0]) v += g[0] / n;
    });
    return r;
}

Tensor cross_entropy(const Tensor& logits, int64_t target) {
    check_finite(logits, "cross_entropy input");
    if (logits.rank() != 1 || logits.size() < 2) {
        throw DimensionError("cross_entropy: rank-1 logits of length >= 2 required, got " +
                             shape_str(logits.shape()));
    }
    int64_t v = logits.size();
    if (target < 0 || target >= v) {
        throw ArgumentError("cross_entropy: target " + std::to_string(target) + " out of range [0," +
                            std::to_string(v) + ")");
    }
    const auto& xd = logits.data();
    double mx = xd[0];
    for (double val : xd) mx = std::max(mx, val);
    double z = 0.0;
    for (double val : xd) z += std::exp(val - mx);
    double lse = mx + std::log(z);
    Tensor r = Tensor::scalar(lse - xd[static_cast<size_t>(target)]);
    auto xs = logits.storage_ptr();
    maybe_record({logits}, r,
                 [xs, target, lse](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
                     auto& gx = *gin[0];
                     for (size_t i = 0; i < gx.size(); ++i) {
                         double p = std::exp(xs->data[i] - lse);
                         double delta = (static_cast<int64_t>(i) == target) ? 1.0 : 0.0;
                         gx[i] += g[0] * (p - delta);
                     }
                 });
    return r;
}

Tensor bce_with_logits_sum(const Tensor& logits, const std::vector<double>& targets) {
    check_finite(logits, "bce_with_logits input");
    check_finite(targets, "bce_with_logits targets");
    if (logits.rank() != 1 || static_cast<size_t>(logits.size()) != targets.size()) {
        throw DimensionError("bce_with_logits: logits " + shape_str(logits.shape()) + " vs " +
                             std::to_string(targets.size()) + " targets");
    }
    for (double t : targets) {
        if (t < 0.0 || t > 1.0) throw ArgumentError("bce_with_logits: target outside [0,1]");
    }
    const auto& xd = logits.data();
    double acc = 0.0;
    for (size_t i = 0; i < xd.size(); ++i) {
        double x = xd[i];
        acc += std::max(x, 0.0) - x * targets[i] + std::log1p(std::exp(-std::fabs(x)));
    }
    Tensor r = Tensor::scalar(acc);
    auto xs = logits.storage_ptr();
    maybe_record({logits}, r,
                 [xs, targets](const std::vector<double>& g, const std::vector<std::vector<double>*>& gin) {
                     auto& gx = *gin[0];
                     for (size_t i = 0; i < gx.size(); ++i) {
                         gx[i] += g[0] * (stable_sigmoid(xs->data[i]) - targets[i]);
                     }
                 });
    return r;
}

Tensor stop_gradient(const Tensor& x) {
    check_finite(x, "stop_gradient input");
    return Tensor::from(x.shape(), x.data()); // fresh untracked storage; nothing recorded
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
    if (h <= 0.0) throw ArgumentError("finite_difference_gradient: step must be positive");
    NoGrad guard;
    std::vector<double> grad(x.data().size());
    std::vector<double> work(x.data());
    for (size_t i = 0; i < work.size(); ++i) {
        double orig = work[i];
        work[i] = orig + h;
        double fp = f(Tensor::from(x.shape(), work));
        work[i] = orig - h;
        double fm = f(Tensor::from(x.shape(), work));
        work[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return Tensor::from(x.shape(), std::move(grad));
}

} // namespace fvn

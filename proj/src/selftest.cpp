#include "selftest.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "checkpoint.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "sampler.hpp"
#include "stats.hpp"
#include "strings.hpp"
#include "trainer.hpp"

namespace fvn {

namespace {

struct Ctx {
    SelftestReport& report;
    std::ostringstream detail;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
    void expect_close(double got, double want, double tol, const std::string& what) {
        const double scale = std::max({std::fabs(got), std::fabs(want), 1e-12});
        if (!(std::fabs(got - want) / scale <= tol) ) {
            expect(false, what + ": got " + format_double(got) + ", want " + format_double(want));
        }
    }
};

void run_check(SelftestReport& report, const std::string& name, const std::function<void(Ctx&)>& body) {
    Ctx ctx{report};
    try {
        body(ctx);
    } catch (const std::exception& e) {
        ctx.ok = false;
        if (ctx.detail.tellp() > 0) ctx.detail << "; ";
        ctx.detail << "exception: " << e.what();
    }
    report.checks.push_back({name, ctx.ok, ctx.detail.str()});
}

// ---- shared toy fixtures ----

FvnDims toy_dims() {
    FvnDims d;
    d.vocab = 14;
    d.embed_dim = 8;
    d.content_codes = 5;
    d.content_labels = 3;
    d.style_labels = 5;
    d.beta = 0.25;
    d.max_decode_len = 20;
    return d;
}

TrainingExample toy_example() {
    TrainingExample ex;
    ex.text_ids = {4, 5, 6, 7, 5};
    ex.content_ids = {8, 9, 10};
    ex.style_ids = {11};
    ex.targets.content_indicator = {1.0, 0.0, 1.0};
    ex.targets.style_class = 2;
    return ex;
}

double fd_coord(const std::function<double()>& f, Tensor param, size_t i, double h = 1e-5) {
    auto& d = param.mutable_data();
    const double orig = d[i];
    d[i] = orig + h;
    const double fp = f();
    d[i] = orig - h;
    const double fm = f();
    d[i] = orig;
    return (fp - fm) / (2 * h);
}

// Relative agreement with an absolute floor: coordinates where both the
// analytic and FD values are essentially zero are compared absolutely —
// central differences at h=1e-5 cannot resolve a 1e-7 gradient to four
// relative digits, but 1e-9 absolute agreement there is conclusive.
bool grads_agree(double analytic, double fd, double tol) {
    if (std::fabs(analytic) < 1e-5 && std::fabs(fd) < 1e-5) return std::fabs(analytic - fd) < 1e-9;
    return std::fabs(analytic - fd) / std::max(std::fabs(analytic), std::fabs(fd)) < tol;
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() /
               ("fvn-selftest-" + std::to_string(static_cast<long>(::getpid())));
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kToyCsv =
    "mr,ref,personality\n"
    "\"name[Aromi], food[Chinese]\",\"Aromi is a Chinese place .\",agreeable\n"
    "\"name[Aromi], food[Chinese]\",\"Aromi serves Chinese food .\",conscientious\n"
    "\"name[Bar One], area[riverside]\",\"Bar One is in riverside .\",agreeable\n"
    "\"name[Bar One], area[riverside]\",\"Bar One is by the riverside .\",extravert\n";

// ---- the individual checks ----

void check_hash_pins(Ctx& c) {
    c.expect(crc32("123456789", 9) == 0xCBF43926u, "crc32 check value");
    c.expect(sha1_hex(std::string()) == "da39a3ee5e6b4b0d3255bfef95601890afd80709", "sha1(empty)");
    c.expect(sha1_hex(std::string("abc")) == "a9993e364706816aba3e25717850c26c9cd0d89d", "sha1(abc)");
    c.expect(git_blob_hash("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad", "git blob hash");
}

void check_rng_pins(Ctx& c) {
    // The standard pins the 10000th output of a default-constructed engine.
    std::mt19937_64 g;
    for (int i = 0; i < 9999; ++i) g();
    c.expect(g() == 9981545732273789042ULL, "mt19937_64 10000th output");

    std::mt19937_64 a(7), b(7);
    std::vector<int> va = {1, 2, 3, 4, 5, 6}, vb = va;
    seeded_shuffle(va, a);
    seeded_shuffle(vb, b);
    c.expect(va == vb, "seeded_shuffle determinism");
    const double u = canonical_double(a);
    c.expect(u >= 0.0 && u < 1.0, "canonical_double range");
}

void check_primitive_gradients(Ctx& c) {
    std::mt19937_64 rng(3);
    Tensor x = Tensor::param({2, 3}, {0.3, -0.2, 0.5, 0.1, -0.4, 0.7});
    Tensor w = Tensor::param({3, 2}, {0.2, -0.1, 0.4, 0.3, -0.5, 0.6});
    Tensor v = Tensor::param({2}, {0.25, -0.35});
    auto build = [&]() {
        Tensor m = matmul(x, w);                 // {2,2}
        Tensor t = tanh(m);
        Tensor s = sigmoid(add(select_row(t, 0), v));
        Tensor p = softmax(select_row(m, 1), 0);
        Tensor ce = cross_entropy(concat({s, p}, 0), 2);
        return add(ce, mean(mul(t, t)));
    };
    Tape tape;
    Tensor loss = build();
    GradientMap grads = tape.backward(loss);
    auto value = [&]() { return build().item(); };
    for (const auto& [name, t] : {std::pair<std::string, Tensor>{"x", x}, {"w", w}, {"v", v}}) {
        const auto& g = grads.get(t);
        for (size_t i = 0; i < g.size(); ++i) {
            const double fd = fd_coord(value, t, i, 1e-6);
            if (!grads_agree(g[i], fd, 1e-6)) {
                c.expect(false, name + "[" + std::to_string(i) + "]: analytic " + format_double(g[i]) +
                                    " vs fd " + format_double(fd));
                return;
            }
        }
    }
}

void check_loss_gradients(Ctx& c) {
    std::mt19937_64 rng(10);
    FvnParams p = make_fvn(toy_dims(), rng);
    TrainingExample ex = toy_example();
    std::vector<int> target = ex.text_ids;
    target.push_back(Vocabulary::kEos);

    TextCodes base = encode_text(p, ex.text_ids);
    TextCodes frozen = base;
    frozen.e_c = Tensor::from({8}, base.e_c.data());
    frozen.e_s = Tensor::from({8}, base.e_s.data());

    auto build = [&]() {
        EncodedCondition cond = encode_condition(p, ex.content_ids, ex.style_ids);
        DecodeOptions opt;
        opt.mode = DecodeMode::teacher_forced;
        opt.target = &target;
        DecodeResult dec = decode_sequence(p, cond, frozen.e_c, frozen.e_s, opt);
        return add(dec.loss, control_forward(p, dec.o_seq, frozen, ex.targets));
    };
    Tape tape;
    Tensor loss = build();
    GradientMap grads = tape.backward(loss);
    auto value = [&]() { return build().item(); };

    const std::vector<std::pair<std::string, Tensor>> probes = {
        {"decoder.Wi", p.decoder.Wi},       {"input_proj.W", p.input_proj.W},
        {"attn.Wb", p.attn.Wb},             {"out_vocab.W", p.out_vocab.W},
        {"out_emb.W", p.out_emb.W},         {"head_c2.W", p.head_c2.W},
        {"head_s2.b", p.head_s2.b},         {"enc_c.Wi", p.enc_c.layers[0].fwd.Wi},
        {"enc_tc.Wi", p.enc_tc.layers[0].fwd.Wi},
    };
    std::mt19937_64 pick(17);
    for (const auto& [name, t] : probes) {
        const auto& g = grads.get(t);
        for (int q = 0; q < 2; ++q) {
            const size_t i = static_cast<size_t>(uniform_u64(pick, static_cast<uint64_t>(t.size())));
            const double fd = fd_coord(value, t, i);
            if (!grads_agree(g[i], fd, 1e-4)) {
                c.expect(false, name + "[" + std::to_string(i) + "]: analytic " + format_double(g[i]) +
                                    " vs fd " + format_double(fd));
                return;
            }
        }
    }
}

void check_vq_identities(Ctx& c) {
    std::mt19937_64 rng(5);
    Tensor cb = make_content_codebook(rng, 32, 8);
    std::vector<double> zdata(8);
    for (auto& v : zdata) v = uniform_double(rng, -1.0, 1.0);
    Tensor z = Tensor::param({8}, zdata);
    const int k = nearest_code(z, cb);
    // Forward identity: vq_loss == (1 + beta) * ||z - e_k||^2.
    const double beta = 0.25;
    double sq = 0.0;
    for (int j = 0; j < 8; ++j) {
        const double d = z.at(j) - cb.at(k, j);
        sq += d * d;
    }
    c.expect_close(Tensor(vq_loss(z, cb, k, beta)).item(), (1.0 + beta) * sq, 1e-12, "vq forward identity");

    Tensor st = quantize_straight_through(z, cb, k);
    bool bitwise = true;
    for (int j = 0; j < 8; ++j) {
        if (st.at(j) != cb.at(k, j)) bitwise = false;
    }
    c.expect(bitwise, "straight-through row copy");

    // nearest_code against an exhaustive scan on 1000 random queries.
    for (int q = 0; q < 1000; ++q) {
        Tensor query = Tensor::zeros({8});
        auto& qd = query.mutable_data();
        for (auto& v : qd) v = uniform_double(rng, -1.5, 1.5);
        const int got = nearest_code(query, cb);
        int want = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int row = 0; row < 32; ++row) {
            double s = 0.0;
            for (int j = 0; j < 8; ++j) {
                const double d = query.at(j) - cb.at(row, j);
                s += d * d;
            }
            if (s < best) {
                best = s;
                want = row;
            }
        }
        if (got != want) {
            c.expect(false, "nearest mismatch on query " + std::to_string(q));
            return;
        }
    }
}

void check_adam_limit(Ctx& c) {
    Tensor x = Tensor::param({1}, {0.0});
    ParamList params = {{"x", x}};
    AdamState s;
    s.m = {{0.0}};
    s.v = {{0.0}};
    double prev = 0.0, step = 0.0;
    for (int i = 0; i < 5000; ++i) {
        adam_step(params, {{1.0}}, s, 0.001, 0.0);
        step = x.at(0) - prev;
        prev = x.at(0);
    }
    c.expect(std::fabs(std::fabs(step) - 0.001) < 1e-4, "constant-gradient step limit");
}

void check_metric_oracles(Ctx& c) {
    auto T = [](std::initializer_list<const char*> words) {
        TokenSeq t;
        for (const char* w : words) t.emplace_back(w);
        return t;
    };
    const std::vector<TokenSeq> hyps = {T({"the", "cat", "sat", "on", "the", "mat"}),
                                        T({"a", "black", "dog", "runs"})};
    const std::vector<RefSet> refs = {{T({"the", "cat", "sat", "on", "the", "mat"})},
                                      {T({"the", "black", "dog", "runs", "fast"}), T({"a", "dog", "runs"})}};
    c.expect_close(bleu(hyps, refs), 0.8599476570625982, 1e-9, "bleu crafted corpus");
    c.expect(bleu({hyps[0]}, {{hyps[0]}}) == 1.0, "bleu self-score");
    c.expect_close(nist({T({"a", "b", "a"})}, {{T({"a", "b", "a"})}}), 1.4182958340544896, 1e-9, "nist self");
    c.expect_close(rouge_l({T({"a", "b", "c", "d"})}, {{T({"a", "c", "d"})}}), 0.8798076923076923, 1e-9,
                   "rouge_l crafted");
    c.expect_close(meteor_lite({T({"the", "cats", "sat", "here"})}, {{T({"here", "the", "cat", "sits"})}}),
                   0.6388888888888888, 1e-9, "meteor crafted");
    auto d1 = distinct_n({T({"a", "b", "a"})}, 1);
    c.expect(d1.has_value(), "distinct-1 defined");
    if (d1) c.expect_close(*d1, 2.0 / 3.0, 1e-12, "distinct-1 value");

    SlotPrf s = slot_prf({T({"name_slot", "and", "name_slot"})}, {parse_cmr("name[Aromi]")});
    c.expect(s.precision == 0.5 && s.recall == 1.0, "slot duplicate penalty");
}

void check_chi_square_oracles(Ctx& c) {
    c.expect_close(chi2_sf(3.84, 1), 0.05004352124870519, 1e-12, "chi2_sf(3.84,1)");
    c.expect_close(chi2_sf(7.81, 3), 0.05010605635000589, 1e-12, "chi2_sf(7.81,3)");
    c.expect_close(chi2_sf(2.0, 5), 0.8491450360846096, 1e-12, "chi2_sf(2.0,5)");
    c.expect_close(chi2_sf(35.0, 10), 0.0001248652527830378, 1e-12, "chi2_sf(35,10)");
    c.expect_close(gamma_q(1.5, 2.0), 0.26146412994911117, 1e-12, "gamma_q(1.5,2)");
    c.expect_close(gamma_q(0.5, 0.25), 0.47950012218695337, 1e-12, "gamma_q(0.5,0.25)");
}

void check_checkpoint_roundtrip(Ctx& c) {
    const auto dir = scratch_dir();
    const auto csv = dir / "toy.csv";
    {
        std::ofstream out(csv, std::ios::binary);
        out << kToyCsv;
    }
    TrainConfig cfg;
    cfg.mode = "personage";
    cfg.train_csv = csv.string();
    cfg.embed_dim = 8;
    cfg.content_codes = 3;
    cfg.epochs = 1;
    cfg.batch_size = 2;
    cfg.seed = 9;
    LoadedDataset data = load_dataset(csv.string(), DatasetFormat::personage);
    Checkpoint ck = init_training(cfg, data);
    ck.tables = build_tables(ck.model, data.examples, DatasetFormat::personage);

    const auto p1 = dir / "a.ckpt";
    const auto p2 = dir / "b.ckpt";
    save_checkpoint(p1.string(), ck);
    Checkpoint loaded = load_checkpoint(p1.string());
    save_checkpoint(p2.string(), loaded);
    c.expect(read_file(p1) == read_file(p2), "save-load-save byte identity");

    ParamList a = ck.model.params(), b = loaded.model.params();
    bool same = a.size() == b.size();
    for (size_t i = 0; same && i < a.size(); ++i) {
        same = a[i].first == b[i].first && a[i].second.data() == b[i].second.data();
    }
    c.expect(same, "parameter bit equality after reload");
    std::filesystem::remove_all(dir);
}

void check_sampler_tables(Ctx& c) {
    const auto dir = scratch_dir();
    const auto csv = dir / "toy.csv";
    {
        std::ofstream out(csv, std::ios::binary);
        out << kToyCsv;
    }
    LoadedDataset data = load_dataset(csv.string(), DatasetFormat::personage);
    FvnDims dims = toy_dims();
    dims.vocab = data.vocab.size();
    std::mt19937_64 rng(21);
    FvnParams p = make_fvn(dims, rng);
    CodeTables t = build_tables(p, data.examples, DatasetFormat::personage);

    auto check_vec = [&](const std::vector<double>& v, const std::string& what) {
        double s = 0.0;
        for (double x : v) s += x;
        if (std::fabs(s - 1.0) > 1e-9) c.expect(false, what + " sums to " + format_double(s));
    };
    for (const auto& [key, entry] : t.content) check_vec(entry.probs, "content[" + key + "]");
    for (const auto& [key, v] : t.style) check_vec(v, "style[" + key + "]");
    check_vec(t.content_marginal, "content marginal");
    check_vec(t.style_marginal, "style marginal");

    const Cmr cmr = data.examples[0].cmr;
    std::mt19937_64 g1(77), g2(77);
    GenerationResult r1 = generate(p, t, data.vocab, cmr, std::string("agreeable"), DatasetFormat::personage, g1);
    GenerationResult r2 = generate(p, t, data.vocab, cmr, std::string("agreeable"), DatasetFormat::personage, g2);
    c.expect(r1.text == r2.text && r1.codes.k == r2.codes.k, "same-seed generation identity");
    std::filesystem::remove_all(dir);
}

} // namespace

bool SelftestReport::all_passed() const {
    for (const auto& ch : checks) {
        if (!ch.passed) return false;
    }
    return true;
}

SelftestReport run_selftest() {
    SelftestReport report;
    run_check(report, "hash-pins", check_hash_pins);
    run_check(report, "rng-stream-pins", check_rng_pins);
    run_check(report, "primitive-gradients", check_primitive_gradients);
    run_check(report, "loss-gradients-frozen-quantization", check_loss_gradients);
    run_check(report, "vq-identities", check_vq_identities);
    run_check(report, "adam-step-limit", check_adam_limit);
    run_check(report, "metric-oracles", check_metric_oracles);
    run_check(report, "chi-square-oracles", check_chi_square_oracles);
    run_check(report, "checkpoint-roundtrip", check_checkpoint_roundtrip);
    run_check(report, "sampler-tables", check_sampler_tables);
    return report;
}

std::string format_selftest(const SelftestReport& r) {
    std::ostringstream os;
    for (const auto& ch : r.checks) {
        os << (ch.passed ? "PASS" : "FAIL") << "  " << ch.name;
        if (!ch.detail.empty()) os << "  (" << ch.detail << ")";
        os << "\n";
    }
    os << (r.all_passed() ? "selftest: all checks passed" : "selftest: FAILURES PRESENT") << "\n";
    return os.str();
}

} // namespace fvn

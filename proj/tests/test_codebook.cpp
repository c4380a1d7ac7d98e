#include <doctest.h>

#include <random>

#include "codebook.hpp"
#include "rng.hpp"
#include "tape.hpp"

using namespace fvn;

TEST_CASE("nearest code with tie toward the lowest index") {
    // z is equidistant from rows 0 and 2; row 1 is farther away.
    Tensor cb = Tensor::from({3, 2}, {0.0, 0.0, 5.0, 5.0, 2.0, 0.0});
    Tensor z = Tensor::from({2}, {1.0, 0.0});
    CHECK(nearest_code(z, cb) == 0);

    Tensor z2 = Tensor::from({2}, {1.9, 0.0});
    CHECK(nearest_code(z2, cb) == 2);

    CHECK_THROWS_AS(nearest_code(Tensor::from({3}, {1, 2, 3}), cb), DimensionError);
    Tensor bad = Tensor::from({2}, {1.0, 0.0});
    bad.mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(nearest_code(bad, cb), NumericError);
}

TEST_CASE("nearest codes agrees with brute force on random queries") {
    std::mt19937_64 rng(2024);
    const int K = 32, D = 8, M = 1000;
    Tensor cb = Tensor::zeros({K, D});
    for (int64_t i = 0; i < cb.size(); ++i) cb.mutable_data()[i] = uniform_double(rng, -1.0, 1.0);
    Tensor qs = Tensor::zeros({M, D});
    for (int64_t i = 0; i < qs.size(); ++i) qs.mutable_data()[i] = uniform_double(rng, -1.0, 1.0);
    // a few exact duplicates of codebook rows to force zero-distance hits
    for (int m = 0; m < 10; ++m) {
        for (int c = 0; c < D; ++c) qs.mutable_data()[m * D + c] = cb.at(m % K, c);
    }

    std::vector<int> got = nearest_codes(qs, cb);
    REQUIRE(got.size() == M);
    for (int m = 0; m < M; ++m) {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int r = 0; r < K; ++r) {
            double dist = 0;
            for (int c = 0; c < D; ++c) {
                double diff = qs.at(m, c) - cb.at(r, c);
                dist += diff * diff;
            }
            if (dist < best_dist) {
                best_dist = dist;
                best = r;
            }
        }
        CHECK(got[m] == best);
    }
    for (int m = 0; m < 10; ++m) CHECK(got[m] == m % K);
}

TEST_CASE("vq loss value and gradients by hand") {
    // z = [1, 0], e_0 = [0, 0]: loss = (1 + beta) * 1 = 1.25 at beta = 0.25
    Tensor cb = Tensor::param({2, 2}, {0.0, 0.0, 2.0, 0.0});
    Tensor z = Tensor::param({2}, {1.0, 0.0});

    Tape tape;
    Tensor loss = vq_loss(z, cb, 0, 0.25);
    CHECK(loss.item() == doctest::Approx(1.25).epsilon(1e-12));
    GradientMap grads = tape.backward(loss);

    // d/d e_0 = 2 (e_0 - z) = [-2, 0]; other rows untouched
    auto gcb = grads.get(cb);
    CHECK(gcb[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(gcb[1] == doctest::Approx(0.0));
    CHECK(gcb[2] == doctest::Approx(0.0));
    CHECK(gcb[3] == doctest::Approx(0.0));
    // d/d z = 2 beta (z - e_0) = [0.5, 0]
    auto gz = grads.get(z);
    CHECK(gz[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gz[1] == doctest::Approx(0.0));
}

TEST_CASE("vq loss gradients match the closed form at random points") {
    // Note a plain finite difference of the forward value would NOT match
    // here: the forward equals (1 + beta) ||z - e_k||^2, but the two
    // stop-gradients split the derivative so z only feels the beta term and
    // the codebook row only the unscaled term. The closed forms are
    //   dL/dz = 2 beta (z - e_k),     dL/de_k = 2 (e_k - z).
    std::mt19937_64 rng(7);
    const double beta = 0.25;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> cbv(12), zv(3);
        for (double& v : cbv) v = uniform_double(rng, -1.0, 1.0);
        for (double& v : zv) v = uniform_double(rng, -1.0, 1.0);
        Tensor cb = Tensor::param({4, 3}, cbv);
        Tensor z = Tensor::param({3}, zv);
        int k = nearest_code(z, cb);

        Tape tape;
        Tensor loss = vq_loss(z, cb, k, beta);
        GradientMap grads = tape.backward(loss);

        double dist2 = 0;
        for (int c = 0; c < 3; ++c) {
            double diff = z.at(c) - cb.at(k, c);
            dist2 += diff * diff;
        }
        CHECK(loss.item() == doctest::Approx((1 + beta) * dist2).epsilon(1e-12));

        auto gz = grads.get(z);
        auto gcb = grads.get(cb);
        for (int c = 0; c < 3; ++c) {
            CHECK(gz[static_cast<size_t>(c)] ==
                  doctest::Approx(2 * beta * (z.at(c) - cb.at(k, c))).epsilon(1e-12));
        }
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 3; ++c) {
                double expect = (r == k) ? 2 * (cb.at(r, c) - z.at(c)) : 0.0;
                CHECK(gcb[static_cast<size_t>(r * 3 + c)] == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("straight-through quantization") {
    Tensor cb = Tensor::param({2, 3}, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
    Tensor z = Tensor::param({3}, {-1.0, 2.0, 0.25});

    SUBCASE("forward value equals the codebook row exactly") {
        Tensor q = quantize_straight_through(z, cb, 1);
        for (int c = 0; c < 3; ++c) CHECK(q.at(c) == cb.at(1, c));
    }
    SUBCASE("backward copies the upstream gradient to z and none to the codebook") {
        Tape tape;
        Tensor q = quantize_straight_through(z, cb, 1);
        Tensor w = Tensor::from({3}, {3.0, -2.0, 7.0});
        Tensor loss = sum(mul(q, w)); // dL/dq = w
        GradientMap grads = tape.backward(loss);
        auto gz = grads.get(z);
        CHECK(gz[0] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(gz[1] == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(gz[2] == doctest::Approx(7.0).epsilon(1e-12));
        CHECK_FALSE(grads.has(cb));
    }
}

TEST_CASE("codebook construction") {
    SUBCASE("content codebook entries lie in [-1/K, 1/K] and are seed-deterministic") {
        std::mt19937_64 a(99), b(99), c(100);
        Tensor cb1 = make_content_codebook(a, 16, 4);
        Tensor cb2 = make_content_codebook(b, 16, 4);
        Tensor cb3 = make_content_codebook(c, 16, 4);
        REQUIRE(cb1.shape() == Shape{16, 4});
        CHECK(cb1.requires_grad());
        bool any_diff = false;
        for (int64_t i = 0; i < cb1.size(); ++i) {
            CHECK(cb1.data()[i] >= -1.0 / 16);
            CHECK(cb1.data()[i] <= 1.0 / 16);
            CHECK(cb1.data()[i] == cb2.data()[i]);
            any_diff |= (cb1.data()[i] != cb3.data()[i]);
        }
        CHECK(any_diff);
    }
    SUBCASE("codebook_from_rows deep-copies") {
        Tensor rows = Tensor::from({2, 2}, {1.0, 2.0, 3.0, 4.0});
        Tensor cb = codebook_from_rows(rows);
        CHECK(cb.requires_grad());
        CHECK(cb.at(1, 0) == 3.0);
        cb.mutable_data()[0] = 42.0;
        CHECK(rows.at(0, 0) == 1.0); // source untouched
        CHECK_THROWS_AS(codebook_from_rows(Tensor::from({3}, {1, 2, 3})), DimensionError);
    }
    SUBCASE("bad index is rejected") {
        Tensor cb = Tensor::param({2, 2}, {0, 0, 0, 0});
        Tensor z = Tensor::param({2}, {0, 0});
        CHECK_THROWS_AS(vq_loss(z, cb, 2, 0.25), ArgumentError);
        CHECK_THROWS_AS(vq_loss(z, cb, -1, 0.25), ArgumentError);
        CHECK_THROWS_AS(quantize_straight_through(z, cb, 5), ArgumentError);
    }
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "prbp/transform.hpp"
#include "oracles.hpp"

using namespace prbp;
using Catch::Matchers::WithinAbs;

namespace {

SampleBlock random_block(std::mt19937& rng, int n, int lo, int hi) {
    SampleBlock b(n);
    for (int i = 0; i < n * n; ++i)
        b.v[static_cast<std::size_t>(i)] =
            lo + static_cast<Sample>(rng() % static_cast<std::uint32_t>(hi - lo + 1));
    return b;
}

}  // namespace

TEST_CASE("dct2: constant block concentrates into DC = N*c") {
    for (int n : {4, 8, 16, 32}) {
        SampleBlock b(n);
        for (int i = 0; i < n * n; ++i) b.v[static_cast<std::size_t>(i)] = 9;
        const CoeffBlockReal c = dct2(b);
        CHECK_THAT(c.at(0, 0), WithinAbs(9.0 * n, 1e-9));
        for (int i = 1; i < n * n; ++i)
            CHECK_THAT(c.v[static_cast<std::size_t>(i)], WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("dct2: all-zero block stays zero") {
    const CoeffBlockReal c = dct2(SampleBlock(8));
    for (int i = 0; i < 64; ++i) CHECK(c.v[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("dct2: inversion identity and Parseval energy preservation") {
    std::mt19937 rng(3);
    for (int n : {4, 8, 16, 32}) {
        const SampleBlock b = random_block(rng, n, -512, 512);
        const CoeffBlockReal c = dct2(b);

        double spatial = 0.0, spectral = 0.0;
        for (int i = 0; i < n * n; ++i) {
            spatial += static_cast<double>(b.v[static_cast<std::size_t>(i)]) *
                       static_cast<double>(b.v[static_cast<std::size_t>(i)]);
            spectral += c.v[static_cast<std::size_t>(i)] * c.v[static_cast<std::size_t>(i)];
        }
        CHECK_THAT(spectral, WithinAbs(spatial, 1e-6 * spatial + 1e-9));

        const CoeffBlockReal back = idct2(c);
        for (int i = 0; i < n * n; ++i)
            CHECK_THAT(back.v[static_cast<std::size_t>(i)],
                       WithinAbs(static_cast<double>(b.v[static_cast<std::size_t>(i)]), 1e-9));
    }
}

TEST_CASE("dct2: matches the direct O(N^4) definition") {
    std::mt19937 rng(5);
    for (int n : {4, 8}) {
        const SampleBlock b = random_block(rng, n, -255, 255);
        const CoeffBlockReal c = dct2(b);
        const std::vector<double> naive = oracle::dct2_naive(b);
        for (int i = 0; i < n * n; ++i)
            CHECK_THAT(c.v[static_cast<std::size_t>(i)],
                       WithinAbs(naive[static_cast<std::size_t>(i)], 1e-8));
    }
}

TEST_CASE("quantize: step sizes and rounding") {
    CHECK(qstep_of_qp(4) == 1.0);
    CHECK(qstep_of_qp(10) == 2.0);
    CHECK(qstep_of_qp(16) == 4.0);  // 2^((16-4)/6) = 2^2

    CoeffBlockReal c(4);
    c.at(0, 0) = 10.7;
    CHECK(quantize(c, 4).at(0, 0) == 11);

    c.at(0, 0) = 3.0;
    const CoeffBlock q = quantize(c, 10);
    CHECK(q.at(0, 0) == 2);  // 3/2 = 1.5 rounds away from zero
    CHECK(dequantize(q).at(0, 0) == 4.0);

    c.at(0, 0) = -3.0;
    CHECK(quantize(c, 10).at(0, 0) == -2);
}

TEST_CASE("quantize: qp range enforced") {
    CHECK_THROWS_AS(quantize(CoeffBlockReal(4), -1), std::invalid_argument);
    CHECK_THROWS_AS(quantize(CoeffBlockReal(4), 52), std::invalid_argument);
}

TEST_CASE("quantize/dequantize: reconstruction error bounded by half a step") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-1000.0, 1000.0);
    for (int qp : {0, 4, 17, 22, 37, 51}) {
        const double qstep = qstep_of_qp(qp);
        CoeffBlockReal c(8);
        for (int i = 0; i < 64; ++i) c.v[static_cast<std::size_t>(i)] = dist(rng);
        const CoeffBlockReal back = dequantize(quantize(c, qp));
        for (int i = 0; i < 64; ++i)
            CHECK(std::abs(back.v[static_cast<std::size_t>(i)] - c.v[static_cast<std::size_t>(i)]) <=
                  qstep / 2 + 1e-12);
    }
}

TEST_CASE("reconstruct: zero residual, clamping, scalar oracle") {
    SampleBlock pred(4);
    for (int i = 0; i < 16; ++i) pred.v[static_cast<std::size_t>(i)] = 100 + i;

    const SampleBlock same = reconstruct(pred, CoeffBlockReal(4), 8);
    for (int i = 0; i < 16; ++i)
        CHECK(same.v[static_cast<std::size_t>(i)] == pred.v[static_cast<std::size_t>(i)]);

    SampleBlock big(4);
    for (int i = 0; i < 16; ++i) big.v[static_cast<std::size_t>(i)] = 65530;
    CoeffBlockReal resid(4);
    for (int i = 0; i < 16; ++i) resid.v[static_cast<std::size_t>(i)] = 100.0;
    const SampleBlock clamped = reconstruct(big, resid, 16);
    for (int i = 0; i < 16; ++i) CHECK(clamped.v[static_cast<std::size_t>(i)] == 65535);

    std::mt19937 rng(29);
    for (int iter = 0; iter < 100; ++iter) {
        SampleBlock p(4);
        CoeffBlockReal r(4);
        for (int i = 0; i < 16; ++i) {
            p.v[static_cast<std::size_t>(i)] = static_cast<Sample>(rng() % 256);
            r.v[static_cast<std::size_t>(i)] =
                -64.0 + static_cast<double>(rng() % 1280) / 10.0;
        }
        const SampleBlock rec = reconstruct(p, r, 8);
        for (int i = 0; i < 16; ++i) {
            long long v = p.v[static_cast<std::size_t>(i)] +
                          oracle::round_half_away(r.v[static_cast<std::size_t>(i)]);
            v = std::max(0ll, std::min(255ll, v));
            CHECK(rec.v[static_cast<std::size_t>(i)] == v);
        }
    }
}

TEST_CASE("closed loop at unit step: only transform rounding remains") {
    // qp=4 (Qstep 1) on random 8-bit blocks: coefficient rounding injects at
    // most uniform(-1/2,1/2) noise per coefficient, which bounds the spatial
    // error at an MSE of ~0.085 (the occasional off-by-one after the final
    // integer rounding). That floor sits at 58.8-58.9 dB.
    std::mt19937 rng(41);
    double sse = 0.0;
    int count = 0;
    for (int iter = 0; iter < 50; ++iter) {
        const SampleBlock orig = random_block(rng, 8, 0, 255);
        const SampleBlock pred(8);  // zero prediction: the residual is the signal
        SampleBlock resid(8);
        for (int i = 0; i < 64; ++i)
            resid.v[static_cast<std::size_t>(i)] = orig.v[static_cast<std::size_t>(i)];
        const CoeffBlock q = quantize(dct2(resid), 4);
        const SampleBlock rec = reconstruct(pred, idct2(dequantize(q)), 8);
        for (int i = 0; i < 64; ++i) {
            const double d = static_cast<double>(rec.v[static_cast<std::size_t>(i)]) -
                             static_cast<double>(orig.v[static_cast<std::size_t>(i)]);
            sse += d * d;
            ++count;
        }
    }
    const double mean_sq = sse / count;
    const double psnr = 10.0 * std::log10(255.0 * 255.0 / std::max(mean_sq, 1e-12));
    CHECK(psnr > 58.0);

    // with coefficients that are already integral the loop is exact: the only
    // residual error is double-precision noise far below the rounding step
    std::mt19937 rng2(43);
    for (int iter = 0; iter < 20; ++iter) {
        CoeffBlockReal coeffs(8);
        for (int i = 0; i < 64; ++i)
            coeffs.v[static_cast<std::size_t>(i)] = static_cast<double>(
                static_cast<int>(rng2() % 401) - 200);
        const CoeffBlock q = quantize(coeffs, 4);
        for (int i = 0; i < 64; ++i)
            REQUIRE(q.level[static_cast<std::size_t>(i)] ==
                    static_cast<std::int32_t>(coeffs.v[static_cast<std::size_t>(i)]));
        const CoeffBlockReal back = dequantize(q);
        for (int i = 0; i < 64; ++i)
            REQUIRE(back.v[static_cast<std::size_t>(i)] == coeffs.v[static_cast<std::size_t>(i)]);
    }
}

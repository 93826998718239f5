#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "prbp/common.hpp"

namespace prbp {

inline constexpr int kMaxBlockSize = 32;
inline constexpr int kMinBlockSize = 4;

inline bool valid_block_size(int n) {
    return n == 4 || n == 8 || n == 16 || n == 32;
}

// Fixed-capacity N x N block of integer samples (residuals, predictions,
// reconstructions). Value semantics; only the top-left n*n entries are live.
struct SampleBlock {
    int n = 0;
    std::array<Sample, kMaxBlockSize * kMaxBlockSize> v{};

    explicit SampleBlock(int size = 0) : n(size) {}

    Sample& at(int row, int col) { return v[static_cast<std::size_t>(row) * n + col]; }
    Sample at(int row, int col) const { return v[static_cast<std::size_t>(row) * n + col]; }
};

// Same layout for real-valued transform coefficients.
struct CoeffBlockReal {
    int n = 0;
    std::array<double, kMaxBlockSize * kMaxBlockSize> v{};

    explicit CoeffBlockReal(int size = 0) : n(size) {}

    double& at(int row, int col) { return v[static_cast<std::size_t>(row) * n + col]; }
    double at(int row, int col) const { return v[static_cast<std::size_t>(row) * n + col]; }
};

// Quantized transform levels plus the quantization parameter they were
// produced with.
struct CoeffBlock {
    int n = 0;
    int qp = 0;
    std::array<std::int32_t, kMaxBlockSize * kMaxBlockSize> level{};

    explicit CoeffBlock(int size = 0, int qp_ = 0) : n(size), qp(qp_) {}

    std::int32_t& at(int row, int col) { return level[static_cast<std::size_t>(row) * n + col]; }
    std::int32_t at(int row, int col) const { return level[static_cast<std::size_t>(row) * n + col]; }

    bool all_zero() const {
        for (int i = 0; i < n * n; ++i)
            if (level[static_cast<std::size_t>(i)] != 0) return false;
        return true;
    }
};

namespace detail {

// Orthonormal DCT-II basis for one block size: T[k][i] = c_k cos(pi (2i+1) k / 2N).
struct DctTable {
    int n;
    std::array<double, kMaxBlockSize * kMaxBlockSize> t;

    explicit DctTable(int size) : n(size) {
        constexpr double kPi = 3.1415926535897932384626433832795;
        for (int k = 0; k < n; ++k) {
            const double c = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            for (int i = 0; i < n; ++i) {
                t[static_cast<std::size_t>(k) * n + i] =
                    c * std::cos(kPi * (2 * i + 1) * k / (2.0 * n));
            }
        }
    }

    double at(int k, int i) const { return t[static_cast<std::size_t>(k) * n + i]; }
};

inline const DctTable& dct_table(int n) {
    static const DctTable t4(4), t8(8), t16(16), t32(32);
    switch (n) {
        case 4: return t4;
        case 8: return t8;
        case 16: return t16;
        default: return t32;
    }
}

}  // namespace detail

// Forward orthonormal 2-D DCT-II: C = T X T' (separable, row pass then column
// pass). Energy-preserving, so distortion can be measured in either domain.
inline CoeffBlockReal dct2(const SampleBlock& residual) {
    const int n = residual.n;
    const auto& tb = detail::dct_table(n);
    CoeffBlockReal tmp(n), out(n);
    for (int k = 0; k < n; ++k) {
        for (int col = 0; col < n; ++col) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += tb.at(k, i) * residual.at(i, col);
            tmp.at(k, col) = acc;
        }
    }
    for (int row = 0; row < n; ++row) {
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += tmp.at(row, i) * tb.at(k, i);
            out.at(row, k) = acc;
        }
    }
    return out;
}

// Inverse 2-D DCT: X = T' C T.
inline CoeffBlockReal idct2(const CoeffBlockReal& coeffs) {
    const int n = coeffs.n;
    const auto& tb = detail::dct_table(n);
    CoeffBlockReal tmp(n), out(n);
    for (int i = 0; i < n; ++i) {
        for (int col = 0; col < n; ++col) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += tb.at(k, i) * coeffs.at(k, col);
            tmp.at(i, col) = acc;
        }
    }
    for (int row = 0; row < n; ++row) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += tmp.at(row, k) * tb.at(k, i);
            out.at(row, i) = acc;
        }
    }
    return out;
}

inline constexpr int kMinQp = 0;
inline constexpr int kMaxQp = 51;

// Quantizer step size, doubling every 6 QP; qp=4 gives a unit step.
inline double qstep_of_qp(int qp) {
    return std::exp2((qp - 4) / 6.0);
}

inline CoeffBlock quantize(const CoeffBlockReal& coeffs, int qp) {
    if (qp < kMinQp || qp > kMaxQp) throw std::invalid_argument("qp out of range [0,51]");
    const double qstep = qstep_of_qp(qp);
    CoeffBlock out(coeffs.n, qp);
    for (int i = 0; i < coeffs.n * coeffs.n; ++i) {
        out.level[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(
            round_half_away(coeffs.v[static_cast<std::size_t>(i)] / qstep));
    }
    return out;
}

inline CoeffBlockReal dequantize(const CoeffBlock& levels) {
    const double qstep = qstep_of_qp(levels.qp);
    CoeffBlockReal out(levels.n);
    for (int i = 0; i < levels.n * levels.n; ++i) {
        out.v[static_cast<std::size_t>(i)] =
            static_cast<double>(levels.level[static_cast<std::size_t>(i)]) * qstep;
    }
    return out;
}

// Closed-loop reconstruction shared by encoder and decoder:
// clamp(prediction + round(residual)).
inline SampleBlock reconstruct(const SampleBlock& prediction,
                               const CoeffBlockReal& residual, int bit_depth) {
    SampleBlock out(prediction.n);
    for (int i = 0; i < prediction.n * prediction.n; ++i) {
        const std::int64_t r = round_half_away(residual.v[static_cast<std::size_t>(i)]);
        out.v[static_cast<std::size_t>(i)] =
            clamp_sample(prediction.v[static_cast<std::size_t>(i)] + r, bit_depth);
    }
    return out;
}

}  // namespace prbp

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace prbp {

// Widened signed sample type: wide enough for 16-bit data plus the signed
// headroom residuals and intermediate sums need.
using Sample = std::int32_t;

// Error hierarchy. io_error covers filesystem problems, format_error covers
// malformed or inconsistent payloads, insufficient_support covers statistics
// requested on fewer than two sample pairs.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public error {
public:
    using error::error;
};

class format_error : public error {
public:
    using error::error;
};

class insufficient_support : public error {
public:
    using error::error;
};

inline constexpr int kMinBitDepth = 8;
inline constexpr int kMaxBitDepth = 16;

inline bool valid_bit_depth(int bit_depth) {
    return bit_depth >= kMinBitDepth && bit_depth <= kMaxBitDepth;
}

// Largest representable sample value for a bit depth.
inline Sample max_sample(int bit_depth) {
    return static_cast<Sample>((1u << bit_depth) - 1u);
}

// Mid-range value used when no reference samples are available.
inline Sample mid_sample(int bit_depth) {
    return static_cast<Sample>(1u << (bit_depth - 1));
}

// The one rounding convention used throughout the codec: half away from zero.
inline std::int64_t round_half_away(double v) {
    return std::llround(v);
}

inline Sample clamp_sample(std::int64_t v, int bit_depth) {
    const std::int64_t hi = max_sample(bit_depth);
    return static_cast<Sample>(std::clamp<std::int64_t>(v, 0, hi));
}

// ceil(log2(v)) for v >= 1; smallest number of bits covering values 0..v-1.
inline int ceil_log2(std::uint64_t v) {
    int bits = 0;
    std::uint64_t span = 1;
    while (span < v) {
        span <<= 1;
        ++bits;
    }
    return bits;
}

}  // namespace prbp

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "prbp/common.hpp"
#include "prbp/transform.hpp"

namespace prbp {

// ============================================================================
// Bit-level I/O (MSB-first within each byte, zero-padded final byte)
// ============================================================================

class BitWriter {
public:
    void put_bit(int bit) {
        if (shift_ == 0) {
            bytes_.push_back(0);
            shift_ = 8;
        }
        --shift_;
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << shift_);
        ++bit_count_;
    }

    // Writes the low `nbits` of value, most significant bit first.
    void put_bits(std::uint64_t value, int nbits) {
        for (int i = nbits - 1; i >= 0; --i) put_bit(static_cast<int>((value >> i) & 1u));
    }

    // Order-0 exp-Golomb: value+1 in binary, prefixed by (bitlength-1) zeros.
    void put_ue(std::uint64_t value) {
        const std::uint64_t code = value + 1;
        int len = 0;
        while ((code >> len) > 1) ++len;
        put_bits(0, len);
        put_bits(code, len + 1);
    }

    // Signed mapping 0,1,-1,2,-2,... -> 0,1,2,3,4,...
    void put_se(std::int64_t value) {
        const std::uint64_t m =
            value > 0 ? 2 * static_cast<std::uint64_t>(value) - 1
                      : 2 * static_cast<std::uint64_t>(-value);
        put_ue(m);
    }

    std::uint64_t bit_count() const { return bit_count_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t bit_count_ = 0;
    int shift_ = 0;  // unused bits remaining in the last byte
};

class BitReader {
public:
    explicit BitReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    int get_bit() {
        const std::uint64_t byte = pos_ >> 3;
        if (byte >= bytes_.size()) throw format_error("read past end of stream");
        const int shift = 7 - static_cast<int>(pos_ & 7u);
        ++pos_;
        return (bytes_[byte] >> shift) & 1;
    }

    std::uint64_t get_bits(int nbits) {
        std::uint64_t v = 0;
        for (int i = 0; i < nbits; ++i) v = (v << 1) | static_cast<std::uint64_t>(get_bit());
        return v;
    }

    std::uint64_t get_ue() {
        int len = 0;
        while (get_bit() == 0) {
            if (++len > 63) throw format_error("malformed exp-Golomb code");
        }
        std::uint64_t code = 1;
        for (int i = 0; i < len; ++i) code = (code << 1) | static_cast<std::uint64_t>(get_bit());
        return code - 1;
    }

    std::int64_t get_se() {
        const std::uint64_t m = get_ue();
        if (m & 1u) return static_cast<std::int64_t>((m + 1) >> 1);
        return -static_cast<std::int64_t>(m >> 1);
    }

    std::uint64_t bit_position() const { return pos_; }
    std::uint64_t bits_total() const { return static_cast<std::uint64_t>(bytes_.size()) * 8; }

    // True once only zero padding in the final byte remains.
    bool only_padding_left() const {
        if (bits_total() - pos_ >= 8) return false;
        for (std::uint64_t p = pos_; p < bits_total(); ++p) {
            const int shift = 7 - static_cast<int>(p & 7u);
            if ((bytes_[p >> 3] >> shift) & 1) return false;
        }
        return true;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::uint64_t pos_ = 0;
};

// ============================================================================
// Prediction modes and their binarization
// ============================================================================

enum class PredMode : int {
    IntraDC = 0,
    IntraPlanar = 1,
    IntraHorizontal = 2,
    IntraVertical = 3,
    Direct1 = 4,
    Direct2 = 5,
    Direct3 = 6,
    PelRecursive = 7,
    BlockWise = 8,
};

inline constexpr int kModeCount = 9;
inline constexpr int kIntraModeCount = 4;

inline bool is_inter_band(PredMode m) { return static_cast<int>(m) >= 4; }

inline const char* mode_name(PredMode m) {
    switch (m) {
        case PredMode::IntraDC: return "dc";
        case PredMode::IntraPlanar: return "planar";
        case PredMode::IntraHorizontal: return "horizontal";
        case PredMode::IntraVertical: return "vertical";
        case PredMode::Direct1: return "direct1";
        case PredMode::Direct2: return "direct2";
        case PredMode::Direct3: return "direct3";
        case PredMode::PelRecursive: return "pel_recursive";
        case PredMode::BlockWise: return "block_wise";
    }
    return "?";
}

// With a reference set present the mode index is exp-Golomb coded with the
// inter-band modes on the smallest codewords; intra-only blocks use a fixed
// 2-bit code over the four intra modes.
inline void write_mode(BitWriter& bw, PredMode mode, bool inter_available) {
    const int m = static_cast<int>(mode);
    if (inter_available) {
        const int wire = m >= 4 ? m - 4 : m + 5;
        bw.put_ue(static_cast<std::uint64_t>(wire));
    } else {
        if (m >= kIntraModeCount)
            throw std::invalid_argument("inter-band mode in intra-only context");
        bw.put_bits(static_cast<std::uint64_t>(m), 2);
    }
}

inline PredMode read_mode(BitReader& br, bool inter_available) {
    if (inter_available) {
        const std::uint64_t wire = br.get_ue();
        if (wire >= kModeCount) throw format_error("mode index out of range");
        const int m = wire <= 4 ? static_cast<int>(wire) + 4 : static_cast<int>(wire) - 5;
        return static_cast<PredMode>(m);
    }
    return static_cast<PredMode>(br.get_bits(2));
}

// ============================================================================
// Coefficient coding: zigzag scan + (zero-run, level) pairs, EOB = (0, 0)
// ============================================================================

namespace detail {

// Diagonal zigzag starting at DC, alternating up-right / down-left.
inline std::vector<int> make_zigzag(int n) {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n) * n);
    for (int d = 0; d <= 2 * (n - 1); ++d) {
        if (d % 2 == 0) {  // walking up-right: row decreasing
            for (int row = std::min(d, n - 1); row >= std::max(0, d - n + 1); --row)
                order.push_back(row * n + (d - row));
        } else {  // walking down-left: row increasing
            for (int row = std::max(0, d - n + 1); row <= std::min(d, n - 1); ++row)
                order.push_back(row * n + (d - row));
        }
    }
    return order;
}

inline const std::vector<int>& zigzag(int n) {
    static const std::vector<int> z4 = make_zigzag(4);
    static const std::vector<int> z8 = make_zigzag(8);
    static const std::vector<int> z16 = make_zigzag(16);
    static const std::vector<int> z32 = make_zigzag(32);
    switch (n) {
        case 4: return z4;
        case 8: return z8;
        case 16: return z16;
        default: return z32;
    }
}

}  // namespace detail

inline void write_coefficients(BitWriter& bw, const CoeffBlock& block) {
    const auto& scan = detail::zigzag(block.n);
    int run = 0;
    for (int pos = 0; pos < block.n * block.n; ++pos) {
        const std::int32_t level = block.level[static_cast<std::size_t>(scan[pos])];
        if (level == 0) {
            ++run;
        } else {
            bw.put_ue(static_cast<std::uint64_t>(run));
            bw.put_se(level);
            run = 0;
        }
    }
    bw.put_ue(0);  // end of block: run 0 with level 0
    bw.put_se(0);
}

inline CoeffBlock read_coefficients(BitReader& br, int n, int qp) {
    CoeffBlock block(n, qp);
    const auto& scan = detail::zigzag(n);
    int pos = 0;
    for (;;) {
        const std::uint64_t run = br.get_ue();
        const std::int64_t level = br.get_se();
        if (level == 0) {
            if (run != 0) throw format_error("malformed end-of-block symbol");
            break;
        }
        pos += static_cast<int>(run);
        if (pos >= n * n) throw format_error("coefficient run exceeds block size");
        block.level[static_cast<std::size_t>(scan[pos])] = static_cast<std::int32_t>(level);
        ++pos;
    }
    return block;
}

// ============================================================================
// Stream header
// ============================================================================

inline constexpr std::uint32_t kStreamVersion = 1;
inline constexpr char kStreamMagic[4] = {'P', 'R', 'B', 'P'};

struct StreamHeader {
    std::uint32_t version = kStreamVersion;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t bands = 0;
    std::uint32_t bit_depth = 0;
    std::uint32_t qp = 0;
    bool inter_band_enabled = false;
    bool ordering_enabled = false;
    std::uint32_t anchor_band = 0;
    std::vector<std::uint32_t> band_order;  // coded position -> original index

    friend bool operator==(const StreamHeader& a, const StreamHeader& b) = default;
};

inline void write_header(BitWriter& bw, const StreamHeader& h) {
    for (char c : kStreamMagic) bw.put_bits(static_cast<std::uint8_t>(c), 8);
    bw.put_bits(h.version, 32);
    bw.put_bits(h.width, 32);
    bw.put_bits(h.height, 32);
    bw.put_bits(h.bands, 32);
    bw.put_bits(h.bit_depth, 32);
    bw.put_bits(h.qp, 32);
    std::uint32_t flags = 0;
    if (h.inter_band_enabled) flags |= 1u;
    if (h.ordering_enabled) flags |= 2u;
    bw.put_bits(flags, 32);
    bw.put_bits(h.anchor_band, 32);
    for (std::uint32_t b : h.band_order) bw.put_bits(b, 32);
}

inline StreamHeader read_header(BitReader& br) {
    for (char c : kStreamMagic) {
        if (br.get_bits(8) != static_cast<std::uint8_t>(c))
            throw format_error("bad stream magic (expected PRBP)");
    }
    StreamHeader h;
    h.version = static_cast<std::uint32_t>(br.get_bits(32));
    if (h.version != kStreamVersion)
        throw format_error("unsupported stream version " + std::to_string(h.version));
    h.width = static_cast<std::uint32_t>(br.get_bits(32));
    h.height = static_cast<std::uint32_t>(br.get_bits(32));
    h.bands = static_cast<std::uint32_t>(br.get_bits(32));
    h.bit_depth = static_cast<std::uint32_t>(br.get_bits(32));
    h.qp = static_cast<std::uint32_t>(br.get_bits(32));
    const auto flags = static_cast<std::uint32_t>(br.get_bits(32));
    h.inter_band_enabled = (flags & 1u) != 0;
    h.ordering_enabled = (flags & 2u) != 0;
    h.anchor_band = static_cast<std::uint32_t>(br.get_bits(32));
    if (h.bands == 0 || h.bands > (1u << 16))
        throw format_error("band count out of range");
    h.band_order.resize(h.bands);
    std::vector<bool> seen(h.bands, false);
    for (std::uint32_t& b : h.band_order) {
        b = static_cast<std::uint32_t>(br.get_bits(32));
        if (b >= h.bands || seen[b]) throw format_error("band_order is not a permutation");
        seen[b] = true;
    }
    return h;
}

}  // namespace prbp

#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "prbp/bitstream.hpp"
#include "prbp/plane.hpp"
#include "prbp/regress.hpp"
#include "prbp/transform.hpp"

namespace prbp {

// Patch sizes for the per-pixel predictor: 5x5 drives reference-band
// selection, 3x3 drives the regression fit. Fixed so encoder and decoder
// agree without signalling.
inline constexpr int kCorrelationPatch = 5;
inline constexpr int kRegressionPatch = 3;

// ============================================================================
// Causal region tracking
// ============================================================================

// Per-pixel map of which samples of the current band have been reconstructed.
// A sample is usable as reference exactly when its flag is set.
struct CausalMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> coded;

    CausalMask() = default;
    CausalMask(int w, int h) : width(w), height(h), coded(static_cast<std::size_t>(w) * h, 0) {}

    bool available(int row, int col) const {
        if (row < 0 || row >= height || col < 0 || col >= width) return false;
        return coded[static_cast<std::size_t>(row) * width + col] != 0;
    }

    void mark_block(int x0, int y0, int n) {
        for (int r = 0; r < n; ++r) {
            auto* p = &coded[static_cast<std::size_t>(y0 + r) * width + x0];
            std::fill(p, p + n, std::uint8_t{1});
        }
    }
};

// The three reconstructed spectral reference planes plus the causal view of
// the band being coded. Spectral planes are always reconstructions.
struct ReferenceSet {
    std::array<const Plane*, 3> spectral{nullptr, nullptr, nullptr};
    const Plane* current_recon = nullptr;
    const CausalMask* validity = nullptr;

    bool complete() const {
        return spectral[0] && spectral[1] && spectral[2] && current_recon && validity;
    }
};

// ============================================================================
// Boundary samples: the 2N+3 neighbouring reference pixels of a block
// ============================================================================

// top[i] holds row -1, column i-1 (columns -1..N); left[i] holds column -1,
// row i (rows 0..N). Values are filled; flags record pre-fill availability.
struct BoundarySamples {
    int n = 0;
    std::array<Sample, kMaxBlockSize + 2> top{};
    std::array<Sample, kMaxBlockSize + 1> left{};
    std::array<bool, kMaxBlockSize + 2> top_avail{};
    std::array<bool, kMaxBlockSize + 1> left_avail{};

    // Is block-local (row, col) one of the 2N+3 boundary positions?
    bool covers(int row, int col) const {
        if (row == -1) return col >= -1 && col <= n;
        if (col == -1) return row >= 0 && row <= n;
        return false;
    }

    Sample at(int row, int col) const {
        if (row == -1) return top[static_cast<std::size_t>(col + 1)];
        return left[static_cast<std::size_t>(row)];
    }

    bool was_available(int row, int col) const {
        if (row == -1) return top_avail[static_cast<std::size_t>(col + 1)];
        return left_avail[static_cast<std::size_t>(row)];
    }
};

// Builds the boundary for the block at (x0, y0). Unavailable entries are
// filled by propagating the nearest available sample scanning bottom-left to
// top-right; with nothing available everything becomes the mid-range value.
inline BoundarySamples build_boundary(int x0, int y0, int n, const Plane& plane,
                                      const CausalMask& causal) {
    BoundarySamples b;
    b.n = n;

    // Scan order: (n,-1) up to (0,-1), corner (-1,-1), then (-1,0)..(-1,n).
    const int total = 2 * n + 3;
    std::array<Sample, 2 * kMaxBlockSize + 3> val{};
    std::array<bool, 2 * kMaxBlockSize + 3> avail{};
    auto local_pos = [&](int i) -> std::pair<int, int> {
        if (i <= n) return {n - i, -1};
        return {-1, i - n - 2};
    };
    bool any = false;
    for (int i = 0; i < total; ++i) {
        const auto [lr, lc] = local_pos(i);
        const int row = y0 + lr;
        const int col = x0 + lc;
        avail[static_cast<std::size_t>(i)] = causal.available(row, col);
        if (avail[static_cast<std::size_t>(i)]) {
            val[static_cast<std::size_t>(i)] = plane.at(row, col);
            any = true;
        }
    }

    if (!any) {
        for (int i = 0; i < total; ++i) val[static_cast<std::size_t>(i)] = mid_sample(plane.bit_depth);
    } else {
        if (!avail[0]) {
            int j = 1;
            while (!avail[static_cast<std::size_t>(j)]) ++j;
            val[0] = val[static_cast<std::size_t>(j)];
        }
        for (int i = 1; i < total; ++i) {
            if (!avail[static_cast<std::size_t>(i)])
                val[static_cast<std::size_t>(i)] = val[static_cast<std::size_t>(i - 1)];
        }
    }

    for (int i = 0; i < total; ++i) {
        const auto [lr, lc] = local_pos(i);
        if (lr == -1) {
            b.top[static_cast<std::size_t>(lc + 1)] = val[static_cast<std::size_t>(i)];
            b.top_avail[static_cast<std::size_t>(lc + 1)] = avail[static_cast<std::size_t>(i)];
        } else {
            b.left[static_cast<std::size_t>(lr)] = val[static_cast<std::size_t>(i)];
            b.left_avail[static_cast<std::size_t>(lr)] = avail[static_cast<std::size_t>(i)];
        }
    }
    return b;
}

// ============================================================================
// Processing order (first row, then first column, then raster)
// ============================================================================

inline std::vector<std::pair<int, int>> processing_order(int n) {
    std::vector<std::pair<int, int>> order;
    order.reserve(static_cast<std::size_t>(n) * n);
    for (int col = 0; col < n; ++col) order.emplace_back(0, col);
    for (int row = 1; row < n; ++row) order.emplace_back(row, 0);
    for (int row = 1; row < n; ++row)
        for (int col = 1; col < n; ++col) order.emplace_back(row, col);
    return order;
}

// ============================================================================
// Patch extraction around one pixel
// ============================================================================

// Working state of a block prediction in progress: which in-block pixels have
// been predicted so far and their values.
struct BlockPredictionState {
    int x0 = 0;
    int y0 = 0;
    int n = 0;
    const BoundarySamples* boundary = nullptr;
    SampleBlock pred;
    std::array<bool, kMaxBlockSize * kMaxBlockSize> done{};

    BlockPredictionState(int x, int y, int size, const BoundarySamples& b)
        : x0(x), y0(y), n(size), boundary(&b), pred(size) {}

    // Current-band reference value at block-local (row, col), if that
    // position is valid support (boundary or already-predicted pixel).
    bool r_value(int row, int col, Sample& out) const {
        if (row >= 0 && row < n && col >= 0 && col < n) {
            if (!done[static_cast<std::size_t>(row) * n + col]) return false;
            out = pred.at(row, col);
            return true;
        }
        if (boundary->covers(row, col)) {
            out = boundary->at(row, col);
            return true;
        }
        return false;
    }
};

// Pairs (r, s) for the b x b patch centred at block-local (row, col). The
// centre is excluded; only valid r-support positions whose co-located sample
// exists inside the spectral plane contribute.
inline SamplePairSet extract_patch(const BlockPredictionState& st, int row, int col,
                                   int patch, const Plane& s_plane) {
    SamplePairSet pairs;
    pairs.r_values.reserve(static_cast<std::size_t>(patch) * patch);
    pairs.s_values.reserve(static_cast<std::size_t>(patch) * patch);
    const int h = patch / 2;
    for (int dr = -h; dr <= h; ++dr) {
        for (int dc = -h; dc <= h; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int r = row + dr;
            const int c = col + dc;
            Sample rv;
            if (!st.r_value(r, c, rv)) continue;
            const int abs_row = st.y0 + r;
            const int abs_col = st.x0 + c;
            if (!s_plane.contains(abs_row, abs_col)) continue;
            pairs.add(rv, s_plane.at(abs_row, abs_col));
        }
    }
    return pairs;
}

// Reference-band choice for the pixel at (row, col): the 5x5 patch with the
// highest absolute Pearson correlation wins, ties to the lowest slot. Fewer
// than two valid pairs falls back to slot 0. All spectral planes share
// dimensions, so the valid pair set is the same for each candidate.
inline int select_reference_band(const BlockPredictionState& st, int row, int col,
                                 const ReferenceSet& refs) {
    const SamplePairSet first =
        extract_patch(st, row, col, kCorrelationPatch, *refs.spectral[0]);
    if (first.size() < 2) return 0;
    int best = 0;
    double best_abs = std::abs(pearson_corr(first));
    for (int i = 1; i < 3; ++i) {
        const SamplePairSet pairs =
            extract_patch(st, row, col, kCorrelationPatch, *refs.spectral[i]);
        const double a = std::abs(pearson_corr(pairs));
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

// ============================================================================
// Prediction modes
// ============================================================================

// Per-pixel inter-band prediction. Every pixel selects a reference band,
// fits an affine model on its 3x3 patch and predicts from the co-located
// spectral sample; the predicted pixel immediately becomes support for the
// pixels that follow in processing order. A starved patch (< 2 pairs) copies
// the co-located sample of the selected band.
inline SampleBlock predict_pel_recursive(int x0, int y0, int n,
                                         const BoundarySamples& boundary,
                                         const ReferenceSet& refs, int bit_depth) {
    BlockPredictionState st(x0, y0, n, boundary);
    for (const auto& [row, col] : processing_order(n)) {
        const int slot = select_reference_band(st, row, col, refs);
        const Plane& s_plane = *refs.spectral[slot];
        const Sample s_centre = s_plane.at(y0 + row, x0 + col);
        const SamplePairSet pairs = extract_patch(st, row, col, kRegressionPatch, s_plane);
        Sample p;
        if (pairs.size() < 2) {
            p = s_centre;
        } else {
            p = predict_value(fit_affine(pairs), s_centre, bit_depth);
        }
        st.pred.at(row, col) = p;
        st.done[static_cast<std::size_t>(row) * n + col] = true;
    }
    return st.pred;
}

// Block-wise inter-band prediction: one model per block, estimated from all
// 2N+3 boundary pixels and their co-located spectral samples.
inline SampleBlock predict_blockwise(int x0, int y0, int n,
                                     const BoundarySamples& boundary,
                                     const ReferenceSet& refs, int bit_depth) {
    // Boundary positions in scan order; pairs restricted to in-image s.
    std::vector<std::pair<int, int>> positions;
    positions.reserve(static_cast<std::size_t>(2 * n + 3));
    for (int row = n; row >= 0; --row) positions.emplace_back(row, -1);
    for (int col = -1; col <= n; ++col) positions.emplace_back(-1, col);

    const Plane& probe = *refs.spectral[0];
    SamplePairSet base;
    for (const auto& [row, col] : positions) {
        if (!probe.contains(y0 + row, x0 + col)) continue;
        base.add(boundary.at(row, col), 0);
    }

    auto pairs_for = [&](const Plane& s_plane) {
        SamplePairSet pairs;
        for (const auto& [row, col] : positions) {
            if (!s_plane.contains(y0 + row, x0 + col)) continue;
            pairs.add(boundary.at(row, col), s_plane.at(y0 + row, x0 + col));
        }
        return pairs;
    };

    int slot = 0;
    if (base.size() >= 2) {
        double best_abs = -1.0;
        for (int i = 0; i < 3; ++i) {
            const double a = std::abs(pearson_corr(pairs_for(*refs.spectral[i])));
            if (a > best_abs) {
                best_abs = a;
                slot = i;
            }
        }
    }

    AffineModel model{0.0, 0.0};
    const SamplePairSet pairs = pairs_for(*refs.spectral[slot]);
    if (pairs.size() >= 2) {
        model = fit_affine(pairs);
    } else {
        // No usable boundary pairs: constant prediction at the filled
        // boundary mean.
        double sum = 0.0;
        for (int row = n; row >= 0; --row) sum += boundary.at(row, -1);
        for (int col = -1; col <= n; ++col) sum += boundary.at(-1, col);
        model.beta = sum / static_cast<double>(2 * n + 3);
    }

    const Plane& s_plane = *refs.spectral[slot];
    SampleBlock out(n);
    for (int row = 0; row < n; ++row)
        for (int col = 0; col < n; ++col)
            out.at(row, col) = predict_value(model, s_plane.at(y0 + row, x0 + col), bit_depth);
    return out;
}

// Direct mode: the co-located block of one spectral reference channel.
inline SampleBlock predict_direct(int x0, int y0, int n, const ReferenceSet& refs,
                                  int channel) {
    const Plane& s_plane = *refs.spectral[channel];
    SampleBlock out(n);
    for (int row = 0; row < n; ++row)
        for (int col = 0; col < n; ++col) out.at(row, col) = s_plane.at(y0 + row, x0 + col);
    return out;
}

// Reduced intra set: DC, planar, horizontal, vertical.
inline SampleBlock predict_intra(const BoundarySamples& b, PredMode mode, int bit_depth) {
    const int n = b.n;
    SampleBlock out(n);
    switch (mode) {
        case PredMode::IntraDC: {
            std::int64_t sum = 0;
            for (int col = 0; col < n; ++col) sum += b.at(-1, col);
            for (int row = 0; row < n; ++row) sum += b.at(row, -1);
            const Sample dc = clamp_sample(
                round_half_away(static_cast<double>(sum) / (2.0 * n)), bit_depth);
            for (int i = 0; i < n * n; ++i) out.v[static_cast<std::size_t>(i)] = dc;
            break;
        }
        case PredMode::IntraHorizontal:
            for (int row = 0; row < n; ++row)
                for (int col = 0; col < n; ++col) out.at(row, col) = b.at(row, -1);
            break;
        case PredMode::IntraVertical:
            for (int row = 0; row < n; ++row)
                for (int col = 0; col < n; ++col) out.at(row, col) = b.at(-1, col);
            break;
        case PredMode::IntraPlanar: {
            // Bilinear blend toward the top-right and bottom-left extensions.
            const int shift = ceil_log2(static_cast<std::uint64_t>(n)) + 1;
            const Sample top_right = b.at(-1, n);
            const Sample bottom_left = b.at(n, -1);
            for (int row = 0; row < n; ++row) {
                for (int col = 0; col < n; ++col) {
                    const std::int64_t horiz =
                        static_cast<std::int64_t>(n - 1 - col) * b.at(row, -1) +
                        static_cast<std::int64_t>(col + 1) * top_right;
                    const std::int64_t vert =
                        static_cast<std::int64_t>(n - 1 - row) * b.at(-1, col) +
                        static_cast<std::int64_t>(row + 1) * bottom_left;
                    out.at(row, col) = static_cast<Sample>((horiz + vert + n) >> shift);
                }
            }
            break;
        }
        default:
            throw std::invalid_argument("predict_intra: not an intra mode");
    }
    return out;
}

// Dispatch over the full candidate set. Inter-band modes require a complete
// reference set.
inline SampleBlock predict_block(PredMode mode, int x0, int y0, int n,
                                 const BoundarySamples& boundary,
                                 const ReferenceSet* refs, int bit_depth) {
    switch (mode) {
        case PredMode::IntraDC:
        case PredMode::IntraPlanar:
        case PredMode::IntraHorizontal:
        case PredMode::IntraVertical:
            return predict_intra(boundary, mode, bit_depth);
        case PredMode::Direct1:
        case PredMode::Direct2:
        case PredMode::Direct3:
            return predict_direct(x0, y0, n, *refs,
                                  static_cast<int>(mode) - static_cast<int>(PredMode::Direct1));
        case PredMode::PelRecursive:
            return predict_pel_recursive(x0, y0, n, boundary, *refs, bit_depth);
        case PredMode::BlockWise:
            return predict_blockwise(x0, y0, n, boundary, *refs, bit_depth);
    }
    throw std::invalid_argument("unknown prediction mode");
}

}  // namespace prbp

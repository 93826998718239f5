#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "prbp/bitstream.hpp"
#include "prbp/cube_io.hpp"
#include "prbp/metrics.hpp"
#include "prbp/plane.hpp"
#include "prbp/predictors.hpp"
#include "prbp/transform.hpp"

namespace prbp {

inline constexpr int kSuperblockSize = 32;

// HM-style exchange rate between bits and squared error.
inline double lambda_of_qp(int qp) {
    if (qp < kMinQp || qp > kMaxQp) throw std::invalid_argument("qp out of range [0,51]");
    return 0.85 * std::exp2((qp - 12) / 3.0);
}

// Distortion plus lambda-weighted rate; the criterion for mode and split
// decisions.
struct RDCost {
    double distortion = 0.0;
    double rate = 0.0;  // bits
    double lambda = 0.0;

    double cost() const { return distortion + lambda * rate; }
};

// Index of the strictly cheapest candidate; the first one wins ties.
inline std::size_t pick_best(const std::vector<RDCost>& candidates) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i].cost() < candidates[best].cost()) best = i;
    return best;
}

// ============================================================================
// Band plan: coding order and reference management
// ============================================================================

struct BandPlan {
    std::vector<int> order;  // coded position -> original band index
    bool inter_band_enabled = false;
    bool ordering_enabled = false;
    int anchor_band = 2;
};

// Coding order: the first three bands are coded independently in original
// order; the remaining bands are sorted ascending by SSIM against the anchor
// band, ties broken by original index. Ordering needs at least four bands and
// images large enough for the SSIM window.
inline BandPlan order_bands(const SpectralCube& cube, int anchor_band,
                            bool enable_ordering = true, bool intra_only = false) {
    const int nb = cube.band_count();
    if (anchor_band < 0 || anchor_band >= nb)
        throw std::invalid_argument("anchor band out of range");
    BandPlan plan;
    plan.anchor_band = anchor_band;
    plan.inter_band_enabled = !intra_only && nb >= 4;
    plan.ordering_enabled = plan.inter_band_enabled && enable_ordering &&
                            cube.width >= kSsimWindow && cube.height >= kSsimWindow;
    plan.order.resize(nb);
    std::iota(plan.order.begin(), plan.order.end(), 0);
    if (!plan.ordering_enabled) return plan;

    std::vector<std::pair<double, int>> rest;
    rest.reserve(static_cast<std::size_t>(nb) - 3);
    for (int b = 3; b < nb; ++b)
        rest.emplace_back(ssim(cube.band(b), cube.band(anchor_band)), b);
    std::sort(rest.begin(), rest.end());
    for (std::size_t i = 0; i < rest.size(); ++i) plan.order[i + 3] = rest[i].second;
    return plan;
}

// Reference slot to evict when `just_coded` enters a full window: the slot
// with the lowest SSIM against the just-coded reconstruction; ties (and
// images too small for SSIM) evict the oldest slot.
inline int select_replacement_slot(const std::array<Plane, 3>& refs,
                                   const std::array<int, 3>& age,
                                   const Plane& just_coded) {
    const bool can_ssim =
        just_coded.width >= kSsimWindow && just_coded.height >= kSsimWindow;
    int victim = 0;
    double victim_sim = can_ssim ? ssim(refs[0], just_coded) : 0.0;
    for (int i = 1; i < 3; ++i) {
        const double sim = can_ssim ? ssim(refs[i], just_coded) : 0.0;
        if (sim < victim_sim || (sim == victim_sim && age[i] < age[victim])) {
            victim = i;
            victim_sim = sim;
        }
    }
    return victim;
}

namespace detail {

// Sliding window of the three most useful reconstructed bands. Decoder and
// encoder run the identical update rule on identical reconstructions.
struct SlidingReferences {
    std::array<Plane, 3> planes{};
    std::array<int, 3> age{};
    std::array<int, 3> original_band{-1, -1, -1};
    int count = 0;

    bool ready() const { return count >= 3; }

    void push(Plane recon, int coded_seq, int original) {
        if (count < 3) {
            planes[static_cast<std::size_t>(count)] = std::move(recon);
            age[static_cast<std::size_t>(count)] = coded_seq;
            original_band[static_cast<std::size_t>(count)] = original;
            ++count;
            return;
        }
        const int victim = select_replacement_slot(planes, age, recon);
        planes[static_cast<std::size_t>(victim)] = std::move(recon);
        age[static_cast<std::size_t>(victim)] = coded_seq;
        original_band[static_cast<std::size_t>(victim)] = original;
    }
};

}  // namespace detail

// ============================================================================
// Quadtree nodes and statistics
// ============================================================================

struct BlockNode {
    int x = 0;
    int y = 0;
    int n = 0;
    bool split = false;
    PredMode mode = PredMode::IntraDC;
    CoeffBlock coeffs;
    std::vector<BlockNode> children;

    // RD audit trail filled by the encoder: cost of every evaluated candidate
    // and of the adopted one.
    std::array<double, kModeCount> candidate_cost{};
    int candidate_count = 0;
    double chosen_cost = 0.0;
};

struct ModeStats {
    struct Band {
        int original_band = 0;
        bool refs_available = false;
        std::array<int, 3> reference_bands{-1, -1, -1};  // original indices
        std::array<std::uint64_t, kModeCount> mode_counts{};
        std::uint64_t leaves = 0;
        std::uint64_t inter_leaves = 0;
        std::uint64_t bits = 0;  // payload bits of this band's quadtrees
        double psnr = 0.0;
    };

    std::vector<Band> bands;  // coded order

    // Fraction of leaf blocks using an inter-band mode, over the bands where
    // inter-band candidates were available.
    double inter_band_share() const {
        std::uint64_t leaves = 0, inter = 0;
        for (const Band& b : bands) {
            if (!b.refs_available) continue;
            leaves += b.leaves;
            inter += b.inter_leaves;
        }
        return leaves == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(leaves);
    }
};

struct EncodeOptions {
    int qp = 22;
    bool intra_only = false;
    bool enable_ordering = true;
    int anchor_band = 2;
};

struct EncodeResult {
    std::vector<std::uint8_t> stream;
    StreamHeader header;
    ModeStats stats;
    SpectralCube reconstruction;  // original band order; equals decoder output
};

// ============================================================================
// Per-band coding (shared state layout for encoder and decoder)
// ============================================================================

namespace detail {

struct BandState {
    Plane recon;
    CausalMask mask;

    BandState(int w, int h, int depth)
        : recon(w, h, depth, mid_sample(depth)), mask(w, h) {}
};

struct RegionSnapshot {
    int x, y, w, h;
    std::vector<Sample> recon;
    std::vector<std::uint8_t> mask;
};

inline RegionSnapshot save_region(const BandState& st, int x0, int y0, int n) {
    RegionSnapshot s;
    s.x = x0;
    s.y = y0;
    s.w = std::min(n, st.recon.width - x0);
    s.h = std::min(n, st.recon.height - y0);
    s.recon.reserve(static_cast<std::size_t>(s.w) * s.h);
    s.mask.reserve(static_cast<std::size_t>(s.w) * s.h);
    for (int r = 0; r < s.h; ++r) {
        for (int c = 0; c < s.w; ++c) {
            s.recon.push_back(st.recon.at(y0 + r, x0 + c));
            s.mask.push_back(st.mask.coded[static_cast<std::size_t>(y0 + r) * st.mask.width + x0 + c]);
        }
    }
    return s;
}

inline void restore_region(BandState& st, const RegionSnapshot& s) {
    std::size_t i = 0;
    for (int r = 0; r < s.h; ++r) {
        for (int c = 0; c < s.w; ++c, ++i) {
            st.recon.at(s.y + r, s.x + c) = s.recon[i];
            st.mask.coded[static_cast<std::size_t>(s.y + r) * st.mask.width + s.x + c] = s.mask[i];
        }
    }
}

inline SampleBlock copy_block(const Plane& plane, int x0, int y0, int n) {
    SampleBlock b(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) b.at(r, c) = plane.at(y0 + r, x0 + c);
    return b;
}

inline void paste_block(Plane& plane, const SampleBlock& b, int x0, int y0) {
    for (int r = 0; r < b.n; ++r)
        for (int c = 0; c < b.n; ++c) plane.at(y0 + r, x0 + c) = b.at(r, c);
}

inline std::int64_t sse_block(const SampleBlock& a, const SampleBlock& b) {
    std::int64_t acc = 0;
    for (int i = 0; i < a.n * a.n; ++i) {
        const std::int64_t d = a.v[static_cast<std::size_t>(i)] - b.v[static_cast<std::size_t>(i)];
        acc += d * d;
    }
    return acc;
}

// One band's encoder: exhaustive mode evaluation per leaf plus the
// leaf-versus-split decision, recursing down to 4x4.
class BandEncoder {
public:
    BandEncoder(const Plane& orig, BandState& st, const ReferenceSet* refs, int qp,
                double lambda)
        : orig_(orig), st_(st), refs_(refs), qp_(qp), lambda_(lambda) {}

    struct NodeResult {
        BlockNode node;
        double cost = 0.0;
        std::uint64_t bits = 0;
        std::int64_t dist = 0;
        SampleBlock rec;  // leaf reconstruction (unused for split nodes)
    };

    NodeResult encode_node(int x0, int y0, int n) {
        const int w = orig_.width;
        const int h = orig_.height;
        const bool fits = x0 + n <= w && y0 + n <= h;

        NodeResult leaf;
        double leaf_cost = std::numeric_limits<double>::infinity();
        if (fits) {
            leaf = evaluate_leaf(x0, y0, n);
            leaf_cost = leaf.cost;
        }

        if (n > kMinBlockSize) {
            RegionSnapshot snap;
            if (fits) snap = save_region(st_, x0, y0, n);
            NodeResult split;
            split.node.x = x0;
            split.node.y = y0;
            split.node.n = n;
            split.node.split = true;
            const std::uint64_t flag_bits = fits ? 1 : 0;
            split.bits = flag_bits;
            split.cost = lambda_ * static_cast<double>(flag_bits);
            const int half = n / 2;
            const int cx[4] = {x0, x0 + half, x0, x0 + half};
            const int cy[4] = {y0, y0, y0 + half, y0 + half};
            for (int i = 0; i < 4; ++i) {
                if (cx[i] >= w || cy[i] >= h) continue;  // fully outside
                NodeResult child = encode_node(cx[i], cy[i], half);
                split.cost += child.cost;
                split.bits += child.bits;
                split.dist += child.dist;
                split.node.children.push_back(std::move(child.node));
            }
            if (!fits || split.cost < leaf_cost) return split;
            restore_region(st_, snap);
        }

        commit_leaf(leaf);
        return leaf;
    }

private:
    NodeResult evaluate_leaf(int x0, int y0, int n) {
        const int depth = orig_.bit_depth;
        const BoundarySamples boundary = build_boundary(x0, y0, n, st_.recon, st_.mask);
        const SampleBlock orig_block = copy_block(orig_, x0, y0, n);
        const bool inter = refs_ != nullptr;
        const int mode_count = inter ? kModeCount : kIntraModeCount;
        const std::uint64_t flag_bits = n > kMinBlockSize ? 1 : 0;

        NodeResult best;
        best.node.x = x0;
        best.node.y = y0;
        best.node.n = n;
        best.node.candidate_count = mode_count;
        best.cost = std::numeric_limits<double>::infinity();
        best.rec = SampleBlock(n);

        for (int m = 0; m < mode_count; ++m) {
            const auto mode = static_cast<PredMode>(m);
            const SampleBlock pred = predict_block(mode, x0, y0, n, boundary, refs_, depth);
            SampleBlock resid(n);
            for (int i = 0; i < n * n; ++i)
                resid.v[static_cast<std::size_t>(i)] =
                    orig_block.v[static_cast<std::size_t>(i)] - pred.v[static_cast<std::size_t>(i)];
            const CoeffBlock coeffs = quantize(dct2(resid), qp_);
            const SampleBlock rec = reconstruct(pred, idct2(dequantize(coeffs)), depth);

            BitWriter counter;
            write_mode(counter, mode, inter);
            write_coefficients(counter, coeffs);

            RDCost rd{static_cast<double>(sse_block(orig_block, rec)),
                      static_cast<double>(counter.bit_count() + flag_bits), lambda_};
            const double cost = rd.cost();
            best.node.candidate_cost[static_cast<std::size_t>(m)] = cost;
            if (cost < best.cost) {
                best.cost = cost;
                best.dist = static_cast<std::int64_t>(rd.distortion);
                best.bits = counter.bit_count() + flag_bits;
                best.node.mode = mode;
                best.node.coeffs = coeffs;
                best.rec = rec;
            }
        }
        best.node.chosen_cost = best.cost;
        return best;
    }

    void commit_leaf(const NodeResult& leaf) {
        paste_block(st_.recon, leaf.rec, leaf.node.x, leaf.node.y);
        st_.mask.mark_block(leaf.node.x, leaf.node.y, leaf.node.n);
    }

    const Plane& orig_;
    BandState& st_;
    const ReferenceSet* refs_;
    int qp_;
    double lambda_;
};

// Serializes a decided quadtree; mirrors the decoder's traversal exactly.
inline void write_node(BitWriter& bw, const BlockNode& node, bool inter, int w, int h) {
    const bool fits = node.x + node.n <= w && node.y + node.n <= h;
    if (node.n > kMinBlockSize && fits) bw.put_bit(node.split ? 1 : 0);
    if (node.split) {
        for (const BlockNode& child : node.children) write_node(bw, child, inter, w, h);
        return;
    }
    write_mode(bw, node.mode, inter);
    write_coefficients(bw, node.coeffs);
}

inline void tally_leaves(const BlockNode& node, ModeStats::Band& band) {
    if (node.split) {
        for (const BlockNode& child : node.children) tally_leaves(child, band);
        return;
    }
    band.mode_counts[static_cast<std::size_t>(node.mode)] += 1;
    band.leaves += 1;
    if (is_inter_band(node.mode)) band.inter_leaves += 1;
}

// Decoder-side traversal: reads the structure the encoder wrote and rebuilds
// the identical reconstruction.
inline void decode_node(BitReader& br, BandState& st, const ReferenceSet* refs, int x0,
                        int y0, int n, int qp, int depth) {
    const int w = st.recon.width;
    const int h = st.recon.height;
    if (x0 >= w || y0 >= h) return;
    const bool fits = x0 + n <= w && y0 + n <= h;
    bool split = false;
    if (!fits) {
        split = true;  // forced, never signalled
    } else if (n > kMinBlockSize) {
        split = br.get_bit() != 0;
    }
    if (split) {
        const int half = n / 2;
        decode_node(br, st, refs, x0, y0, half, qp, depth);
        decode_node(br, st, refs, x0 + half, y0, half, qp, depth);
        decode_node(br, st, refs, x0, y0 + half, half, qp, depth);
        decode_node(br, st, refs, x0 + half, y0 + half, half, qp, depth);
        return;
    }
    const PredMode mode = read_mode(br, refs != nullptr);
    const CoeffBlock coeffs = read_coefficients(br, n, qp);
    const BoundarySamples boundary = build_boundary(x0, y0, n, st.recon, st.mask);
    const SampleBlock pred = predict_block(mode, x0, y0, n, boundary, refs, depth);
    const SampleBlock rec = reconstruct(pred, idct2(dequantize(coeffs)), depth);
    paste_block(st.recon, rec, x0, y0);
    st.mask.mark_block(x0, y0, n);
}

}  // namespace detail

// ============================================================================
// Cube-level encode / decode
// ============================================================================

inline void validate_codec_input(const SpectralCube& cube, int qp) {
    if (!cube.valid()) throw std::invalid_argument("invalid cube");
    if (cube.width % 4 != 0 || cube.height % 4 != 0)
        throw std::invalid_argument("image dimensions must be multiples of 4");
    if (qp < kMinQp || qp > kMaxQp) throw std::invalid_argument("qp out of range [0,51]");
}

inline EncodeResult encode_cube(const SpectralCube& cube, const EncodeOptions& opt) {
    validate_codec_input(cube, opt.qp);
    const BandPlan plan =
        order_bands(cube, opt.anchor_band, opt.enable_ordering, opt.intra_only);
    const double lambda = lambda_of_qp(opt.qp);
    const int nb = cube.band_count();

    EncodeResult result;
    result.header.width = static_cast<std::uint32_t>(cube.width);
    result.header.height = static_cast<std::uint32_t>(cube.height);
    result.header.bands = static_cast<std::uint32_t>(nb);
    result.header.bit_depth = static_cast<std::uint32_t>(cube.bit_depth);
    result.header.qp = static_cast<std::uint32_t>(opt.qp);
    result.header.inter_band_enabled = plan.inter_band_enabled;
    result.header.ordering_enabled = plan.ordering_enabled;
    result.header.anchor_band = static_cast<std::uint32_t>(plan.anchor_band);
    result.header.band_order.assign(plan.order.begin(), plan.order.end());

    BitWriter bw;
    write_header(bw, result.header);

    result.reconstruction = SpectralCube(cube.width, cube.height, nb, cube.bit_depth);
    detail::SlidingReferences sliding;

    for (int k = 0; k < nb; ++k) {
        const int original = plan.order[static_cast<std::size_t>(k)];
        const Plane& orig = cube.band(original);
        const bool use_refs = plan.inter_band_enabled && k >= 3 && sliding.ready();

        detail::BandState st(cube.width, cube.height, cube.bit_depth);
        ReferenceSet refs;
        if (use_refs) {
            for (int i = 0; i < 3; ++i) refs.spectral[static_cast<std::size_t>(i)] = &sliding.planes[static_cast<std::size_t>(i)];
            refs.current_recon = &st.recon;
            refs.validity = &st.mask;
        }

        detail::BandEncoder enc(orig, st, use_refs ? &refs : nullptr, opt.qp, lambda);
        std::vector<BlockNode> trees;
        for (int y0 = 0; y0 < cube.height; y0 += kSuperblockSize)
            for (int x0 = 0; x0 < cube.width; x0 += kSuperblockSize)
                trees.push_back(enc.encode_node(x0, y0, kSuperblockSize).node);

        ModeStats::Band band_stats;
        band_stats.original_band = original;
        band_stats.refs_available = use_refs;
        if (use_refs) band_stats.reference_bands = sliding.original_band;

        const std::uint64_t before = bw.bit_count();
        for (const BlockNode& tree : trees)
            detail::write_node(bw, tree, use_refs, cube.width, cube.height);
        band_stats.bits = bw.bit_count() - before;
        for (const BlockNode& tree : trees) detail::tally_leaves(tree, band_stats);
        band_stats.psnr = psnr(orig, st.recon);
        result.stats.bands.push_back(band_stats);

        result.reconstruction.band(original) = st.recon;
        if (plan.inter_band_enabled) sliding.push(std::move(st.recon), k, original);
    }

    result.stream = bw.take();
    return result;
}

// Rebuilds the cube from a stream. The output is bit-identical to the
// encoder's internal reconstruction.
inline SpectralCube decode_cube(const std::vector<std::uint8_t>& stream) {
    BitReader br(stream);
    const StreamHeader header = read_header(br);
    const int w = static_cast<int>(header.width);
    const int h = static_cast<int>(header.height);
    const int nb = static_cast<int>(header.bands);
    const int depth = static_cast<int>(header.bit_depth);
    const int qp = static_cast<int>(header.qp);
    if (w < 4 || h < 4 || w > 65536 || h > 65536 || w % 4 != 0 || h % 4 != 0)
        throw format_error("stream header dimensions invalid");
    if (!valid_bit_depth(depth)) throw format_error("stream header bit depth invalid");
    if (qp < kMinQp || qp > kMaxQp) throw format_error("stream header qp invalid");

    SpectralCube cube(w, h, nb, depth);
    detail::SlidingReferences sliding;

    for (int k = 0; k < nb; ++k) {
        const int original = static_cast<int>(header.band_order[static_cast<std::size_t>(k)]);
        const bool use_refs = header.inter_band_enabled && k >= 3 && sliding.ready();

        detail::BandState st(w, h, depth);
        ReferenceSet refs;
        if (use_refs) {
            for (int i = 0; i < 3; ++i) refs.spectral[static_cast<std::size_t>(i)] = &sliding.planes[static_cast<std::size_t>(i)];
            refs.current_recon = &st.recon;
            refs.validity = &st.mask;
        }

        for (int y0 = 0; y0 < h; y0 += kSuperblockSize)
            for (int x0 = 0; x0 < w; x0 += kSuperblockSize)
                detail::decode_node(br, st, use_refs ? &refs : nullptr, x0, y0,
                                    kSuperblockSize, qp, depth);

        cube.band(original) = st.recon;
        if (header.inter_band_enabled) sliding.push(std::move(st.recon), k, original);
    }

    if (!br.only_padding_left())
        throw format_error("trailing bits after the last coded band");
    return cube;
}

}  // namespace prbp

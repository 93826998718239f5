#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "prbp/common.hpp"

namespace prbp {

// ============================================================================
// Plane - one spectral band, row-major samples
// ============================================================================

struct Plane {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    std::vector<Sample> samples;  // samples[row * width + col]

    Plane() = default;

    Plane(int w, int h, int depth, Sample fill = 0)
        : width(w), height(h), bit_depth(depth),
          samples(static_cast<std::size_t>(w) * h, fill) {}

    Sample& at(int row, int col) {
        return samples[static_cast<std::size_t>(row) * width + col];
    }
    Sample at(int row, int col) const {
        return samples[static_cast<std::size_t>(row) * width + col];
    }

    bool contains(int row, int col) const {
        return row >= 0 && row < height && col >= 0 && col < width;
    }

    std::size_t sample_count() const {
        return static_cast<std::size_t>(width) * height;
    }

    bool in_range() const {
        const Sample hi = max_sample(bit_depth);
        for (Sample s : samples) {
            if (s < 0 || s > hi) return false;
        }
        return true;
    }

    friend bool operator==(const Plane& a, const Plane& b) = default;
};

// ============================================================================
// SpectralCube - a stack of equally shaped bands (band-major storage)
// ============================================================================

struct SpectralCube {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    std::vector<Plane> bands;

    SpectralCube() = default;

    SpectralCube(int w, int h, int nbands, int depth)
        : width(w), height(h), bit_depth(depth) {
        bands.reserve(nbands);
        for (int b = 0; b < nbands; ++b) bands.emplace_back(w, h, depth);
    }

    int band_count() const { return static_cast<int>(bands.size()); }

    Plane& band(int b) { return bands[static_cast<std::size_t>(b)]; }
    const Plane& band(int b) const { return bands[static_cast<std::size_t>(b)]; }

    std::size_t sample_count() const {
        return static_cast<std::size_t>(width) * height * bands.size();
    }

    // width/height/depth consistency across bands plus sample range.
    bool valid() const {
        if (width < 4 || height < 4 || bands.empty()) return false;
        if (!valid_bit_depth(bit_depth)) return false;
        for (const Plane& p : bands) {
            if (p.width != width || p.height != height || p.bit_depth != bit_depth)
                return false;
            if (!p.in_range()) return false;
        }
        return true;
    }

    friend bool operator==(const SpectralCube& a, const SpectralCube& b) = default;
};

}  // namespace prbp

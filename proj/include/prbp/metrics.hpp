#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "prbp/plane.hpp"

namespace prbp {

// ----------------------------------------------------------------------------
// Distortion
// ----------------------------------------------------------------------------

inline double mse(const Plane& reference, const Plane& distorted) {
    if (reference.width != distorted.width || reference.height != distorted.height)
        throw std::invalid_argument("mse: shape mismatch");
    std::int64_t sse = 0;
    for (std::size_t i = 0; i < reference.samples.size(); ++i) {
        const std::int64_t d = reference.samples[i] - distorted.samples[i];
        sse += d * d;
    }
    return static_cast<double>(sse) / static_cast<double>(reference.sample_count());
}

// PSNR in dB against the bit-depth maximum. Identical inputs yield +infinity,
// which rate-distortion curves must exclude.
inline double psnr_from_mse(double mean_sq, int bit_depth) {
    if (mean_sq <= 0.0) return std::numeric_limits<double>::infinity();
    const double peak = static_cast<double>(max_sample(bit_depth));
    return 10.0 * std::log10(peak * peak / mean_sq);
}

inline double psnr(const Plane& reference, const Plane& distorted) {
    if (reference.bit_depth != distorted.bit_depth)
        throw std::invalid_argument("psnr: bit depth mismatch");
    return psnr_from_mse(mse(reference, distorted), reference.bit_depth);
}

// Cube-level PSNR aggregates MSE over all bands before taking the log.
inline double psnr(const SpectralCube& reference, const SpectralCube& distorted) {
    if (reference.width != distorted.width || reference.height != distorted.height ||
        reference.band_count() != distorted.band_count() ||
        reference.bit_depth != distorted.bit_depth)
        throw std::invalid_argument("psnr: cube shape mismatch");
    double total = 0.0;
    for (int b = 0; b < reference.band_count(); ++b)
        total += mse(reference.band(b), distorted.band(b));
    return psnr_from_mse(total / reference.band_count(), reference.bit_depth);
}

// ----------------------------------------------------------------------------
// SSIM: uniform 8x8 sliding window, stride 1
// ----------------------------------------------------------------------------

inline constexpr int kSsimWindow = 8;

inline double ssim(const Plane& a, const Plane& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ssim: shape mismatch");
    if (a.bit_depth != b.bit_depth)
        throw std::invalid_argument("ssim: bit depth mismatch");
    if (a.width < kSsimWindow || a.height < kSsimWindow)
        throw std::invalid_argument("ssim: image smaller than window");

    const double peak = static_cast<double>(max_sample(a.bit_depth));
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    constexpr double inv_n = 1.0 / (kSsimWindow * kSsimWindow);

    double total = 0.0;
    std::int64_t windows = 0;
    for (int y = 0; y + kSsimWindow <= a.height; ++y) {
        for (int x = 0; x + kSsimWindow <= a.width; ++x) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (int r = 0; r < kSsimWindow; ++r) {
                for (int c = 0; c < kSsimWindow; ++c) {
                    const double va = a.at(y + r, x + c);
                    const double vb = b.at(y + r, x + c);
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                }
            }
            const double mu_a = sa * inv_n;
            const double mu_b = sb * inv_n;
            const double var_a = saa * inv_n - mu_a * mu_a;
            const double var_b = sbb * inv_n - mu_b * mu_b;
            const double cov = sab * inv_n - mu_a * mu_b;
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

// ----------------------------------------------------------------------------
// Rate-distortion curves
// ----------------------------------------------------------------------------

struct RDPoint {
    double rate = 0.0;  // bits per pixel per band
    double psnr = 0.0;  // dB
};

// Validated curve: >= 4 points, strictly increasing both in rate and PSNR.
struct RDCurve {
    std::vector<RDPoint> points;

    explicit RDCurve(std::vector<RDPoint> pts) : points(std::move(pts)) {
        if (points.size() < 4)
            throw std::invalid_argument("RDCurve needs at least 4 points");
        for (const RDPoint& p : points) {
            if (!(p.rate > 0.0) || !std::isfinite(p.psnr))
                throw std::invalid_argument("RDCurve: rate must be positive and psnr finite");
        }
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (!(points[i].rate > points[i - 1].rate) ||
                !(points[i].psnr > points[i - 1].psnr))
                throw std::invalid_argument("RDCurve: points must increase strictly in rate and psnr");
        }
    }
};

namespace detail {

// Shape-preserving piecewise-cubic Hermite interpolant (Fritsch-Carlson
// slopes with three-point boundary estimates).
struct Pchip {
    std::vector<double> x, y, d;

    Pchip(const std::vector<double>& xs, const std::vector<double>& ys) : x(xs), y(ys) {
        const std::size_t n = x.size();
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x[k + 1] - x[k];
            delta[k] = (y[k + 1] - y[k]) / h[k];
        }
        d.assign(n, 0.0);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (delta[k - 1] * delta[k] <= 0.0) {
                d[k] = 0.0;
            } else {
                const double w1 = 2 * h[k] + h[k - 1];
                const double w2 = h[k] + 2 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    static double edge_slope(double h0, double h1, double d0, double d1) {
        double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return s;
    }

    // Polynomial coefficients on segment k in the local variable s = t - x[k].
    void segment_coeffs(std::size_t k, double (&c)[4]) const {
        const double h = x[k + 1] - x[k];
        const double m = (y[k + 1] - y[k]) / h;
        c[0] = y[k];
        c[1] = d[k];
        c[2] = (3 * m - 2 * d[k] - d[k + 1]) / h;
        c[3] = (d[k] + d[k + 1] - 2 * m) / (h * h);
    }

    double eval(double t) const {
        std::size_t k = 0;
        while (k + 2 < x.size() && t > x[k + 1]) ++k;
        double c[4];
        segment_coeffs(k, c);
        const double s = t - x[k];
        return c[0] + s * (c[1] + s * (c[2] + s * c[3]));
    }

    // Exact integral over [a, b] (closed-form per segment).
    double integrate(double a, double b) const {
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < x.size(); ++k) {
            const double lo = std::max(a, x[k]);
            const double hi = std::min(b, x[k + 1]);
            if (hi <= lo) continue;
            double c[4];
            segment_coeffs(k, c);
            auto anti = [&](double t) {
                const double s = t - x[k];
                return s * (c[0] + s * (c[1] / 2 + s * (c[2] / 3 + s * c[3] / 4)));
            };
            total += anti(hi) - anti(lo);
        }
        return total;
    }
};

}  // namespace detail

// Bjontegaard delta rate of `test` against `reference`, in percent; negative
// values mean the test curve needs less rate at equal quality. log10(rate) is
// interpolated over PSNR with a monotone piecewise cubic and the average
// log-rate gap is taken over the common PSNR interval.
inline double bd_rate(const RDCurve& reference, const RDCurve& test) {
    auto log_rates = [](const RDCurve& c) {
        std::vector<double> xs, ys;
        for (const RDPoint& p : c.points) {
            xs.push_back(p.psnr);
            ys.push_back(std::log10(p.rate));
        }
        return std::pair{xs, ys};
    };
    const auto [xr, yr] = log_rates(reference);
    const auto [xt, yt] = log_rates(test);

    const double lo = std::max(xr.front(), xt.front());
    const double hi = std::min(xr.back(), xt.back());
    if (!(hi > lo)) throw std::invalid_argument("bd_rate: curves do not overlap in PSNR");

    const detail::Pchip ref_curve(xr, yr);
    const detail::Pchip test_curve(xt, yt);
    const double avg_diff = (test_curve.integrate(lo, hi) - ref_curve.integrate(lo, hi)) / (hi - lo);
    return (std::pow(10.0, avg_diff) - 1.0) * 100.0;
}

// Bits per pixel per band for a payload of `stream_bytes` bytes.
inline double bpppb(std::size_t stream_bytes, int width, int height, int bands) {
    return static_cast<double>(stream_bytes) * 8.0 /
           (static_cast<double>(width) * height * bands);
}

}  // namespace prbp

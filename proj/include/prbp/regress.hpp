#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "prbp/common.hpp"

namespace prbp {

// Paired samples drawn at identical positions from a spectral reference (s)
// and the current band's reference (r).
struct SamplePairSet {
    std::vector<Sample> r_values;
    std::vector<Sample> s_values;

    std::size_t size() const { return r_values.size(); }

    void add(Sample r, Sample s) {
        r_values.push_back(r);
        s_values.push_back(s);
    }

    void clear() {
        r_values.clear();
        s_values.clear();
    }
};

// Affine prediction model r ~ alpha * s + beta.
struct AffineModel {
    double alpha = 0.0;
    double beta = 0.0;
};

namespace detail {

struct PairMoments {
    double n = 0, sum_r = 0, sum_s = 0, sum_rr = 0, sum_ss = 0, sum_rs = 0;
};

// Raw power sums. Samples are integers well below 2^26, so for the patch
// sizes used here every sum is integer-exact in double.
inline PairMoments moments(const SamplePairSet& pairs) {
    PairMoments m;
    m.n = static_cast<double>(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double r = pairs.r_values[i];
        const double s = pairs.s_values[i];
        m.sum_r += r;
        m.sum_s += s;
        m.sum_rr += r * r;
        m.sum_ss += s * s;
        m.sum_rs += r * s;
    }
    return m;
}

}  // namespace detail

// Pearson correlation coefficient of the paired samples. If either vector has
// zero variance there is no linear evidence and 0 is returned.
inline double pearson_corr(const SamplePairSet& pairs) {
    if (pairs.size() < 2)
        throw insufficient_support("pearson_corr needs at least 2 pairs");
    const auto m = detail::moments(pairs);
    const double var_r = m.n * m.sum_rr - m.sum_r * m.sum_r;
    const double var_s = m.n * m.sum_ss - m.sum_s * m.sum_s;
    if (var_r <= 0.0 || var_s <= 0.0) return 0.0;
    const double cov = m.n * m.sum_rs - m.sum_r * m.sum_s;
    return std::clamp(cov / std::sqrt(var_r * var_s), -1.0, 1.0);
}

// Least-squares fit of r ~ alpha * s + beta (normal equations). Degenerate
// s-variance falls back to the constant model alpha=0, beta=mean(r).
inline AffineModel fit_affine(const SamplePairSet& pairs) {
    if (pairs.size() < 2)
        throw insufficient_support("fit_affine needs at least 2 pairs");
    const auto m = detail::moments(pairs);
    const double var_s = m.n * m.sum_ss - m.sum_s * m.sum_s;
    if (var_s <= 0.0) return {0.0, m.sum_r / m.n};
    const double alpha = (m.n * m.sum_rs - m.sum_r * m.sum_s) / var_s;
    const double beta = (m.sum_r - alpha * m.sum_s) / m.n;
    return {alpha, beta};
}

// Prediction value: round(alpha * s + beta) clamped to the sample range.
// Rounding is half away from zero, matching the codec-wide convention.
inline Sample predict_value(const AffineModel& model, Sample s_value, int bit_depth) {
    const double p = model.alpha * static_cast<double>(s_value) + model.beta;
    return clamp_sample(round_half_away(p), bit_depth);
}

}  // namespace prbp

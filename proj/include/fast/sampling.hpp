#pragma once

#include <array>
#include <cmath>

#include "fast/plane.hpp"

namespace fast {

/// Keys cubic convolution kernel. a = -0.5 is Catmull-Rom.
struct CubicKernel {
    double a = -0.5;

    double operator()(double x) const {
        x = std::abs(x);
        if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
        if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
        return 0.0;
    }

    /// Weights of the taps at floor-1, floor, floor+1, floor+2 for a position with fractional
    /// part t in [0, 1).
    std::array<double, 4> weights(double t) const {
        return {(*this)(t + 1.0), (*this)(t), (*this)(1.0 - t), (*this)(2.0 - t)};
    }
};

inline bool valid_scale(int alpha) { return alpha >= 2 && alpha <= 4; }

/// Round half away from zero, then clamp to the sample kind's range.
template <typename Sample>
Sample quantize_sample(double v) {
    const double r = std::round(v);
    if (r < SampleRange<Sample>::lo) return static_cast<Sample>(SampleRange<Sample>::lo);
    if (r > SampleRange<Sample>::hi) return static_cast<Sample>(SampleRange<Sample>::hi);
    return static_cast<Sample>(r);
}

template <typename Sample>
Plane<Sample> quantize(const RealPlane& src) {
    return src.unaryExpr([](double v) { return quantize_sample<Sample>(v); });
}

/// Separable cubic upsampling by alpha at full precision. Output sample i is taken at source
/// coordinate (i + 0.5) / alpha - 0.5; reads beyond the border replicate edge samples.
RealPlane cubic_upsample_real(const RealPlane& src, int alpha, const CubicKernel& kernel = {});

/// Box prefilter over alpha x alpha cells followed by cubic resampling at stride alpha. The LR
/// sample centres coincide with the box centres, so the cubic stage is evaluated at phase 0 and
/// the result is the cell mean.
RealPlane box_downsample_real(const RealPlane& src, int alpha);

/// The b(.) operator: alpha-times bicubic upsampling of a picture or residual plane.
template <typename Sample>
Plane<Sample> bicubic_upsample(const Plane<Sample>& src, int alpha) {
    if (!valid_scale(alpha)) throw ParameterError("upsample scale must be 2, 3 or 4");
    return quantize<Sample>(cubic_upsample_real(src.template cast<double>(), alpha));
}

/// Downsampling used to build LR/HR ground-truth pairs. Dimensions must be divisible by alpha.
template <typename Sample>
Plane<Sample> bicubic_downsample(const Plane<Sample>& src, int alpha) {
    return quantize<Sample>(box_downsample_real(src.template cast<double>(), alpha));
}

/// Motion-compensated block fetch: the w x h block whose top-left sits at (x + dx/4, y + dy/4)
/// in `ref`, interpolated with the Catmull-Rom kernel at quarter-sample phases.
PicturePlane qpel_fetch_block(const PicturePlane& ref, int x, int y, int w, int h, QuarterPelMV mv);

inline PicturePlane qpel_fetch_block(const PicturePlane& ref, const BlockRect& r, QuarterPelMV mv) {
    return qpel_fetch_block(ref, r.x, r.y, r.w, r.h, mv);
}

/// Floor division / modulo for quarter-pel splitting of negative vectors.
constexpr int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
constexpr int floor_mod(int a, int b) { return a - b * floor_div(a, b); }

}  // namespace fast

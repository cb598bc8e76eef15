#pragma once

#include <algorithm>
#include <cmath>

#include "fast/plane.hpp"

namespace fast {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(255^2 / MSE) over two equally sized regions; MSE == 0 maps to kPsnrCap.
template <typename A, typename B>
double psnr(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
    if (!same_size(a, b)) throw ParameterError("psnr operands differ in size");
    if (a.size() == 0) throw ParameterError("psnr of empty planes");
    const double mse = (a.derived().template cast<double>() - b.derived().template cast<double>()).square().mean();
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

}  // namespace fast

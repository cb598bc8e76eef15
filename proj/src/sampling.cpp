#include "fast/sampling.hpp"

#include <algorithm>
#include <vector>

namespace fast {
namespace {

struct Taps {
    std::array<int, 4> index;
    std::array<double, 4> weight;
};

// Tap positions (edge-clamped) and weights for every output sample of a x`alpha` resampling.
std::vector<Taps> upsample_taps(int src_len, int alpha, const CubicKernel& kernel) {
    std::vector<Taps> taps(static_cast<std::size_t>(src_len) * alpha);
    for (int i = 0; i < src_len * alpha; ++i) {
        const double c = (i + 0.5) / alpha - 0.5;
        const double base = std::floor(c);
        const auto w = kernel.weights(c - base);
        Taps& t = taps[i];
        for (int k = 0; k < 4; ++k) {
            t.index[k] = std::clamp(static_cast<int>(base) - 1 + k, 0, src_len - 1);
            t.weight[k] = w[k];
        }
    }
    return taps;
}

const std::array<std::array<double, 4>, 4>& quarter_phase_weights() {
    static const auto table = [] {
        std::array<std::array<double, 4>, 4> t{};
        const CubicKernel kernel;
        for (int p = 0; p < 4; ++p) t[p] = kernel.weights(p / 4.0);
        return t;
    }();
    return table;
}

}  // namespace

RealPlane cubic_upsample_real(const RealPlane& src, int alpha, const CubicKernel& kernel) {
    if (!valid_scale(alpha)) throw ParameterError("upsample scale must be 2, 3 or 4");
    const int w = width(src);
    const int h = height(src);
    if (w == 0 || h == 0) return RealPlane(h * alpha, w * alpha);

    const auto xt = upsample_taps(w, alpha, kernel);
    const auto yt = upsample_taps(h, alpha, kernel);

    RealPlane horizontal(h, w * alpha);
    for (int r = 0; r < h; ++r) {
        const double* row = src.data() + static_cast<std::ptrdiff_t>(r) * w;
        for (int c = 0; c < w * alpha; ++c) {
            const Taps& t = xt[c];
            horizontal(r, c) = t.weight[0] * row[t.index[0]] + t.weight[1] * row[t.index[1]] +
                               t.weight[2] * row[t.index[2]] + t.weight[3] * row[t.index[3]];
        }
    }

    RealPlane out(h * alpha, w * alpha);
    for (int r = 0; r < h * alpha; ++r) {
        const Taps& t = yt[r];
        out.row(r) = t.weight[0] * horizontal.row(t.index[0]) + t.weight[1] * horizontal.row(t.index[1]) +
                     t.weight[2] * horizontal.row(t.index[2]) + t.weight[3] * horizontal.row(t.index[3]);
    }
    return out;
}

RealPlane box_downsample_real(const RealPlane& src, int alpha) {
    if (!valid_scale(alpha)) throw ParameterError("downsample scale must be 2, 3 or 4");
    if (src.rows() % alpha != 0 || src.cols() % alpha != 0) {
        throw ParameterError("downsample input dimensions must be divisible by the scale");
    }
    const int w = width(src) / alpha;
    const int h = height(src) / alpha;
    RealPlane out(h, w);
    const double norm = 1.0 / (alpha * alpha);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) out(r, c) = src.block(r * alpha, c * alpha, alpha, alpha).sum() * norm;
    }
    return out;
}

PicturePlane qpel_fetch_block(const PicturePlane& ref, int x, int y, int w, int h, QuarterPelMV mv) {
    if (w <= 0 || h <= 0) throw ParameterError("fetch block dimensions must be positive");
    const int rw = width(ref);
    const int rh = height(ref);
    if (rw == 0 || rh == 0) throw ParameterError("cannot fetch from an empty plane");

    const int ix = x + floor_div(mv.dx, 4);
    const int iy = y + floor_div(mv.dy, 4);
    const int fx = floor_mod(mv.dx, 4);
    const int fy = floor_mod(mv.dy, 4);
    auto sample = [&](int r, int c) -> int {
        return ref(std::clamp(r, 0, rh - 1), std::clamp(c, 0, rw - 1));
    };

    PicturePlane out(h, w);
    if (fx == 0 && fy == 0) {
        const bool inside = ix >= 0 && iy >= 0 && ix + w <= rw && iy + h <= rh;
        if (inside) {
            out = ref.block(iy, ix, h, w);
        } else {
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) out(r, c) = static_cast<std::uint8_t>(sample(iy + r, ix + c));
        }
        return out;
    }

    const auto& table = quarter_phase_weights();
    const auto& wx = table[fx];
    const auto& wy = table[fy];

    // Horizontal pass over every row the vertical taps touch, kept at full precision.
    const int row0 = fy == 0 ? iy : iy - 1;
    const int rows = fy == 0 ? h : h + 3;
    RealPlane horizontal(rows, w);
    for (int r = 0; r < rows; ++r) {
        const int sr = row0 + r;
        for (int c = 0; c < w; ++c) {
            const int sc = ix + c;
            if (fx == 0) {
                horizontal(r, c) = sample(sr, sc);
            } else {
                horizontal(r, c) = wx[0] * sample(sr, sc - 1) + wx[1] * sample(sr, sc) +
                                   wx[2] * sample(sr, sc + 1) + wx[3] * sample(sr, sc + 2);
            }
        }
    }

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double v = fy == 0 ? horizontal(r, c)
                                     : wy[0] * horizontal(r, c) + wy[1] * horizontal(r + 1, c) +
                                           wy[2] * horizontal(r + 2, c) + wy[3] * horizontal(r + 3, c);
            out(r, c) = quantize_sample<std::uint8_t>(v);
        }
    }
    return out;
}

}  // namespace fast

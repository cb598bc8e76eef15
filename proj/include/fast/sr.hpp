#pragma once

#include <string>
#include <string_view>

#include "fast/plane.hpp"

namespace fast {

enum class SrKind { Bicubic, Ibp, External };

/// A single-image super-resolution operator.
///
/// External operators run `command --scale <alpha>` through /bin/sh, feed the LR frame as binary
/// PGM on stdin and read a binary PGM of exactly alpha times the size from stdout.
struct SrOperator {
    SrKind kind = SrKind::Ibp;
    int alpha = 2;
    std::string command;  // External only

    /// "bicubic", "ibp" or "external:<command line>".
    static SrOperator parse(std::string_view spec, int alpha);
    std::string describe() const;
};

struct IbpConfig {
    int iterations = 3;
    double step = 1.0;
};

PicturePlane apply_sr(const SrOperator& op, const PicturePlane& frame);

/// Iterative back-projection: bicubic start, then `iterations` corrections of
/// current -= step * up(down(current) - frame), clamped and rounded once at the end.
PicturePlane iterative_back_projection(const PicturePlane& frame, int alpha, const IbpConfig& cfg = {});

/// Binary PGM (P5, maxval 255) encoding: "P5\n<w> <h>\n255\n" followed by raw samples.
std::string encode_pgm(const PicturePlane& plane);

/// Accepts P5 with maxval 255 and comments in the header. Throws FormatError.
PicturePlane decode_pgm(std::string_view bytes);

}  // namespace fast

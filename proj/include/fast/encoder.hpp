#pragma once

#include <cstdint>

#include "fast/plane.hpp"

namespace fast {

enum class ResidualMode : std::uint8_t { Lossless = 0, Deadzone = 1 };

/// Motion vector accuracy the search is allowed to reach.
enum class MvPrecision { Integer, Half, Quarter };

struct EncoderConfig {
    int search_range = 16;          // integer pixels
    int max_block = 64;
    int min_block = 8;
    double split_threshold = 5.0;   // post-ME SAD per pixel
    ResidualMode residual_mode = ResidualMode::Lossless;
    int deadzone = 2;
    MvPrecision precision = MvPrecision::Quarter;

    void validate() const;
};

struct MotionResult {
    QuarterPelMV mv;
    std::int64_t sad = 0;
};

/// Sum of absolute differences between the block of `cur` at `region` and the motion-compensated
/// block of `ref`.
std::int64_t block_sad(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& region, QuarterPelMV mv);

/// Exhaustive integer search over [-range, range]^2. Ties go to the smaller |dx|+|dy|, then the
/// smaller dy, then the smaller dx.
MotionResult estimate_motion_integer(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& region,
                                     int search_range);

/// Half-pel then quarter-pel refinement around an integer vector (8 neighbours per stage; a
/// neighbour only replaces the centre on a strictly smaller SAD). `precision` truncates the
/// stages that run.
MotionResult refine_qpel(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& region,
                         const MotionResult& integer_result, MvPrecision precision = MvPrecision::Quarter);

/// SAD-threshold quadtree over 64x64 superblocks. Leaves carry their refined vectors; skip flags,
/// residual statistics and modes are left for encode_frame.
BlockPartition build_quadtree(const PicturePlane& ref, const PicturePlane& cur, const EncoderConfig& cfg);

struct EncodedFrame {
    FrameSyntax syntax;
    PicturePlane recon;
};

/// Motion-compensated prediction of `cur` from `ref`: partition, vectors, residual, skip flags and
/// the decoder-side reconstruction.
EncodedFrame encode_frame(const PicturePlane& ref, const PicturePlane& cur, const EncoderConfig& cfg,
                          int frame_index = 1);

/// Decoder side: prediction from `ref` plus the stored residual, clamped to [0, 255].
PicturePlane reconstruct_frame(const PicturePlane& ref, const FrameSyntax& syntax);

/// Chained encode of a whole sequence. Entry i holds the syntax of frame i + 1 predicted from the
/// reconstruction of frame i. `recon_out`, when given, receives all reconstructed frames
/// (frame 0 unchanged).
std::vector<FrameSyntax> encode_sequence(const std::vector<PicturePlane>& frames, const EncoderConfig& cfg,
                                         std::vector<PicturePlane>* recon_out = nullptr);

}  // namespace fast

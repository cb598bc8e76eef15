#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fast/encoder.hpp"
#include "fast/plane.hpp"

namespace fast {

struct TransferConfig {
    int alpha = 2;
    double eta = 10.0;      // mean |residual| threshold, 8-bit sample units
    bool adaptive = true;
    bool shortcuts = true;

    void validate() const;
};

/// Pixel counts are LR pixels. Histograms are keyed by nominal block size.
struct TransferStats {
    std::int64_t blocks_transferred = 0;
    std::int64_t blocks_fallback = 0;
    std::int64_t pixels_zero_mv = 0;
    std::int64_t pixels_zero_residual = 0;
    std::int64_t pixels_total = 0;
    std::map<int, std::int64_t> pixels_by_size;
    std::map<int, std::int64_t> copied_by_size;   // zero-MV pixels
    std::map<int, std::int64_t> skipped_by_size;  // zero-residual pixels

    void add_leaf(const BlockNode& leaf, TransferMode decided);
    TransferStats& operator+=(const TransferStats& other);

    friend bool operator==(const TransferStats&, const TransferStats&) = default;
};

/// Transfer is used while the block's mean |residual| stays strictly below eta.
inline bool uses_fallback(const BlockNode& leaf, const TransferConfig& cfg) {
    return cfg.adaptive && !(leaf.mean_abs_residual < cfg.eta);
}

/// One HR block (alpha*w x alpha*h): motion-compensated fetch from the previous HR frame plus the
/// bicubically upsampled residual, or the co-located crop of `bicubic_hr_cur` for fallback blocks.
PicturePlane transfer_block(const PicturePlane& prev_hr, const BlockNode& leaf, const ResidualPlane& residual,
                            const PicturePlane& bicubic_hr_cur, const TransferConfig& cfg);

struct TransferResult {
    PicturePlane hr;             // before deblocking
    TransferStats stats;
    BlockPartition decisions;    // the frame's partition with each leaf's chosen mode
};

TransferResult transfer_frame(const PicturePlane& prev_hr, const PicturePlane& cur_lr, const FrameSyntax& syntax,
                              const TransferConfig& cfg);

/// One training sample for threshold learning: mean |residual| and the block PSNR of transfer and
/// of bicubic upsampling against ground truth.
struct TrainingBlock {
    double e = 0.0;
    double psnr_transfer = 0.0;
    double psnr_bicubic = 0.0;
};

/// Sum of psnr_transfer over blocks with e < eta plus psnr_bicubic over the rest.
double threshold_objective(std::span<const TrainingBlock> blocks, double eta);

/// The eta maximising threshold_objective over {0, midpoints between consecutive distinct e,
/// max(e) + 1}; ties resolve to the smaller eta.
double learn_threshold(std::span<const TrainingBlock> blocks);

/// Downsample each HR pair, encode frame 2 from frame 1, and score transfer (from the HR source
/// frame) against bicubic for every block of frame 2.
std::vector<TrainingBlock> collect_training_blocks(std::span<const std::pair<PicturePlane, PicturePlane>> hr_pairs,
                                                   int alpha, const EncoderConfig& encoder_cfg);

}  // namespace fast

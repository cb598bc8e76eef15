#include "fast/transfer.hpp"

#include <algorithm>
#include <numeric>

#include "fast/metrics.hpp"
#include "fast/sampling.hpp"

namespace fast {
namespace {

BlockRect scaled(const BlockRect& r, int alpha) { return {r.x * alpha, r.y * alpha, r.w * alpha, r.h * alpha}; }

void check_transfer_inputs(const PicturePlane& prev_hr, const ResidualPlane& residual,
                           const PicturePlane* bicubic_hr_cur, int alpha) {
    if (prev_hr.rows() != residual.rows() * alpha || prev_hr.cols() != residual.cols() * alpha) {
        throw ParameterError("previous HR frame must be alpha times the LR frame size");
    }
    if (bicubic_hr_cur && bicubic_hr_cur->size() != 0 && !same_size(*bicubic_hr_cur, prev_hr)) {
        throw ParameterError("bicubic HR frame must match the previous HR frame size");
    }
}

PicturePlane transfer_core(const PicturePlane& prev_hr, const BlockNode& leaf, const ResidualPlane& residual,
                           const TransferConfig& cfg) {
    const int alpha = cfg.alpha;
    const BlockRect hr = scaled(leaf.rect(), alpha);
    const QuarterPelMV hr_mv = alpha * leaf.mv;

    PicturePlane predicted = (cfg.shortcuts && hr_mv.is_zero())
                                 ? PicturePlane(block_region_view(prev_hr, hr))
                                 : qpel_fetch_block(prev_hr, hr, hr_mv);
    if (cfg.shortcuts && leaf.skip) return predicted;

    const ResidualPlane lr_residual = block_region_view(residual, leaf);
    const ResidualPlane hr_residual = bicubic_upsample(lr_residual, alpha);
    return (predicted.cast<int>() + hr_residual.cast<int>()).cwiseMax(0).cwiseMin(255).cast<std::uint8_t>();
}

}  // namespace

void TransferConfig::validate() const {
    if (!valid_scale(alpha)) throw ParameterError("alpha must be 2, 3 or 4");
    if (!(eta >= 0.0)) throw ParameterError("eta must be non-negative");
}

void TransferStats::add_leaf(const BlockNode& leaf, TransferMode decided) {
    const std::int64_t px = leaf.rect().area();
    (decided == TransferMode::Transfer ? blocks_transferred : blocks_fallback) += 1;
    pixels_total += px;
    pixels_by_size[leaf.size] += px;
    if (leaf.mv.is_zero()) {
        pixels_zero_mv += px;
        copied_by_size[leaf.size] += px;
    }
    if (leaf.skip) {
        pixels_zero_residual += px;
        skipped_by_size[leaf.size] += px;
    }
}

TransferStats& TransferStats::operator+=(const TransferStats& o) {
    blocks_transferred += o.blocks_transferred;
    blocks_fallback += o.blocks_fallback;
    pixels_zero_mv += o.pixels_zero_mv;
    pixels_zero_residual += o.pixels_zero_residual;
    pixels_total += o.pixels_total;
    for (const auto& [k, v] : o.pixels_by_size) pixels_by_size[k] += v;
    for (const auto& [k, v] : o.copied_by_size) copied_by_size[k] += v;
    for (const auto& [k, v] : o.skipped_by_size) skipped_by_size[k] += v;
    return *this;
}

PicturePlane transfer_block(const PicturePlane& prev_hr, const BlockNode& leaf, const ResidualPlane& residual,
                            const PicturePlane& bicubic_hr_cur, const TransferConfig& cfg) {
    cfg.validate();
    check_transfer_inputs(prev_hr, residual, &bicubic_hr_cur, cfg.alpha);
    check_region(width(residual), height(residual), leaf.rect());
    if (uses_fallback(leaf, cfg)) {
        if (!same_size(bicubic_hr_cur, prev_hr)) throw ParameterError("fallback block needs the bicubic HR frame");
        return block_region_view(bicubic_hr_cur, scaled(leaf.rect(), cfg.alpha));
    }
    return transfer_core(prev_hr, leaf, residual, cfg);
}

TransferResult transfer_frame(const PicturePlane& prev_hr, const PicturePlane& cur_lr, const FrameSyntax& syntax,
                              const TransferConfig& cfg) {
    cfg.validate();
    const auto& part = syntax.partition;
    if (!same_size(cur_lr, syntax.residual) || width(cur_lr) != part.frame_width ||
        height(cur_lr) != part.frame_height) {
        throw ParameterError("frame syntax does not match the LR frame size");
    }
    check_transfer_inputs(prev_hr, syntax.residual, nullptr, cfg.alpha);

    TransferResult result;
    result.hr = PicturePlane(prev_hr.rows(), prev_hr.cols());
    result.decisions = part;

    const bool any_fallback =
        std::any_of(part.leaves.begin(), part.leaves.end(), [&](const BlockNode& l) { return uses_fallback(l, cfg); });
    const PicturePlane bicubic_hr_cur = any_fallback ? bicubic_upsample(cur_lr, cfg.alpha) : PicturePlane();

    for (BlockNode& leaf : result.decisions.leaves) {
        check_region(part.frame_width, part.frame_height, leaf.rect());
        const BlockRect hr = scaled(leaf.rect(), cfg.alpha);
        if (uses_fallback(leaf, cfg)) {
            leaf.mode = TransferMode::BicubicFallback;
            block_region_view(result.hr, hr) = block_region_view(bicubic_hr_cur, hr);
        } else {
            leaf.mode = TransferMode::Transfer;
            block_region_view(result.hr, hr) = transfer_core(prev_hr, leaf, syntax.residual, cfg);
        }
        result.stats.add_leaf(leaf, leaf.mode);
    }
    return result;
}

double threshold_objective(std::span<const TrainingBlock> blocks, double eta) {
    double total = 0.0;
    for (const TrainingBlock& b : blocks) total += b.e < eta ? b.psnr_transfer : b.psnr_bicubic;
    return total;
}

double learn_threshold(std::span<const TrainingBlock> blocks) {
    if (blocks.empty()) throw ParameterError("threshold learning needs at least one block");

    std::vector<TrainingBlock> sorted(blocks.begin(), blocks.end());
    std::sort(sorted.begin(), sorted.end(), [](const TrainingBlock& a, const TrainingBlock& b) { return a.e < b.e; });
    for (const TrainingBlock& b : sorted) {
        if (!(b.e >= 0.0)) throw ParameterError("residual magnitudes must be non-negative");
    }

    // Candidates in increasing order: 0, midpoints, max + 1. The gain of a candidate is the sum of
    // (transfer - bicubic) over all blocks with e below it.
    double best_eta = 0.0;
    double best_gain = 0.0;
    double gain = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double e = sorted[i].e;
        for (; i < sorted.size() && sorted[i].e == e; ++i) gain += sorted[i].psnr_transfer - sorted[i].psnr_bicubic;
        const double candidate = i < sorted.size() ? 0.5 * (e + sorted[i].e) : e + 1.0;
        if (gain > best_gain) {
            best_gain = gain;
            best_eta = candidate;
        }
    }
    return best_eta;
}

std::vector<TrainingBlock> collect_training_blocks(std::span<const std::pair<PicturePlane, PicturePlane>> hr_pairs,
                                                   int alpha, const EncoderConfig& encoder_cfg) {
    if (hr_pairs.empty()) throw ParameterError("threshold training needs at least one frame pair");
    TransferConfig cfg;
    cfg.alpha = alpha;
    cfg.adaptive = false;
    cfg.validate();

    std::vector<TrainingBlock> blocks;
    for (const auto& [source_full, target_full] : hr_pairs) {
        if (!same_size(source_full, target_full)) throw ParameterError("training pair frames differ in size");
        const int w = width(source_full) / alpha * alpha;
        const int h = height(source_full) / alpha * alpha;
        const PicturePlane source = source_full.topLeftCorner(h, w);
        const PicturePlane target = target_full.topLeftCorner(h, w);

        const PicturePlane lr_source = bicubic_downsample(source, alpha);
        const PicturePlane lr_target = bicubic_downsample(target, alpha);
        const EncodedFrame enc = encode_frame(lr_source, lr_target, encoder_cfg);
        const PicturePlane bicubic_hr = bicubic_upsample(enc.recon, alpha);

        for (const BlockNode& leaf : enc.syntax.partition.leaves) {
            const BlockRect hr = scaled(leaf.rect(), alpha);
            const auto truth = block_region_view(target, hr);
            const PicturePlane transferred = transfer_core(source, leaf, enc.syntax.residual, cfg);
            blocks.push_back({leaf.mean_abs_residual, psnr(transferred, truth),
                              psnr(block_region_view(bicubic_hr, hr), truth)});
        }
    }
    return blocks;
}

}  // namespace fast

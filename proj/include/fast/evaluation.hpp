#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fast/deblock.hpp"
#include "fast/encoder.hpp"
#include "fast/metrics.hpp"
#include "fast/plane.hpp"
#include "fast/sr.hpp"
#include "fast/transfer.hpp"

namespace fast {

struct PipelineConfig {
    int alpha = 2;
    GopConfig gop;
    SrOperator sr;
    TransferConfig transfer;
    DeblockConfig deblock;
};

/// Output of the chained FAST pipeline over a decoded LR sequence.
struct PipelineOutput {
    std::vector<PicturePlane> hr;           // final frames (deblocked)
    std::vector<PicturePlane> pre_deblock;  // transfer output; SR output on keyframes
    std::vector<BlockPartition> decisions;  // per-frame leaf modes; empty on keyframes
    std::vector<bool> keyframe;
    std::vector<double> t_sr_ms;
    std::vector<double> t_transfer_ms;
    std::vector<double> t_deblock_ms;
    TransferStats stats;
};

/// Runs SR on GOP keyframes and transfer + deblocking elsewhere. `syntax[i]` describes frame i + 1.
/// Each timed stage runs `timing_repeats` times and reports the median. When `keyframe_sr` is
/// given, its frames (and `keyframe_sr_ms`) stand in for running the operator on keyframes.
PipelineOutput run_fast_pipeline(const std::vector<PicturePlane>& lr_frames, const std::vector<FrameSyntax>& syntax,
                                 const PipelineConfig& cfg, int timing_repeats = 1,
                                 const std::vector<PicturePlane>* keyframe_sr = nullptr,
                                 const std::vector<double>* keyframe_sr_ms = nullptr);

struct FrameRecord {
    int frame_index = 0;
    double psnr_bicubic = 0.0;
    double psnr_sr = 0.0;
    double psnr_fast = 0.0;
    double t_sr_ms = 0.0;
    double t_transfer_ms = 0.0;
    double t_deblock_ms = 0.0;
};

/// Column means over the first `frames` records.
struct RecordAverage {
    int frames = 0;
    double psnr_bicubic = 0.0;
    double psnr_sr = 0.0;
    double psnr_fast = 0.0;
    double t_sr_ms = 0.0;
    double t_transfer_ms = 0.0;
    double t_deblock_ms = 0.0;
};

RecordAverage average_first(const std::vector<FrameRecord>& records, int n);

/// sum(t_sr) / (sum of t_sr over keyframes + sum(t_transfer) + sum(t_deblock)).
double compute_speedup(const std::vector<FrameRecord>& records, const GopConfig& gop);

struct ExperimentConfig {
    int alpha = 2;
    GopConfig gop;
    SrOperator sr;
    TransferConfig transfer;
    DeblockConfig deblock;
    EncoderConfig encoder;
    int timing_repeats = 3;
};

struct ExperimentReport {
    std::vector<FrameRecord> frames;
    RecordAverage avg4;
    RecordAverage avg16;
    double speedup = 0.0;
    int gop_length = 1;
    TransferStats stats;
};

/// Downsample, chained encode, then arm A (SR on every frame) against arm B (SR on keyframes,
/// transfer + deblocking elsewhere), all scored against the HR frames.
ExperimentReport run_chained_experiment(const std::vector<PicturePlane>& hr_frames, const ExperimentConfig& cfg);

struct AccuracyRow {
    MvPrecision precision;
    double psnr = 0.0;
};

/// FAST transfer of frame 2 with the motion search truncated to integer, half and quarter pel.
std::vector<AccuracyRow> run_mv_accuracy_sweep(const PicturePlane& hr1, const PicturePlane& hr2, int alpha,
                                               const SrOperator& sr, const TransferConfig& transfer = {},
                                               const EncoderConfig& encoder = {});

struct AblationRow {
    int frame_index = 0;
    double psnr_with = 0.0;
    double psnr_without = 0.0;
};

/// The chained pipeline run with and without deblocking, identical otherwise.
std::vector<AblationRow> run_deblock_ablation(const std::vector<PicturePlane>& hr_frames, const ExperimentConfig& cfg);

/// Columns: frame,psnr_bicubic,psnr_sr,psnr_fast,t_sr_ms,t_transfer_ms,t_deblock_ms; then
/// "#agg,avg4,...", "#agg,avg16,..." and "#agg,speedup,<value>".
void emit_csv(const ExperimentReport& report, const std::filesystem::path& path);

/// Block statistics: "size,pixels,zero_mv_pixels,zero_residual_pixels" per nominal block size,
/// then "#agg,<name>,<value>" totals and fractions.
void emit_stats(const ExperimentReport& report, const std::filesystem::path& path);

std::vector<PicturePlane> crop_to_multiple(const std::vector<PicturePlane>& frames, int alpha);

/// Procedural clip: smooth multi-octave texture with hard-edged shapes under a global pan of
/// (pan_x, pan_y) HR pixels per frame, plus a textured disc moving at (object_dx, object_dy).
struct SyntheticClipSpec {
    int width = 352;
    int height = 288;
    int frames = 16;
    double pan_x = 0.5;
    double pan_y = 0.25;
    double object_dx = 2.0;
    double object_dy = -1.0;
    std::uint32_t seed = 1;
};

std::vector<PicturePlane> synthetic_clip(const SyntheticClipSpec& spec);

/// Windows of `source` moving by (step_x, step_y) integer pixels per frame.
std::vector<PicturePlane> pan_clip(const PicturePlane& source, int width, int height, int frames, int step_x,
                                   int step_y);

}  // namespace fast

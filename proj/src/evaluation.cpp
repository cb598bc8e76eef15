#include "fast/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "fast/sampling.hpp"

namespace fast {
namespace {

using Clock = std::chrono::steady_clock;

// Runs `fn` `repeats` times; returns the last result and the median wall-clock time in ms.
template <typename F>
auto timed_median(int repeats, F&& fn) {
    std::vector<double> times;
    decltype(fn()) result{};
    for (int i = 0; i < std::max(1, repeats); ++i) {
        const auto t0 = Clock::now();
        result = fn();
        times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    const double median = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
    return std::pair{std::move(result), median};
}

// Rethrows upstream errors with the frame index prepended, keeping the error category.
template <typename F>
auto with_frame_context(std::size_t frame, F&& fn) {
    const std::string where = "frame " + std::to_string(frame) + ": ";
    try {
        return fn();
    } catch (const PluginError& e) {
        throw PluginError(where + e.what());
    } catch (const FormatError& e) {
        throw FormatError(where + e.what(), e.offset());
    } catch (const ParameterError& e) {
        throw ParameterError(where + e.what());
    } catch (const BoundsError& e) {
        throw BoundsError(where + e.what());
    }
}

std::vector<PicturePlane> downsample_all(const std::vector<PicturePlane>& hr, int alpha) {
    std::vector<PicturePlane> lr;
    lr.reserve(hr.size());
    for (const auto& f : hr) lr.push_back(bicubic_downsample(f, alpha));
    return lr;
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double lattice(std::uint32_t seed, std::int64_t ix, std::int64_t iy) {
    const std::uint64_t h = mix(mix(seed) ^ mix(static_cast<std::uint64_t>(ix) * 0x1f1f1f1full) ^
                                static_cast<std::uint64_t>(iy) * 0x5bd1e995ull);
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double value_noise(std::uint32_t seed, double x, double y) {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const auto ix = static_cast<std::int64_t>(fx);
    const auto iy = static_cast<std::int64_t>(fy);
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    const double tx = smooth(x - fx);
    const double ty = smooth(y - fy);
    const double a = lattice(seed, ix, iy) + tx * (lattice(seed, ix + 1, iy) - lattice(seed, ix, iy));
    const double b = lattice(seed, ix, iy + 1) + tx * (lattice(seed, ix + 1, iy + 1) - lattice(seed, ix, iy + 1));
    return a + ty * (b - a);
}

// Background intensity at world coordinates.
double background(std::uint32_t seed, double x, double y) {
    double v = 0.0;
    double amp = 110.0;
    double scale = 48.0;
    for (int octave = 0; octave < 4; ++octave) {
        v += amp * (value_noise(seed + octave, x / scale, y / scale) - 0.5);
        amp *= 0.5;
        scale *= 0.5;
    }
    v += 128.0;
    // Hard-edged structures: a grid of bars and a couple of plateaus.
    if (std::fmod(std::abs(x + 1000.0), 96.0) < 10.0 && std::fmod(std::abs(y + 1000.0), 160.0) < 110.0) v += 70.0;
    if ((x - 260.0) * (x - 260.0) + (y - 90.0) * (y - 90.0) < 45.0 * 45.0) v = 0.5 * v + 20.0;
    if (x > 40.0 && x < 120.0 && y > 180.0 && y < 240.0) v = 0.4 * v + 150.0;
    return v;
}

double object_sample(double x, double y) {
    return 128.0 + 90.0 * std::sin(0.45 * x) * std::cos(0.3 * y);
}

}  // namespace

PipelineOutput run_fast_pipeline(const std::vector<PicturePlane>& lr_frames, const std::vector<FrameSyntax>& syntax,
                                 const PipelineConfig& cfg, int timing_repeats,
                                 const std::vector<PicturePlane>* keyframe_sr,
                                 const std::vector<double>* keyframe_sr_ms) {
    cfg.gop.validate();
    cfg.transfer.validate();
    cfg.deblock.validate();
    if (cfg.transfer.alpha != cfg.alpha || cfg.sr.alpha != cfg.alpha) {
        throw ParameterError("SR and transfer scale factors must match the pipeline scale");
    }
    if (lr_frames.empty()) throw ParameterError("pipeline needs at least one frame");
    if (syntax.size() + 1 != lr_frames.size()) {
        throw FormatError("syntax covers " + std::to_string(syntax.size()) + " frames but the clip has " +
                              std::to_string(lr_frames.size()),
                          0);
    }
    for (std::size_t i = 0; i < syntax.size(); ++i) {
        const auto& part = syntax[i].partition;
        if (syntax[i].frame_index != static_cast<int>(i + 1) || part.frame_width != width(lr_frames[i + 1]) ||
            part.frame_height != height(lr_frames[i + 1])) {
            throw FormatError("syntax for frame " + std::to_string(i + 1) + " does not match the clip", 0);
        }
    }

    PipelineOutput out;
    const std::size_t n = lr_frames.size();
    for (std::size_t i = 0; i < n; ++i) {
        with_frame_context(i, [&] {
            const bool key = cfg.gop.is_keyframe(static_cast<int>(i));
            out.keyframe.push_back(key);
            if (key) {
                PicturePlane sr;
                double ms = 0.0;
                if (keyframe_sr) {
                    sr = (*keyframe_sr)[i];
                    ms = keyframe_sr_ms ? (*keyframe_sr_ms)[i] : 0.0;
                } else {
                    std::tie(sr, ms) = timed_median(timing_repeats, [&] { return apply_sr(cfg.sr, lr_frames[i]); });
                }
                out.t_sr_ms.push_back(ms);
                out.t_transfer_ms.push_back(0.0);
                out.t_deblock_ms.push_back(0.0);
                out.pre_deblock.push_back(sr);
                out.hr.push_back(std::move(sr));
                out.decisions.emplace_back();
                return 0;
            }
            auto [transferred, t_transfer] = timed_median(timing_repeats, [&] {
                return transfer_frame(out.hr.back(), lr_frames[i], syntax[i - 1], cfg.transfer);
            });
            auto [deblocked, t_deblock] = timed_median(timing_repeats, [&] {
                return deblock_frame(transferred.hr, transferred.decisions, cfg.alpha, cfg.deblock);
            });
            out.stats += transferred.stats;
            out.t_sr_ms.push_back(0.0);
            out.t_transfer_ms.push_back(t_transfer);
            out.t_deblock_ms.push_back(t_deblock);
            out.pre_deblock.push_back(std::move(transferred.hr));
            out.decisions.push_back(std::move(transferred.decisions));
            out.hr.push_back(std::move(deblocked));
            return 0;
        });
    }
    return out;
}

RecordAverage average_first(const std::vector<FrameRecord>& records, int n) {
    RecordAverage avg;
    avg.frames = std::min<int>(n, static_cast<int>(records.size()));
    if (avg.frames == 0) return avg;
    for (int i = 0; i < avg.frames; ++i) {
        const FrameRecord& r = records[i];
        avg.psnr_bicubic += r.psnr_bicubic;
        avg.psnr_sr += r.psnr_sr;
        avg.psnr_fast += r.psnr_fast;
        avg.t_sr_ms += r.t_sr_ms;
        avg.t_transfer_ms += r.t_transfer_ms;
        avg.t_deblock_ms += r.t_deblock_ms;
    }
    const double k = 1.0 / avg.frames;
    avg.psnr_bicubic *= k;
    avg.psnr_sr *= k;
    avg.psnr_fast *= k;
    avg.t_sr_ms *= k;
    avg.t_transfer_ms *= k;
    avg.t_deblock_ms *= k;
    return avg;
}

double compute_speedup(const std::vector<FrameRecord>& records, const GopConfig& gop) {
    double all_sr = 0.0;
    double fast = 0.0;
    for (const FrameRecord& r : records) {
        all_sr += r.t_sr_ms;
        if (gop.is_keyframe(r.frame_index)) fast += r.t_sr_ms;
        fast += r.t_transfer_ms + r.t_deblock_ms;
    }
    // Guard against a zero-cost run on a timer with coarse resolution.
    const double eps = std::numeric_limits<double>::min();
    return std::max(all_sr, eps) / std::max(fast, eps);
}

ExperimentReport run_chained_experiment(const std::vector<PicturePlane>& hr_input, const ExperimentConfig& cfg) {
    if (hr_input.size() < 2) throw ParameterError("the chained experiment needs at least two frames");
    cfg.gop.validate();
    cfg.encoder.validate();
    const std::vector<PicturePlane> hr = crop_to_multiple(hr_input, cfg.alpha);
    for (const auto& f : hr) {
        if (!same_size(f, hr.front())) throw ParameterError("all frames must share one size");
    }

    // Decoder-side LR frames: the chained reconstruction of the downsampled clip.
    std::vector<PicturePlane> lr;
    const std::vector<FrameSyntax> syntax = encode_sequence(downsample_all(hr, cfg.alpha), cfg.encoder, &lr);

    // Arm A: SR on every frame, after one untimed warm-up call.
    (void)with_frame_context(0, [&] { return apply_sr(cfg.sr, lr.front()); });
    std::vector<PicturePlane> sr_frames;
    std::vector<double> sr_ms;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        auto [frame, ms] = with_frame_context(
            i, [&] { return timed_median(cfg.timing_repeats, [&] { return apply_sr(cfg.sr, lr[i]); }); });
        sr_frames.push_back(std::move(frame));
        sr_ms.push_back(ms);
    }

    // Arm B: the same operator output on keyframes, transfer + deblocking elsewhere.
    PipelineConfig pipe{cfg.alpha, cfg.gop, cfg.sr, cfg.transfer, cfg.deblock};
    pipe.transfer.alpha = cfg.alpha;
    const PipelineOutput fast = run_fast_pipeline(lr, syntax, pipe, cfg.timing_repeats, &sr_frames, &sr_ms);

    ExperimentReport report;
    report.gop_length = cfg.gop.gop_length;
    report.stats = fast.stats;
    for (std::size_t i = 0; i < hr.size(); ++i) {
        FrameRecord r;
        r.frame_index = static_cast<int>(i);
        r.psnr_bicubic = psnr(bicubic_upsample(lr[i], cfg.alpha), hr[i]);
        r.psnr_sr = psnr(sr_frames[i], hr[i]);
        r.psnr_fast = psnr(fast.hr[i], hr[i]);
        r.t_sr_ms = sr_ms[i];
        r.t_transfer_ms = fast.t_transfer_ms[i];
        r.t_deblock_ms = fast.t_deblock_ms[i];
        report.frames.push_back(r);
    }
    report.avg4 = average_first(report.frames, 4);
    report.avg16 = average_first(report.frames, 16);
    report.speedup = compute_speedup(report.frames, cfg.gop);
    return report;
}

std::vector<AccuracyRow> run_mv_accuracy_sweep(const PicturePlane& hr1_in, const PicturePlane& hr2_in, int alpha,
                                               const SrOperator& sr, const TransferConfig& transfer,
                                               const EncoderConfig& encoder) {
    const auto hr = crop_to_multiple({hr1_in, hr2_in}, alpha);
    if (!same_size(hr[0], hr[1])) throw ParameterError("sweep frames differ in size");
    const PicturePlane lr1 = bicubic_downsample(hr[0], alpha);
    const PicturePlane lr2 = bicubic_downsample(hr[1], alpha);
    const PicturePlane hr1_sr = apply_sr(sr, lr1);

    TransferConfig tcfg = transfer;
    tcfg.alpha = alpha;
    std::vector<AccuracyRow> rows;
    for (MvPrecision precision : {MvPrecision::Integer, MvPrecision::Half, MvPrecision::Quarter}) {
        EncoderConfig ecfg = encoder;
        ecfg.precision = precision;
        const EncodedFrame enc = encode_frame(lr1, lr2, ecfg);
        const TransferResult t = transfer_frame(hr1_sr, enc.recon, enc.syntax, tcfg);
        rows.push_back({precision, psnr(t.hr, hr[1])});
    }
    return rows;
}

std::vector<AblationRow> run_deblock_ablation(const std::vector<PicturePlane>& hr_input, const ExperimentConfig& cfg) {
    if (hr_input.size() < 2) throw ParameterError("the ablation needs at least two frames");
    const std::vector<PicturePlane> hr = crop_to_multiple(hr_input, cfg.alpha);
    std::vector<PicturePlane> lr;
    const std::vector<FrameSyntax> syntax = encode_sequence(downsample_all(hr, cfg.alpha), cfg.encoder, &lr);

    PipelineConfig with{cfg.alpha, cfg.gop, cfg.sr, cfg.transfer, cfg.deblock};
    with.transfer.alpha = cfg.alpha;
    with.deblock.enabled = true;
    PipelineConfig without = with;
    without.deblock.enabled = false;

    std::vector<PicturePlane> keyframes(lr.size());
    for (std::size_t i = 0; i < lr.size(); ++i) {
        if (cfg.gop.is_keyframe(static_cast<int>(i))) keyframes[i] = apply_sr(cfg.sr, lr[i]);
    }
    const PipelineOutput a = run_fast_pipeline(lr, syntax, with, 1, &keyframes);
    const PipelineOutput b = run_fast_pipeline(lr, syntax, without, 1, &keyframes);

    std::vector<AblationRow> rows;
    for (std::size_t i = 0; i < hr.size(); ++i) {
        rows.push_back({static_cast<int>(i), psnr(a.hr[i], hr[i]), psnr(b.hr[i], hr[i])});
    }
    return rows;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.precision(std::numeric_limits<double>::max_digits10);
    return out;
}

void write_average(std::ostream& out, const char* name, const RecordAverage& a) {
    out << "#agg," << name << ',' << a.psnr_bicubic << ',' << a.psnr_sr << ',' << a.psnr_fast << ',' << a.t_sr_ms
        << ',' << a.t_transfer_ms << ',' << a.t_deblock_ms << '\n';
}

}  // namespace

void emit_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "frame,psnr_bicubic,psnr_sr,psnr_fast,t_sr_ms,t_transfer_ms,t_deblock_ms\n";
    for (const FrameRecord& r : report.frames) {
        out << r.frame_index << ',' << r.psnr_bicubic << ',' << r.psnr_sr << ',' << r.psnr_fast << ',' << r.t_sr_ms
            << ',' << r.t_transfer_ms << ',' << r.t_deblock_ms << '\n';
    }
    write_average(out, "avg4", report.avg4);
    write_average(out, "avg16", report.avg16);
    out << "#agg,speedup," << report.speedup << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void emit_stats(const ExperimentReport& report, const std::filesystem::path& path) {
    const TransferStats& s = report.stats;
    std::ofstream out = open_output(path);
    out << "size,pixels,zero_mv_pixels,zero_residual_pixels\n";
    for (const auto& [size, pixels] : s.pixels_by_size) {
        const auto lookup = [size](const std::map<int, std::int64_t>& m) {
            const auto it = m.find(size);
            return it == m.end() ? std::int64_t{0} : it->second;
        };
        out << size << ',' << pixels << ',' << lookup(s.copied_by_size) << ',' << lookup(s.skipped_by_size) << '\n';
    }
    const double total = static_cast<double>(std::max<std::int64_t>(s.pixels_total, 1));
    out << "#agg,pixels_total," << s.pixels_total << '\n';
    out << "#agg,zero_mv_fraction," << (s.pixels_total ? s.pixels_zero_mv / total : 0.0) << '\n';
    out << "#agg,zero_residual_fraction," << (s.pixels_total ? s.pixels_zero_residual / total : 0.0) << '\n';
    out << "#agg,blocks_transferred," << s.blocks_transferred << '\n';
    out << "#agg,blocks_fallback," << s.blocks_fallback << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<PicturePlane> crop_to_multiple(const std::vector<PicturePlane>& frames, int alpha) {
    if (!valid_scale(alpha)) throw ParameterError("alpha must be 2, 3 or 4");
    std::vector<PicturePlane> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        const int w = width(f) / alpha * alpha;
        const int h = height(f) / alpha * alpha;
        if (w == 0 || h == 0) throw ParameterError("frame smaller than the scale factor");
        out.emplace_back(f.topLeftCorner(h, w));
    }
    return out;
}

std::vector<PicturePlane> synthetic_clip(const SyntheticClipSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.frames <= 0) throw ParameterError("empty synthetic clip");
    std::vector<PicturePlane> clip;
    const double radius = std::min(spec.width, spec.height) * 0.18;
    for (int t = 0; t < spec.frames; ++t) {
        const double ox = spec.width * 0.3 + spec.object_dx * t;
        const double oy = spec.height * 0.55 + spec.object_dy * t;
        PicturePlane frame(spec.height, spec.width);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                double acc = 0.0;
                // 2x2 supersampling keeps hard edges band-limited enough for sub-pixel motion.
                for (const double sy : {0.25, 0.75}) {
                    for (const double sx : {0.25, 0.75}) {
                        const double px = x + sx;
                        const double py = y + sy;
                        const double dx = px - ox;
                        const double dy = py - oy;
                        acc += dx * dx + dy * dy < radius * radius
                                   ? object_sample(dx, dy)
                                   : background(spec.seed, px + spec.pan_x * t, py + spec.pan_y * t);
                    }
                }
                frame(y, x) = quantize_sample<std::uint8_t>(acc * 0.25);
            }
        }
        clip.push_back(std::move(frame));
    }
    return clip;
}

std::vector<PicturePlane> pan_clip(const PicturePlane& source, int w, int h, int frames, int step_x, int step_y) {
    const int span_x = std::abs(step_x) * (frames - 1);
    const int span_y = std::abs(step_y) * (frames - 1);
    if (w <= 0 || h <= 0 || frames <= 0 || w + span_x > width(source) || h + span_y > height(source)) {
        throw ParameterError("pan clip does not fit inside the source image");
    }
    const int x0 = step_x < 0 ? span_x : 0;
    const int y0 = step_y < 0 ? span_y : 0;
    std::vector<PicturePlane> clip;
    for (int t = 0; t < frames; ++t) clip.emplace_back(source.block(y0 + step_y * t, x0 + step_x * t, h, w));
    return clip;
}

}  // namespace fast

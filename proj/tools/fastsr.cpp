// fastsr: syntax extraction, FAST upscaling and benchmarking from the command line.
//
// Exit codes: 0 success, 2 usage/input error, 3 data-consistency error, 4 SR plugin error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "fast/evaluation.hpp"
#include "fast/sidecar.hpp"
#include "fast/video_io.hpp"

namespace {

using namespace fast;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitPlugin = 4;

struct EncoderFlags {
    EncoderConfig cfg;
    std::string residual_mode = "lossless";
    std::string precision = "quarter";

    void add(CLI::App* app) {
        app->add_option("--search-range", cfg.search_range, "Integer motion search range (pixels)")
            ->capture_default_str();
        app->add_option("--split-threshold", cfg.split_threshold, "Quadtree split threshold (SAD per pixel)")
            ->capture_default_str();
        app->add_option("--min-block", cfg.min_block, "Smallest quadtree block")->capture_default_str();
        app->add_option("--residual-mode", residual_mode, "Residual storage")
            ->check(CLI::IsMember({"lossless", "deadzone"}))
            ->capture_default_str();
        app->add_option("--deadzone", cfg.deadzone, "Deadzone magnitude (deadzone mode)")->capture_default_str();
        app->add_option("--precision", precision, "Motion vector accuracy")
            ->check(CLI::IsMember({"integer", "half", "quarter"}))
            ->capture_default_str();
    }

    EncoderConfig resolve() const {
        EncoderConfig c = cfg;
        c.residual_mode = residual_mode == "deadzone" ? ResidualMode::Deadzone : ResidualMode::Lossless;
        c.precision = precision == "integer" ? MvPrecision::Integer
                      : precision == "half"  ? MvPrecision::Half
                                             : MvPrecision::Quarter;
        c.validate();
        return c;
    }
};

struct PipelineFlags {
    int alpha = 2;
    std::string sr = "ibp";
    int gop = 16;
    bool no_deblock = false;
    bool no_adaptive = false;
    bool no_shortcuts = false;
    double eta = 10.0;
    int beta = 24;
    int tc = 6;

    void add(CLI::App* app) {
        app->add_option("--alpha", alpha, "Scale factor")->check(CLI::IsMember({2, 3, 4}))->capture_default_str();
        app->add_option("--sr", sr, "SR operator: bicubic, ibp or external:\"<command>\"")->capture_default_str();
        app->add_option("--gop", gop, "GOP length (SR runs on the first frame of each GOP)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_flag("--no-deblock", no_deblock, "Disable the deblocking filter");
        app->add_flag("--no-adaptive", no_adaptive, "Transfer every block regardless of residual magnitude");
        app->add_flag("--no-shortcuts", no_shortcuts, "Disable zero-MV copy and zero-residual skip shortcuts");
        app->add_option("--eta", eta, "Mean |residual| threshold for bicubic fallback")->capture_default_str();
        app->add_option("--beta", beta, "Deblocking activity threshold")->capture_default_str();
        app->add_option("--tc", tc, "Deblocking clipping threshold")->capture_default_str();
    }

    PipelineConfig resolve() const {
        PipelineConfig p;
        p.alpha = alpha;
        p.gop.gop_length = gop;
        p.sr = SrOperator::parse(sr, alpha);
        p.transfer.alpha = alpha;
        p.transfer.eta = eta;
        p.transfer.adaptive = !no_adaptive;
        p.transfer.shortcuts = !no_shortcuts;
        p.deblock.beta = beta;
        p.deblock.tc = tc;
        p.deblock.enabled = !no_deblock;
        return p;
    }
};

void print_block_histogram(const std::vector<FrameSyntax>& frames) {
    std::map<int, std::int64_t> pixels;
    std::int64_t total = 0;
    std::int64_t skipped = 0;
    std::int64_t zero_mv = 0;
    for (const auto& f : frames) {
        for (const auto& leaf : f.partition.leaves) {
            const auto a = leaf.rect().area();
            pixels[leaf.size] += a;
            total += a;
            if (leaf.skip) skipped += a;
            if (leaf.mv.is_zero()) zero_mv += a;
        }
    }
    std::cout << "block size histogram (pixels):\n";
    for (const auto& [size, px] : pixels) {
        std::printf("  %2dx%-2d %10lld  %5.1f%%\n", size, size, static_cast<long long>(px),
                    total ? 100.0 * px / total : 0.0);
    }
    std::printf("skip fraction: %.4f\nzero-mv fraction: %.4f\n", total ? double(skipped) / total : 0.0,
                total ? double(zero_mv) / total : 0.0);
}

Video load_input(const std::string& path) {
    Video v = read_video(path);
    if (v.frames.empty()) throw IoError(path + ": no frames");
    return v;
}

int cmd_extract(const std::string& input, const std::string& output, const EncoderFlags& flags) {
    const EncoderConfig cfg = flags.resolve();
    const Video video = load_input(input);
    SyntaxSequence seq;
    seq.width = video.width;
    seq.height = video.height;
    seq.residual_mode = cfg.residual_mode;
    seq.deadzone = cfg.residual_mode == ResidualMode::Deadzone ? cfg.deadzone : 0;
    seq.frames = encode_sequence(luma_planes(video), cfg);
    write_sidecar(output, seq);
    std::cout << "wrote " << seq.frames.size() << " frame(s) of syntax to " << output << "\n";
    print_block_histogram(seq.frames);
    return 0;
}

int cmd_upscale(const std::string& input, const std::string& output, const std::string& sidecar,
                const PipelineFlags& pflags, const EncoderFlags& eflags) {
    const PipelineConfig cfg = pflags.resolve();
    const Video video = load_input(input);
    const std::vector<PicturePlane> lr = luma_planes(video);

    std::vector<FrameSyntax> syntax;
    if (!sidecar.empty()) {
        SyntaxSequence seq = read_sidecar(sidecar);
        if (seq.width != video.width || seq.height != video.height) {
            throw FormatError("sidecar is " + std::to_string(seq.width) + "x" + std::to_string(seq.height) +
                                  " but the video is " + std::to_string(video.width) + "x" +
                                  std::to_string(video.height),
                              8);
        }
        syntax = std::move(seq.frames);
    } else {
        syntax = encode_sequence(lr, eflags.resolve());
    }

    const PipelineOutput out = run_fast_pipeline(lr, syntax, cfg);
    write_video(output, assemble_upscaled(video, out.hr, cfg.alpha));

    const auto& s = out.stats;
    std::cout << "upscaled " << lr.size() << " frame(s) x" << cfg.alpha << " with " << cfg.sr.describe()
              << " (gop " << cfg.gop.gop_length << ") -> " << output << "\n";
    std::printf("blocks transferred: %lld, fallback: %lld\n", static_cast<long long>(s.blocks_transferred),
                static_cast<long long>(s.blocks_fallback));
    return 0;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size() || v < 1) throw ParameterError("bad GOP list entry '" + item + "'");
        values.push_back(v);
    }
    if (values.empty()) throw ParameterError("empty GOP list");
    return values;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

void print_report(const ExperimentReport& r) {
    std::printf("frame  bicubic      sr    fast   t_sr_ms  t_tr_ms  t_db_ms\n");
    for (const auto& f : r.frames) {
        std::printf("%5d  %7.3f %7.3f %7.3f %9.3f %8.3f %8.3f\n", f.frame_index, f.psnr_bicubic, f.psnr_sr,
                    f.psnr_fast, f.t_sr_ms, f.t_transfer_ms, f.t_deblock_ms);
    }
    std::printf("avg%-2d  %7.3f %7.3f %7.3f\n", r.avg4.frames, r.avg4.psnr_bicubic, r.avg4.psnr_sr, r.avg4.psnr_fast);
    std::printf("avg%-2d  %7.3f %7.3f %7.3f\n", r.avg16.frames, r.avg16.psnr_bicubic, r.avg16.psnr_sr,
                r.avg16.psnr_fast);
    std::printf("speedup (gop %d): %.3f\n", r.gop_length, r.speedup);
}

int cmd_bench(const std::string& input, int frames, const std::string& csv, const std::string& stats,
              const std::string& sweep_gop, bool mv_sweep, int repeats, const PipelineFlags& pflags,
              const EncoderFlags& eflags) {
    const PipelineConfig pipe = pflags.resolve();
    std::vector<PicturePlane> hr;
    if (input.empty() || input == "synthetic") {
        SyntheticClipSpec spec;
        spec.frames = frames;
        hr = synthetic_clip(spec);
    } else {
        hr = luma_planes(load_input(input));
        if (static_cast<int>(hr.size()) > frames) hr.resize(frames);
    }
    if (hr.size() < 2) throw ParameterError("bench needs at least two frames");

    ExperimentConfig cfg;
    cfg.alpha = pipe.alpha;
    cfg.gop = pipe.gop;
    cfg.sr = pipe.sr;
    cfg.transfer = pipe.transfer;
    cfg.deblock = pipe.deblock;
    cfg.encoder = eflags.resolve();
    cfg.timing_repeats = repeats;

    if (mv_sweep) {
        const auto rows = run_mv_accuracy_sweep(hr[0], hr[1], cfg.alpha, cfg.sr, cfg.transfer, cfg.encoder);
        const std::string path = with_suffix(csv, "_mv");
        std::ofstream out(path);
        if (!out) throw IoError("cannot open " + path + " for writing");
        out << "accuracy,psnr\n";
        std::printf("accuracy  psnr\n");
        for (const auto& r : rows) {
            const char* name = r.precision == MvPrecision::Integer ? "integer"
                               : r.precision == MvPrecision::Half  ? "half"
                                                                   : "quarter";
            out << name << ',' << r.psnr << '\n';
            std::printf("%-8s  %.3f\n", name, r.psnr);
        }
        std::cout << "wrote " << path << "\n";
    }

    const std::vector<int> gops = sweep_gop.empty() ? std::vector<int>{cfg.gop.gop_length} : parse_int_list(sweep_gop);
    for (const int g : gops) {
        cfg.gop.gop_length = g;
        const ExperimentReport report = run_chained_experiment(hr, cfg);
        const std::string path = sweep_gop.empty() ? csv : with_suffix(csv, "_gop" + std::to_string(g));
        emit_csv(report, path);
        print_report(report);
        std::cout << "wrote " << path << "\n";
        if (!stats.empty()) {
            const std::string spath = sweep_gop.empty() ? stats : with_suffix(stats, "_gop" + std::to_string(g));
            emit_stats(report, spath);
            std::cout << "wrote " << spath << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FAST: super-resolution transfer over codec syntax elements"};
    app.require_subcommand(1);

    std::string input;
    std::string output;
    std::string sidecar;

    EncoderFlags extract_enc;
    auto* extract = app.add_subcommand("extract", "Encode a clip and write its syntax elements to a sidecar file");
    extract->add_option("input", input, "Input video (.y4m, PGM/PNG file or directory)")->required();
    extract->add_option("-o,--output", output, "Sidecar output path")->required();
    extract_enc.add(extract);

    EncoderFlags upscale_enc;
    PipelineFlags upscale_pipe;
    auto* upscale = app.add_subcommand("upscale", "Super-resolve a clip with SR on keyframes and FAST elsewhere");
    upscale->add_option("input", input, "Input LR video (.y4m, PGM/PNG file or directory)")->required();
    upscale->add_option("-o,--output", output, "Output (.y4m file or PGM frame directory)")->required();
    upscale->add_option("--sidecar", sidecar, "Sidecar from 'extract' (extraction runs inline when omitted)");
    upscale_pipe.add(upscale);
    upscale_enc.add(upscale);

    EncoderFlags bench_enc;
    PipelineFlags bench_pipe;
    int frames = 16;
    std::string csv = "bench.csv";
    std::string stats;
    std::string sweep_gop;
    bool mv_sweep = false;
    int repeats = 3;
    auto* bench = app.add_subcommand("bench", "Compare per-frame SR against FAST on a ground-truth HR clip");
    bench->add_option("input", input, "HR ground-truth video; omit or pass 'synthetic' for the built-in clip");
    bench->add_option("--frames", frames, "Frames to use")->check(CLI::Range(2, 100000))->capture_default_str();
    bench->add_option("--csv", csv, "Per-frame CSV output")->capture_default_str();
    bench->add_option("--stats", stats, "Block statistics CSV output");
    bench->add_option("--sweep-gop", sweep_gop, "Comma-separated GOP lengths; one CSV per length");
    bench->add_flag("--mv-sweep", mv_sweep, "Also run the integer/half/quarter-pel accuracy sweep");
    bench->add_option("--repeats", repeats, "Timing repetitions (median reported)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_pipe.add(bench);
    bench_enc.add(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*extract) return cmd_extract(input, output, extract_enc);
        if (*upscale) return cmd_upscale(input, output, sidecar, upscale_pipe, upscale_enc);
        if (*bench) return cmd_bench(input, frames, csv, stats, sweep_gop, mv_sweep, repeats, bench_pipe, bench_enc);
    } catch (const PluginError& e) {
        std::cerr << "plugin error: " << e.what() << "\n";
        return kExitPlugin;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParameterError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}

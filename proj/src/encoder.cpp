#include "fast/encoder.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <limits>
#include <tuple>

#include "fast/sampling.hpp"

namespace fast {
namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Ordering key for integer candidates: SAD, then |dx|+|dy|, then dy, then dx.
auto candidate_key(std::int64_t sad, int dx, int dy) {
    return std::make_tuple(sad, std::abs(dx) + std::abs(dy), dy, dx);
}

std::int64_t integer_sad(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& r, int dx, int dy,
                         std::int64_t bail_above) {
    const int rw = width(ref);
    const int rh = height(ref);
    const int sx = r.x + dx;
    const int sy = r.y + dy;
    std::int64_t sad = 0;
    if (sx >= 0 && sy >= 0 && sx + r.w <= rw && sy + r.h <= rh) {
        for (int row = 0; row < r.h; ++row) {
            const std::uint8_t* a = &cur(r.y + row, r.x);
            const std::uint8_t* b = &ref(sy + row, sx);
            int acc = 0;
            for (int c = 0; c < r.w; ++c) acc += std::abs(int{a[c]} - int{b[c]});
            sad += acc;
            if (sad > bail_above) return sad;
        }
        return sad;
    }
    for (int row = 0; row < r.h; ++row) {
        const int ry = std::clamp(sy + row, 0, rh - 1);
        for (int c = 0; c < r.w; ++c) {
            const int rx = std::clamp(sx + c, 0, rw - 1);
            sad += std::abs(int{cur(r.y + row, r.x + c)} - int{ref(ry, rx)});
        }
        if (sad > bail_above) return sad;
    }
    return sad;
}

MotionResult refine_stage(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& region,
                          const MotionResult& centre, int step) {
    static constexpr std::array<std::array<int, 2>, 8> kNeighbours{
        {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
    MotionResult best = centre;
    for (const auto& [nx, ny] : kNeighbours) {
        const QuarterPelMV mv{centre.mv.dx + nx * step, centre.mv.dy + ny * step};
        const std::int64_t sad = block_sad(ref, cur, region, mv);
        if (sad < best.sad) best = {mv, sad};
    }
    return best;
}

void split_or_emit(const PicturePlane& ref, const PicturePlane& cur, const EncoderConfig& cfg, int x, int y,
                   int size, std::vector<BlockNode>& leaves) {
    const BlockRect r{x, y, std::min(size, width(cur) - x), std::min(size, height(cur) - y)};
    const MotionResult integer = estimate_motion_integer(ref, cur, r, cfg.search_range);
    const MotionResult refined = refine_qpel(ref, cur, r, integer, cfg.precision);
    const double sad_per_pixel = static_cast<double>(refined.sad) / static_cast<double>(r.area());

    if (sad_per_pixel > cfg.split_threshold && size > cfg.min_block) {
        const int half = size / 2;
        for (const auto& [ox, oy] : {std::pair{0, 0}, {half, 0}, {0, half}, {half, half}}) {
            if (x + ox < width(cur) && y + oy < height(cur)) split_or_emit(ref, cur, cfg, x + ox, y + oy, half, leaves);
        }
        return;
    }
    BlockNode leaf;
    leaf.x = r.x;
    leaf.y = r.y;
    leaf.w = r.w;
    leaf.h = r.h;
    leaf.size = size;
    leaf.mv = refined.mv;
    leaves.push_back(leaf);
}

}  // namespace

void EncoderConfig::validate() const {
    if (search_range <= 0) throw ParameterError("search_range must be positive");
    if (!is_pow2(min_block) || !is_pow2(max_block) || min_block < 4 || max_block > 64 || min_block > max_block) {
        throw ParameterError("block sizes must be powers of two with 4 <= min_block <= max_block <= 64");
    }
    if (!(split_threshold >= 0.0)) throw ParameterError("split_threshold must be non-negative");
    if (deadzone < 0) throw ParameterError("deadzone must be non-negative");
}

std::int64_t block_sad(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& region, QuarterPelMV mv) {
    const PicturePlane pred = qpel_fetch_block(ref, region, mv);
    return (block_region_view(cur, region).cast<int>() - pred.cast<int>()).abs().cast<std::int64_t>().sum();
}

MotionResult estimate_motion_integer(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& region,
                                     int search_range) {
    check_region(width(cur), height(cur), region);
    if (!same_size(ref, cur)) throw ParameterError("reference and current frame sizes differ");
    if (search_range < 0) throw ParameterError("search range must be non-negative");

    int best_dx = 0;
    int best_dy = 0;
    std::int64_t best_sad = integer_sad(ref, cur, region, 0, 0, std::numeric_limits<std::int64_t>::max());
    for (int dy = -search_range; dy <= search_range; ++dy) {
        for (int dx = -search_range; dx <= search_range; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const std::int64_t sad = integer_sad(ref, cur, region, dx, dy, best_sad);
            if (sad > best_sad) continue;
            if (candidate_key(sad, dx, dy) < candidate_key(best_sad, best_dx, best_dy)) {
                best_sad = sad;
                best_dx = dx;
                best_dy = dy;
            }
        }
    }
    return {{4 * best_dx, 4 * best_dy}, best_sad};
}

MotionResult refine_qpel(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& region,
                         const MotionResult& integer_result, MvPrecision precision) {
    if (!integer_result.mv.is_integer_pel()) throw ParameterError("refinement must start from an integer vector");
    MotionResult best = integer_result;
    if (precision == MvPrecision::Integer || best.sad == 0) return best;
    best = refine_stage(ref, cur, region, best, 2);
    if (precision == MvPrecision::Half || best.sad == 0) return best;
    return refine_stage(ref, cur, region, best, 1);
}

BlockPartition build_quadtree(const PicturePlane& ref, const PicturePlane& cur, const EncoderConfig& cfg) {
    cfg.validate();
    if (!same_size(ref, cur)) throw ParameterError("reference and current frame sizes differ");
    BlockPartition partition;
    partition.frame_width = width(cur);
    partition.frame_height = height(cur);
    for (int y = 0; y < partition.frame_height; y += cfg.max_block) {
        for (int x = 0; x < partition.frame_width; x += cfg.max_block) {
            split_or_emit(ref, cur, cfg, x, y, cfg.max_block, partition.leaves);
        }
    }
    return partition;
}

EncodedFrame encode_frame(const PicturePlane& ref, const PicturePlane& cur, const EncoderConfig& cfg,
                          int frame_index) {
    if (!same_size(ref, cur)) throw ParameterError("reference and current frame sizes differ");
    if (cur.size() == 0) throw ParameterError("cannot encode an empty frame");

    EncodedFrame out;
    out.syntax.frame_index = frame_index;
    out.syntax.reference_index = frame_index - 1;
    out.syntax.partition = build_quadtree(ref, cur, cfg);
    out.syntax.residual = ResidualPlane::Zero(cur.rows(), cur.cols());
    out.recon = PicturePlane(cur.rows(), cur.cols());

    for (BlockNode& leaf : out.syntax.partition.leaves) {
        const PicturePlane pred = qpel_fetch_block(ref, leaf.rect(), leaf.mv);
        ResidualPlane res = (block_region_view(cur, leaf).cast<std::int16_t>() - pred.cast<std::int16_t>());
        if (cfg.residual_mode == ResidualMode::Deadzone) {
            const int dz = cfg.deadzone;
            res = res.unaryExpr([dz](std::int16_t v) { return std::abs(int{v}) <= dz ? std::int16_t{0} : v; });
        }
        leaf.skip = (res == 0).all();
        leaf.mode = TransferMode::Transfer;
        block_region_view(out.syntax.residual, leaf) = res;
        leaf.mean_abs_residual = mean_abs_over(out.syntax.residual, leaf.rect());
        block_region_view(out.recon, leaf) =
            (pred.cast<int>() + res.cast<int>()).cwiseMax(0).cwiseMin(255).cast<std::uint8_t>();
    }
    return out;
}

PicturePlane reconstruct_frame(const PicturePlane& ref, const FrameSyntax& syntax) {
    const auto& part = syntax.partition;
    if (width(ref) != part.frame_width || height(ref) != part.frame_height ||
        !same_size(ref, syntax.residual)) {
        throw ParameterError("syntax dimensions do not match the reference frame");
    }
    PicturePlane recon(ref.rows(), ref.cols());
    for (const BlockNode& leaf : part.leaves) {
        const PicturePlane pred = qpel_fetch_block(ref, leaf.rect(), leaf.mv);
        block_region_view(recon, leaf) = (pred.cast<int>() + block_region_view(syntax.residual, leaf).cast<int>())
                                             .cwiseMax(0)
                                             .cwiseMin(255)
                                             .cast<std::uint8_t>();
    }
    return recon;
}

std::vector<FrameSyntax> encode_sequence(const std::vector<PicturePlane>& frames, const EncoderConfig& cfg,
                                         std::vector<PicturePlane>* recon_out) {
    std::vector<FrameSyntax> syntax;
    if (frames.empty()) return syntax;
    PicturePlane reference = frames.front();
    if (recon_out) recon_out->assign(1, reference);
    for (std::size_t i = 1; i < frames.size(); ++i) {
        EncodedFrame enc = encode_frame(reference, frames[i], cfg, static_cast<int>(i));
        syntax.push_back(std::move(enc.syntax));
        reference = std::move(enc.recon);
        if (recon_out) recon_out->push_back(reference);
    }
    return syntax;
}

}  // namespace fast

#include "fast/deblock.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "fast/sampling.hpp"

namespace fast {
namespace {

bool ranges_overlap(int a0, int alen, int b0, int blen) { return a0 < b0 + blen && b0 < a0 + alen; }

bool adjacent(const BlockNode& a, const BlockNode& b) {
    const bool side_by_side = (a.x + a.w == b.x || b.x + b.w == a.x) && ranges_overlap(a.y, a.h, b.y, b.h);
    const bool stacked = (a.y + a.h == b.y || b.y + b.h == a.y) && ranges_overlap(a.x, a.w, b.x, b.w);
    return side_by_side || stacked;
}

// Sample accessor along one line crossing the boundary: offset -1 is p0, 0 is q0.
struct LineAccess {
    PicturePlane& frame;
    EdgeOrientation orientation;
    int position;

    std::uint8_t& at(int line, int offset) const {
        return orientation == EdgeOrientation::Vertical ? frame(line, position + offset)
                                                        : frame(position + offset, line);
    }
};

int clip3(int lo, int hi, int v) { return std::clamp(v, lo, hi); }

void filter_segment(PicturePlane& frame, const BoundarySegment& seg, const DeblockConfig& cfg) {
    const LineAccess px{frame, seg.orientation, seg.position};
    const int first = seg.start;
    const int last = seg.start + seg.extent - 1;

    auto side_activity = [&](int line, int dir) {
        // dir = -1 walks into the p side, +1 into the q side.
        const int s0 = px.at(line, dir < 0 ? -1 : 0);
        const int s1 = px.at(line, dir < 0 ? -2 : 1);
        const int s2 = px.at(line, dir < 0 ? -3 : 2);
        return std::abs(s2 - 2 * s1 + s0);
    };
    const int dp = side_activity(first, -1) + (last != first ? side_activity(last, -1) : 0);
    const int dq = side_activity(first, +1) + (last != first ? side_activity(last, +1) : 0);
    if (dp + dq >= cfg.beta) return;

    const bool adjust_p1 = 4 * dp < cfg.beta;
    const bool adjust_q1 = 4 * dq < cfg.beta;
    const int tc = cfg.tc;
    const int tc1 = cfg.tc >> 1;

    for (int line = first; line <= last; ++line) {
        const int p2 = px.at(line, -3);
        const int p1 = px.at(line, -2);
        const int p0 = px.at(line, -1);
        const int q0 = px.at(line, 0);
        const int q1 = px.at(line, 1);
        const int q2 = px.at(line, 2);

        const int delta = clip3(-tc, tc, ((q0 - p0) * 4 + (p1 - q1) + 4) >> 3);
        if (delta == 0) continue;
        px.at(line, -1) = static_cast<std::uint8_t>(clip3(0, 255, p0 + delta));
        px.at(line, 0) = static_cast<std::uint8_t>(clip3(0, 255, q0 - delta));
        if (adjust_p1) {
            const int dp1 = clip3(-tc1, tc1, ((((p2 + p0 + 1) >> 1) - p1 + delta) >> 1));
            px.at(line, -2) = static_cast<std::uint8_t>(clip3(0, 255, p1 + dp1));
        }
        if (adjust_q1) {
            const int dq1 = clip3(-tc1, tc1, ((((q2 + q0 + 1) >> 1) - q1 - delta) >> 1));
            px.at(line, 1) = static_cast<std::uint8_t>(clip3(0, 255, q1 + dq1));
        }
    }
}

}  // namespace

int compute_boundary_strength(const BlockNode& a, const BlockNode& b) {
    if (!adjacent(a, b)) throw std::logic_error("boundary strength requested for non-adjacent leaves");
    const bool fa = a.mode == TransferMode::BicubicFallback;
    const bool fb = b.mode == TransferMode::BicubicFallback;
    if (fa && fb) return 0;
    if (fa || fb) return 2;
    if (std::abs(a.mv.dx - b.mv.dx) >= 4 || std::abs(a.mv.dy - b.mv.dy) >= 4) return 1;
    if (!a.skip || !b.skip) return 1;
    return 0;
}

std::vector<BoundarySegment> boundary_segments(const BlockPartition& partition, int alpha) {
    if (!valid_scale(alpha)) throw ParameterError("alpha must be 2, 3 or 4");
    const Plane<std::int32_t> owner = leaf_index_map(partition);
    if ((owner < 0).any()) throw ParameterError("partition does not cover the frame");

    std::vector<BoundarySegment> segments;
    const auto& leaves = partition.leaves;
    for (EdgeOrientation orientation : {EdgeOrientation::Vertical, EdgeOrientation::Horizontal}) {
        const bool vertical = orientation == EdgeOrientation::Vertical;
        for (std::size_t qi = 0; qi < leaves.size(); ++qi) {
            const BlockNode& q = leaves[qi];
            if ((vertical ? q.x : q.y) == 0) continue;
            const int begin = alpha * (vertical ? q.y : q.x);
            const int end = alpha * (vertical ? q.y + q.h : q.x + q.w);
            for (int s = begin; s < end; s += 4) {
                const int lr = s / alpha;
                const int pi = vertical ? owner(lr, q.x - 1) : owner(q.y - 1, lr);
                BoundarySegment seg;
                seg.orientation = orientation;
                seg.position = alpha * (vertical ? q.x : q.y);
                seg.start = s;
                seg.extent = std::min(4, end - s);
                seg.p_leaf = pi;
                seg.q_leaf = static_cast<int>(qi);
                seg.bs = compute_boundary_strength(leaves[pi], q);
                segments.push_back(seg);
            }
        }
    }
    return segments;
}

PicturePlane deblock_frame(const PicturePlane& frame, const BlockPartition& partition, int alpha,
                           const DeblockConfig& cfg) {
    cfg.validate();
    if (!valid_scale(alpha)) throw ParameterError("alpha must be 2, 3 or 4");
    if (frame.rows() != partition.frame_height * alpha || frame.cols() != partition.frame_width * alpha) {
        throw ParameterError("frame must be alpha times the partition size");
    }
    PicturePlane out = frame;
    if (!cfg.enabled) return out;

    const auto& leaves = partition.leaves;
    for (const BoundarySegment& seg : boundary_segments(partition, alpha)) {
        if (seg.bs == 0) continue;
        const bool vertical = seg.orientation == EdgeOrientation::Vertical;
        const BlockNode& p = leaves[seg.p_leaf];
        const BlockNode& q = leaves[seg.q_leaf];
        // Both sides need three samples for the activity measure.
        const int p_extent = alpha * (vertical ? p.w : p.h);
        const int q_extent = alpha * (vertical ? q.w : q.h);
        if (p_extent < 3 || q_extent < 3) continue;
        filter_segment(out, seg, cfg);
    }
    return out;
}

}  // namespace fast

#pragma once

#include <cstdint>
#include <vector>

#include "fast/plane.hpp"

namespace fast {

struct DeblockConfig {
    int beta = 24;  // activity threshold: segments with d >= beta are treated as true edges
    int tc = 6;     // clipping bound on the p0/q0 correction (p1/q1 use tc >> 1)
    bool enabled = true;

    void validate() const {
        if (beta < 0 || tc < 0) throw ParameterError("beta and tc must be non-negative");
    }
};

enum class EdgeOrientation : std::uint8_t { Vertical, Horizontal };

/// A run of up to four HR lines crossing one block boundary. For a vertical edge `position` is the
/// HR column of the first q sample and `start` the first HR row; horizontal edges swap the axes.
struct BoundarySegment {
    EdgeOrientation orientation = EdgeOrientation::Vertical;
    int position = 0;
    int start = 0;
    int extent = 4;
    int bs = 0;
    int p_leaf = -1;
    int q_leaf = -1;

    friend bool operator==(const BoundarySegment&, const BoundarySegment&) = default;
};

/// bs = 2 where exactly one side fell back to bicubic, 0 where both did (they are crops of the same
/// bicubic frame), otherwise 1 for an MV difference of at least one integer pixel or a non-skip
/// side, else 0. Throws std::logic_error for leaves that do not share an edge.
int compute_boundary_strength(const BlockNode& a, const BlockNode& b);

/// Every internal boundary segment on the alpha-scaled block grid, vertical edges first.
std::vector<BoundarySegment> boundary_segments(const BlockPartition& partition, int alpha);

/// Filters `frame` (alpha times the partition size) across all bs > 0 segments: vertical pass then
/// horizontal pass, touching at most two samples on each side of a boundary.
PicturePlane deblock_frame(const PicturePlane& frame, const BlockPartition& partition, int alpha,
                           const DeblockConfig& cfg);

}  // namespace fast

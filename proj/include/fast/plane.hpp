#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "fast/errors.hpp"

namespace fast {

// A plane is a dense row-major grid: rows() == height, cols() == width, (row, col) == (y, x).
template <typename Sample>
using Plane = Eigen::Array<Sample, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PicturePlane = Plane<std::uint8_t>;
using ResidualPlane = Plane<std::int16_t>;
using RealPlane = Plane<double>;

/// Legal value range for each sample kind.
template <typename Sample>
struct SampleRange;

template <>
struct SampleRange<std::uint8_t> {
    static constexpr int lo = 0;
    static constexpr int hi = 255;
};

template <>
struct SampleRange<std::int16_t> {
    static constexpr int lo = -255;
    static constexpr int hi = 255;
};

template <typename Derived>
int width(const Eigen::DenseBase<Derived>& p) {
    return static_cast<int>(p.cols());
}

template <typename Derived>
int height(const Eigen::DenseBase<Derived>& p) {
    return static_cast<int>(p.rows());
}

template <typename A, typename B>
bool same_size(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

/// Bit-exact equality including dimensions (Eigen's == is coefficient-wise).
template <typename A, typename B>
bool planes_equal(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
    return same_size(a, b) && (a.derived() == b.derived()).all();
}

/// True if every sample of a residual plane lies in [-255, 255].
bool residual_in_range(const ResidualPlane& r);

/// Motion vector in quarter-pixel units. Positive dx points right, positive dy points down.
struct QuarterPelMV {
    int dx = 0;
    int dy = 0;

    bool is_zero() const { return dx == 0 && dy == 0; }
    bool is_integer_pel() const { return dx % 4 == 0 && dy % 4 == 0; }

    friend bool operator==(const QuarterPelMV&, const QuarterPelMV&) = default;
};

inline QuarterPelMV operator*(int s, QuarterPelMV mv) { return {s * mv.dx, s * mv.dy}; }

struct BlockRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    std::int64_t area() const { return std::int64_t{w} * h; }

    friend bool operator==(const BlockRect&, const BlockRect&) = default;
};

enum class TransferMode : std::uint8_t { Transfer = 0, BicubicFallback = 1 };

/// A quadtree leaf. `size` is the nominal (unclipped) square size of its quadtree level; w and h
/// equal size except where the block is clipped at the right/bottom frame border.
struct BlockNode {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    int size = 0;
    QuarterPelMV mv;
    bool skip = false;
    double mean_abs_residual = 0.0;
    TransferMode mode = TransferMode::Transfer;

    BlockRect rect() const { return {x, y, w, h}; }

    friend bool operator==(const BlockNode&, const BlockNode&) = default;
};

/// Leaves in depth-first quadtree order of 64x64 superblocks taken in raster order.
struct BlockPartition {
    int frame_width = 0;
    int frame_height = 0;
    std::vector<BlockNode> leaves;

    friend bool operator==(const BlockPartition&, const BlockPartition&) = default;
};

/// True if the leaves are disjoint and cover every pixel of the frame exactly once.
bool tiles_exactly(const BlockPartition& partition);

/// Per-pixel leaf index (row-major, frame_width x frame_height). Throws BoundsError for leaves
/// outside the frame and ParameterError for overlapping leaves.
Plane<std::int32_t> leaf_index_map(const BlockPartition& partition);

/// Per-frame syntax elements: the sidecar unit.
struct FrameSyntax {
    int frame_index = 0;
    int reference_index = -1;
    BlockPartition partition;
    ResidualPlane residual;

    friend bool operator==(const FrameSyntax& a, const FrameSyntax& b) {
        return a.frame_index == b.frame_index && a.reference_index == b.reference_index &&
               a.partition == b.partition && planes_equal(a.residual, b.residual);
    }
};

struct GopConfig {
    int gop_length = 16;

    void validate() const {
        if (gop_length < 1) throw ParameterError("gop_length must be >= 1");
    }
    bool is_keyframe(int frame_index) const { return frame_index % gop_length == 0; }
};

inline void check_region(int plane_width, int plane_height, const BlockRect& r) {
    if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.x + r.w > plane_width ||
        r.y + r.h > plane_height) {
        throw BoundsError("block (" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                          std::to_string(r.w) + "x" + std::to_string(r.h) + ") outside " +
                          std::to_string(plane_width) + "x" + std::to_string(plane_height) +
                          " plane");
    }
}

/// The w x h sub-grid of `plane` at the block's position, as an Eigen block expression (no copy).
template <typename Derived>
auto block_region_view(Eigen::DenseBase<Derived>& plane, const BlockRect& r) {
    check_region(width(plane), height(plane), r);
    return plane.block(r.y, r.x, r.h, r.w);
}

template <typename Derived>
auto block_region_view(const Eigen::DenseBase<Derived>& plane, const BlockRect& r) {
    check_region(width(plane), height(plane), r);
    return plane.block(r.y, r.x, r.h, r.w);
}

template <typename Derived>
auto block_region_view(Eigen::DenseBase<Derived>& plane, const BlockNode& node) {
    return block_region_view(plane, node.rect());
}

template <typename Derived>
auto block_region_view(const Eigen::DenseBase<Derived>& plane, const BlockNode& node) {
    return block_region_view(plane, node.rect());
}

/// Arithmetic mean of |residual| over the block.
double mean_abs_over(const ResidualPlane& residual, const BlockRect& r);

}  // namespace fast

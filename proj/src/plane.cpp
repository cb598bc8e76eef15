#include "fast/plane.hpp"

#include <cstdlib>

namespace fast {

bool residual_in_range(const ResidualPlane& r) {
    return r.size() == 0 ||
           (r.minCoeff() >= SampleRange<std::int16_t>::lo && r.maxCoeff() <= SampleRange<std::int16_t>::hi);
}

Plane<std::int32_t> leaf_index_map(const BlockPartition& partition) {
    Plane<std::int32_t> map = Plane<std::int32_t>::Constant(partition.frame_height, partition.frame_width, -1);
    for (std::size_t i = 0; i < partition.leaves.size(); ++i) {
        auto region = block_region_view(map, partition.leaves[i].rect());
        if ((region != -1).any()) throw ParameterError("overlapping leaves in block partition");
        region.setConstant(static_cast<std::int32_t>(i));
    }
    return map;
}

bool tiles_exactly(const BlockPartition& partition) {
    if (partition.frame_width <= 0 || partition.frame_height <= 0) return false;
    std::int64_t area = 0;
    for (const auto& leaf : partition.leaves) area += leaf.rect().area();
    if (area != std::int64_t{partition.frame_width} * partition.frame_height) return false;
    try {
        return (leaf_index_map(partition) >= 0).all();
    } catch (const std::exception&) {
        return false;
    }
}

double mean_abs_over(const ResidualPlane& residual, const BlockRect& r) {
    const auto region = block_region_view(residual, r);
    return region.template cast<double>().abs().sum() / static_cast<double>(r.area());
}

}  // namespace fast

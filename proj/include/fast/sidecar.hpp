#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fast/encoder.hpp"
#include "fast/plane.hpp"

namespace fast {

/// A sidecar file: chained syntax for frames 1..N-1 of one clip.
///
/// Layout (little-endian):
///   header  "FSTX" u16 version=1, u16 flags, u32 width, u32 height, u32 frame_count,
///           u8 residual_mode, u8 deadzone, 6 reserved bytes
///   frame   u32 frame_index, u32 leaf_count,
///           leaf_count x { u16 x, u16 y, u8 log2w, u8 log2h, i16 dx_qpel, i16 dy_qpel, u8 skip, u8 mode }
///           then w*h i16 residual samples (row-major) for each non-skip leaf in leaf order.
/// log2w/log2h encode the nominal quadtree size; the stored extent is min(2^code, width - x).
struct SyntaxSequence {
    int width = 0;
    int height = 0;
    ResidualMode residual_mode = ResidualMode::Lossless;
    int deadzone = 0;
    std::vector<FrameSyntax> frames;

    friend bool operator==(const SyntaxSequence&, const SyntaxSequence&) = default;
};

inline constexpr std::uint16_t kSidecarVersion = 1;
inline constexpr std::size_t kSidecarHeaderBytes = 28;
inline constexpr std::size_t kSidecarLeafBytes = 12;

std::string serialize_sidecar(const SyntaxSequence& seq);
SyntaxSequence parse_sidecar(const std::string& bytes);

void write_sidecar(const std::filesystem::path& path, const SyntaxSequence& seq);
SyntaxSequence read_sidecar(const std::filesystem::path& path);

}  // namespace fast

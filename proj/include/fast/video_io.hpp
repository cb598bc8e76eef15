#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fast/plane.hpp"

namespace fast {

enum class ChromaFormat { Mono, C420, C422, C444 };

struct YuvFrame {
    PicturePlane y;
    PicturePlane u;  // empty for Mono
    PicturePlane v;
};

struct Video {
    int width = 0;
    int height = 0;
    ChromaFormat chroma = ChromaFormat::Mono;
    std::string frame_rate = "30:1";
    std::string aspect = "1:1";
    std::vector<YuvFrame> frames;
};

/// Y4M file (8-bit 4:2:0 / 4:2:2 / 4:4:4 / mono), a single PGM or PNG image, or a directory of
/// PGM/PNG frames taken in lexicographic order. Throws IoError on unreadable or unsupported input.
Video read_video(const std::filesystem::path& path);

/// ".y4m" paths get a Y4M stream; anything else is treated as a directory of frame_NNNN.pgm files.
void write_video(const std::filesystem::path& path, const Video& video);

PicturePlane read_image(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const PicturePlane& plane);

std::vector<PicturePlane> luma_planes(const Video& video);

/// Wraps super-resolved luma planes with bicubically upscaled chroma from `lr`.
Video assemble_upscaled(const Video& lr, std::vector<PicturePlane> hr_luma, int alpha);

}  // namespace fast

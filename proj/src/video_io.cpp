#include "fast/video_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fast/sampling.hpp"
#include "fast/sr.hpp"

namespace fast {
namespace {

std::string lower_ext(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::pair<int, int> chroma_size(ChromaFormat c, int w, int h) {
    switch (c) {
        case ChromaFormat::Mono: return {0, 0};
        case ChromaFormat::C420: return {(w + 1) / 2, (h + 1) / 2};
        case ChromaFormat::C422: return {(w + 1) / 2, h};
        case ChromaFormat::C444: return {w, h};
    }
    return {0, 0};
}

const char* chroma_tag(ChromaFormat c) {
    switch (c) {
        case ChromaFormat::Mono: return "Cmono";
        case ChromaFormat::C420: return "C420jpeg";
        case ChromaFormat::C422: return "C422";
        case ChromaFormat::C444: return "C444";
    }
    return "C420jpeg";
}

Video read_y4m(const std::filesystem::path& path) {
    const std::string data = slurp(path);
    const std::size_t eol = data.find('\n');
    if (data.rfind("YUV4MPEG2", 0) != 0 || eol == std::string::npos) throw IoError(path.string() + ": not a Y4M stream");

    Video v;
    v.chroma = ChromaFormat::C420;
    std::istringstream header(data.substr(10, eol - 10));
    std::string tok;
    while (header >> tok) {
        const char key = tok[0];
        const std::string val = tok.substr(1);
        if (key == 'W') v.width = std::stoi(val);
        else if (key == 'H') v.height = std::stoi(val);
        else if (key == 'F') v.frame_rate = val;
        else if (key == 'A') v.aspect = val;
        else if (key == 'C') {
            if (val == "420" || val == "420jpeg" || val == "420paldv" || val == "420mpeg2") v.chroma = ChromaFormat::C420;
            else if (val == "422") v.chroma = ChromaFormat::C422;
            else if (val == "444") v.chroma = ChromaFormat::C444;
            else if (val == "mono") v.chroma = ChromaFormat::Mono;
            else throw IoError(path.string() + ": unsupported Y4M colour space C" + val);
        }
    }
    if (v.width <= 0 || v.height <= 0) throw IoError(path.string() + ": Y4M header lacks frame dimensions");

    const auto [cw, ch] = chroma_size(v.chroma, v.width, v.height);
    const std::size_t luma = static_cast<std::size_t>(v.width) * v.height;
    const std::size_t chroma = static_cast<std::size_t>(cw) * ch;
    std::size_t pos = eol + 1;
    while (pos < data.size()) {
        const std::size_t line_end = data.find('\n', pos);
        if (data.compare(pos, 5, "FRAME") != 0 || line_end == std::string::npos) {
            throw IoError(path.string() + ": malformed FRAME marker at byte " + std::to_string(pos));
        }
        pos = line_end + 1;
        if (data.size() - pos < luma + 2 * chroma) throw IoError(path.string() + ": truncated frame");
        auto take = [&](int w, int h) {
            PicturePlane p(h, w);
            std::memcpy(p.data(), data.data() + pos, static_cast<std::size_t>(w) * h);
            pos += static_cast<std::size_t>(w) * h;
            return p;
        };
        YuvFrame f;
        f.y = take(v.width, v.height);
        if (chroma) {
            f.u = take(cw, ch);
            f.v = take(cw, ch);
        }
        v.frames.push_back(std::move(f));
    }
    return v;
}

PicturePlane read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw IoError(path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    PicturePlane plane(image.height, image.width);
    if (!png_image_finish_read(&image, nullptr, plane.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path.string() + ": " + msg);
    }
    return plane;
}

Video video_from_planes(std::vector<PicturePlane> planes) {
    Video v;
    v.width = width(planes.front());
    v.height = height(planes.front());
    for (auto& p : planes) {
        if (width(p) != v.width || height(p) != v.height) throw IoError("frames in the input differ in size");
        v.frames.push_back({std::move(p), {}, {}});
    }
    return v;
}

}  // namespace

PicturePlane read_image(const std::filesystem::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pgm") {
        try {
            return decode_pgm(slurp(path));
        } catch (const FormatError& e) {
            throw IoError(path.string() + ": " + e.what());
        }
    }
    throw IoError(path.string() + ": unsupported image format");
}

void write_pgm_file(const std::filesystem::path& path, const PicturePlane& plane) {
    const std::string bytes = encode_pgm(plane);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Video read_video(const std::filesystem::path& path) {
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            const std::string ext = lower_ext(entry.path());
            if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw IoError(path.string() + ": no PGM/PNG frames in directory");
        std::vector<PicturePlane> planes;
        for (const auto& f : files) planes.push_back(read_image(f));
        return video_from_planes(std::move(planes));
    }
    if (!std::filesystem::is_regular_file(path, ec)) throw IoError(path.string() + ": no such file");
    const std::string ext = lower_ext(path);
    if (ext == ".y4m") return read_y4m(path);
    if (ext == ".pgm" || ext == ".png") return video_from_planes({read_image(path)});
    throw IoError(path.string() + ": unsupported input format (expected .y4m, .pgm, .png or a directory)");
}

void write_video(const std::filesystem::path& path, const Video& video) {
    if (lower_ext(path) == ".y4m") {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out << "YUV4MPEG2 W" << video.width << " H" << video.height << " F" << video.frame_rate << " Ip A"
            << video.aspect << ' ' << chroma_tag(video.chroma) << '\n';
        for (const YuvFrame& f : video.frames) {
            out << "FRAME\n";
            for (const PicturePlane* p : {&f.y, &f.u, &f.v}) {
                out.write(reinterpret_cast<const char*>(p->data()), static_cast<std::streamsize>(p->size()));
            }
        }
        if (!out) throw IoError("failed writing " + path.string());
        return;
    }
    std::filesystem::create_directories(path);
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.pgm", i);
        write_pgm_file(path / name, video.frames[i].y);
    }
}

std::vector<PicturePlane> luma_planes(const Video& video) {
    std::vector<PicturePlane> out;
    out.reserve(video.frames.size());
    for (const auto& f : video.frames) out.push_back(f.y);
    return out;
}

Video assemble_upscaled(const Video& lr, std::vector<PicturePlane> hr_luma, int alpha) {
    if (hr_luma.size() != lr.frames.size()) throw ParameterError("luma frame count differs from the input");
    Video hr;
    hr.width = lr.width * alpha;
    hr.height = lr.height * alpha;
    hr.chroma = lr.chroma;
    hr.frame_rate = lr.frame_rate;
    hr.aspect = lr.aspect;
    const auto [cw, ch] = chroma_size(lr.chroma, hr.width, hr.height);
    for (std::size_t i = 0; i < hr_luma.size(); ++i) {
        YuvFrame f;
        f.y = std::move(hr_luma[i]);
        if (lr.chroma != ChromaFormat::Mono) {
            // Chroma is bicubic only; crop in case odd LR chroma sizes overshoot.
            f.u = bicubic_upsample(lr.frames[i].u, alpha).topLeftCorner(ch, cw);
            f.v = bicubic_upsample(lr.frames[i].v, alpha).topLeftCorner(ch, cw);
        }
        hr.frames.push_back(std::move(f));
    }
    return hr;
}

}  // namespace fast

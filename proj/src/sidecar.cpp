#include "fast/sidecar.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace fast {
namespace {

class ByteWriter {
public:
    void u8(unsigned v) { out_.push_back(static_cast<char>(v & 0xffu)); }
    void u16(unsigned v) {
        u8(v);
        u8(v >> 8);
    }
    void u32(std::uint32_t v) {
        u16(v & 0xffffu);
        u16(v >> 16);
    }
    void i16(int v) { u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v))); }
    void raw(const char* s, std::size_t n) { out_.append(s, n); }

    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == bytes_.size(); }

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated sidecar while reading ") + what, pos_);
    }
    unsigned u8(const char* what) {
        need(1, what);
        return static_cast<unsigned char>(bytes_[pos_++]);
    }
    unsigned u16(const char* what) {
        need(2, what);
        const unsigned lo = u8(what);
        return lo | (u8(what) << 8);
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        const std::uint32_t lo = u16(what);
        return lo | (std::uint32_t{u16(what)} << 16);
    }
    int i16(const char* what) { return static_cast<std::int16_t>(static_cast<std::uint16_t>(u16(what))); }
    void skip(std::size_t n, const char* what) {
        need(n, what);
        pos_ += n;
    }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

void check_leaf_geometry(const BlockNode& leaf, int fw, int fh) {
    if (!is_pow2(leaf.size) || leaf.size < 4 || leaf.size > 64) {
        throw ParameterError("leaf nominal size must be a power of two in [4, 64]");
    }
    if (leaf.x < 0 || leaf.y < 0 || leaf.x >= fw || leaf.y >= fh || leaf.x > 0xffff || leaf.y > 0xffff) {
        throw ParameterError("leaf position outside the frame");
    }
    if (leaf.w != std::min(leaf.size, fw - leaf.x) || leaf.h != std::min(leaf.size, fh - leaf.y)) {
        throw ParameterError("leaf extent must equal its nominal size clipped at the frame border");
    }
}

}  // namespace

std::string serialize_sidecar(const SyntaxSequence& seq) {
    if (seq.width < 0 || seq.height < 0) throw ParameterError("negative sidecar dimensions");
    if (seq.deadzone < 0 || seq.deadzone > 255) throw ParameterError("deadzone must fit in one byte");

    ByteWriter w;
    w.raw("FSTX", 4);
    w.u16(kSidecarVersion);
    w.u16(0);
    w.u32(static_cast<std::uint32_t>(seq.width));
    w.u32(static_cast<std::uint32_t>(seq.height));
    w.u32(static_cast<std::uint32_t>(seq.frames.size()));
    w.u8(static_cast<unsigned>(seq.residual_mode));
    w.u8(static_cast<unsigned>(seq.deadzone));
    for (int i = 0; i < 6; ++i) w.u8(0);

    for (const FrameSyntax& f : seq.frames) {
        const auto& part = f.partition;
        if (part.frame_width != seq.width || part.frame_height != seq.height ||
            width(f.residual) != seq.width || height(f.residual) != seq.height) {
            throw ParameterError("frame syntax dimensions differ from the sequence header");
        }
        if (f.frame_index < 0) throw ParameterError("negative frame index");
        w.u32(static_cast<std::uint32_t>(f.frame_index));
        w.u32(static_cast<std::uint32_t>(part.leaves.size()));
        for (const BlockNode& leaf : part.leaves) {
            check_leaf_geometry(leaf, seq.width, seq.height);
            if (std::abs(leaf.mv.dx) > std::numeric_limits<std::int16_t>::max() ||
                std::abs(leaf.mv.dy) > std::numeric_limits<std::int16_t>::max()) {
                throw ParameterError("motion vector does not fit in 16 bits");
            }
            const auto code = static_cast<unsigned>(std::countr_zero(static_cast<unsigned>(leaf.size)));
            w.u16(static_cast<unsigned>(leaf.x));
            w.u16(static_cast<unsigned>(leaf.y));
            w.u8(code);
            w.u8(code);
            w.i16(leaf.mv.dx);
            w.i16(leaf.mv.dy);
            w.u8(leaf.skip ? 1 : 0);
            w.u8(static_cast<unsigned>(leaf.mode));
        }
        for (const BlockNode& leaf : part.leaves) {
            const auto region = block_region_view(f.residual, leaf);
            if (leaf.skip) {
                if ((region != 0).any()) throw ParameterError("skip leaf carries a non-zero residual");
                continue;
            }
            for (int r = 0; r < leaf.h; ++r)
                for (int c = 0; c < leaf.w; ++c) w.i16(region(r, c));
        }
    }
    return w.take();
}

SyntaxSequence parse_sidecar(const std::string& bytes) {
    ByteReader in(bytes);
    in.need(4, "magic");
    if (bytes.compare(0, 4, "FSTX") != 0) throw FormatError("bad sidecar magic", 0);
    in.skip(4, "magic");
    const std::size_t version_at = in.offset();
    if (in.u16("version") != kSidecarVersion) throw FormatError("unsupported sidecar version", version_at);
    in.u16("flags");

    SyntaxSequence seq;
    const std::uint32_t w = in.u32("width");
    const std::uint32_t h = in.u32("height");
    if (w > 0xffffu + 1 || h > 0xffffu + 1) throw FormatError("frame dimensions too large", 8);
    seq.width = static_cast<int>(w);
    seq.height = static_cast<int>(h);
    const std::uint32_t frame_count = in.u32("frame count");
    const std::size_t mode_at = in.offset();
    const unsigned mode = in.u8("residual mode");
    if (mode > 1) throw FormatError("unknown residual mode", mode_at);
    seq.residual_mode = static_cast<ResidualMode>(mode);
    seq.deadzone = static_cast<int>(in.u8("deadzone"));
    in.skip(6, "reserved bytes");

    for (std::uint32_t fi = 0; fi < frame_count; ++fi) {
        if (seq.width == 0 || seq.height == 0) throw FormatError("frames present in a zero-sized sequence", in.offset());
        FrameSyntax f;
        f.frame_index = static_cast<int>(in.u32("frame index"));
        f.reference_index = f.frame_index - 1;
        const std::size_t count_at = in.offset();
        const std::uint32_t leaf_count = in.u32("leaf count");
        if (leaf_count > static_cast<std::uint64_t>(seq.width) * seq.height) {
            throw FormatError("leaf count exceeds pixel count", count_at);
        }
        in.need(std::size_t{leaf_count} * kSidecarLeafBytes, "leaf table");

        auto& part = f.partition;
        part.frame_width = seq.width;
        part.frame_height = seq.height;
        part.leaves.reserve(leaf_count);
        for (std::uint32_t li = 0; li < leaf_count; ++li) {
            const std::size_t leaf_at = in.offset();
            BlockNode leaf;
            leaf.x = static_cast<int>(in.u16("leaf x"));
            leaf.y = static_cast<int>(in.u16("leaf y"));
            const unsigned wcode = in.u8("leaf width code");
            const unsigned hcode = in.u8("leaf height code");
            leaf.mv.dx = in.i16("mv dx");
            leaf.mv.dy = in.i16("mv dy");
            const unsigned skip = in.u8("skip flag");
            const unsigned lmode = in.u8("leaf mode");
            if (wcode != hcode || wcode < 2 || wcode > 6) throw FormatError("invalid block size code", leaf_at);
            if (skip > 1 || lmode > 1) throw FormatError("invalid skip flag or mode", leaf_at);
            if (leaf.x >= seq.width || leaf.y >= seq.height) throw FormatError("leaf outside the frame", leaf_at);
            leaf.size = 1 << wcode;
            leaf.w = std::min(leaf.size, seq.width - leaf.x);
            leaf.h = std::min(leaf.size, seq.height - leaf.y);
            leaf.skip = skip == 1;
            leaf.mode = static_cast<TransferMode>(lmode);
            part.leaves.push_back(leaf);
        }
        if (!tiles_exactly(part)) throw FormatError("leaves do not tile the frame", count_at);

        f.residual = ResidualPlane::Zero(seq.height, seq.width);
        for (BlockNode& leaf : part.leaves) {
            if (!leaf.skip) {
                const std::size_t payload_at = in.offset();
                in.need(static_cast<std::size_t>(leaf.rect().area()) * 2, "residual payload");
                auto region = block_region_view(f.residual, leaf);
                for (int r = 0; r < leaf.h; ++r)
                    for (int c = 0; c < leaf.w; ++c) region(r, c) = static_cast<std::int16_t>(in.i16("residual"));
                if (region.minCoeff() < -255 || region.maxCoeff() > 255) {
                    throw FormatError("residual sample outside [-255, 255]", payload_at);
                }
            }
            leaf.mean_abs_residual = mean_abs_over(f.residual, leaf.rect());
        }
        seq.frames.push_back(std::move(f));
    }
    if (!in.at_end()) throw FormatError("trailing bytes after the last frame", in.offset());
    return seq;
}

void write_sidecar(const std::filesystem::path& path, const SyntaxSequence& seq) {
    const std::string bytes = serialize_sidecar(seq);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

SyntaxSequence read_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_sidecar(bytes);
}

}  // namespace fast

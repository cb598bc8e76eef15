#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <tuple>

#include "fast/sr.hpp"

namespace fast::test {

PicturePlane random_plane(int w, int h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> d(0, 255);
    PicturePlane p(h, w);
    for (int i = 0; i < p.size(); ++i) p.data()[i] = static_cast<std::uint8_t>(d(rng));
    return p;
}

PicturePlane smooth_texture(int w, int h, std::uint32_t seed, int r) {
    const PicturePlane noise = random_plane(w, h, seed);
    PicturePlane out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int sum = 0;
            int n = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    sum += noise(std::clamp(y + dy, 0, h - 1), std::clamp(x + dx, 0, w - 1));
                    ++n;
                }
            out(y, x) = static_cast<std::uint8_t>((sum + n / 2) / n);
        }
    }
    return out;
}

PicturePlane shift_plane(const PicturePlane& src, int dx, int dy) {
    const int w = width(src);
    const int h = height(src);
    PicturePlane out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(y, x) = src(std::clamp(y - dy, 0, h - 1), std::clamp(x - dx, 0, w - 1));
    return out;
}

PicturePlane gaussian_blob(int w, int h, double sigma) {
    PicturePlane p(h, w);
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            p(y, x) = static_cast<std::uint8_t>(std::lround(30.0 + 200.0 * std::exp(-r2 / (2 * sigma * sigma))));
        }
    return p;
}

PicturePlane astronaut() {
    const std::string path = std::string(FAST_TEST_DATA_DIR) + "/astronaut_gray.pgm";
    std::ifstream in(path, std::ios::binary);
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_pgm(bytes);
}

std::vector<PicturePlane> natural_clip(int w, int h, int frames, int pan_x, int pan_y, bool moving_object) {
    const PicturePlane src = astronaut();
    std::vector<PicturePlane> clip;
    const int x0 = pan_x < 0 ? -pan_x * (frames - 1) : 0;
    const int y0 = pan_y < 0 ? -pan_y * (frames - 1) : 0;
    const PicturePlane patch = src.block(20, 300, 48, 48);  // a textured piece of the image
    for (int t = 0; t < frames; ++t) {
        PicturePlane f = src.block(y0 + pan_y * t, x0 + pan_x * t, h, w);
        if (moving_object) {
            const int px = std::clamp(w / 2 + 3 * t, 0, w - 48);
            const int py = std::clamp(h / 3 + 2 * t, 0, h - 48);
            f.block(py, px, 48, 48) = patch;
        }
        clip.push_back(std::move(f));
    }
    return clip;
}

namespace {

void random_split(int x, int y, int size, int w, int h, std::mt19937& rng, std::vector<BlockNode>& leaves) {
    std::bernoulli_distribution split(0.45);
    if (size > 8 && split(rng)) {
        const int half = size / 2;
        for (const auto& [ox, oy] : {std::pair{0, 0}, {half, 0}, {0, half}, {half, half}}) {
            if (x + ox < w && y + oy < h) random_split(x + ox, y + oy, half, w, h, rng, leaves);
        }
        return;
    }
    BlockNode leaf;
    leaf.x = x;
    leaf.y = y;
    leaf.size = size;
    leaf.w = std::min(size, w - x);
    leaf.h = std::min(size, h - y);
    std::uniform_int_distribution<int> mv(-40, 40);
    leaf.mv = {mv(rng), mv(rng)};
    leaf.skip = std::bernoulli_distribution(0.3)(rng);
    leaf.mode = std::bernoulli_distribution(0.2)(rng) ? TransferMode::BicubicFallback : TransferMode::Transfer;
    leaves.push_back(leaf);
}

}  // namespace

FrameSyntax random_syntax(int w, int h, std::mt19937& rng, int frame_index) {
    FrameSyntax f;
    f.frame_index = frame_index;
    f.reference_index = frame_index - 1;
    f.partition.frame_width = w;
    f.partition.frame_height = h;
    for (int y = 0; y < h; y += 64)
        for (int x = 0; x < w; x += 64) random_split(x, y, 64, w, h, rng, f.partition.leaves);
    f.residual = ResidualPlane::Zero(h, w);
    std::uniform_int_distribution<int> value(-255, 255);
    for (BlockNode& leaf : f.partition.leaves) {
        if (!leaf.skip) {
            auto region = block_region_view(f.residual, leaf);
            for (int r = 0; r < leaf.h; ++r)
                for (int c = 0; c < leaf.w; ++c) region(r, c) = static_cast<std::int16_t>(value(rng));
            region(0, 0) = 7;  // guarantees a non-zero residual
        }
        leaf.mean_abs_residual = mean_abs_over(f.residual, leaf.rect());
    }
    return f;
}

double oracle_kernel(double x) {
    x = std::abs(x);
    if (x <= 1.0) return 1.5 * x * x * x - 2.5 * x * x + 1.0;
    if (x < 2.0) return -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0;
    return 0.0;
}

double oracle_qpel_value(const PicturePlane& ref, int x, int y, QuarterPelMV mv) {
    const int w = width(ref);
    const int h = height(ref);
    const double sx = x + mv.dx / 4.0;
    const double sy = y + mv.dy / 4.0;
    const int bx = static_cast<int>(std::floor(sx));
    const int by = static_cast<int>(std::floor(sy));
    const double tx = sx - bx;
    const double ty = sy - by;
    // Separable: four horizontal interpolations, then one vertical.
    double rows[4];
    for (int j = 0; j < 4; ++j) {
        const int ry = std::clamp(by - 1 + j, 0, h - 1);
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
            const int rx = std::clamp(bx - 1 + i, 0, w - 1);
            acc += oracle_kernel(tx - (i - 1)) * ref(ry, rx);
        }
        rows[j] = acc;
    }
    double v = 0.0;
    for (int j = 0; j < 4; ++j) v += oracle_kernel(ty - (j - 1)) * rows[j];
    return v;
}

std::vector<std::vector<int>> oracle_upsample_block(const ResidualPlane& residual, const BlockRect& r, int alpha) {
    const int W = r.w * alpha;
    const int H = r.h * alpha;
    auto at = [&](int yy, int xx) {
        return double(residual(r.y + std::clamp(yy, 0, r.h - 1), r.x + std::clamp(xx, 0, r.w - 1)));
    };
    std::vector<std::vector<int>> out(H, std::vector<int>(W));
    for (int oy = 0; oy < H; ++oy) {
        const double cy = (oy + 0.5) / alpha - 0.5;
        const int by = static_cast<int>(std::floor(cy));
        for (int ox = 0; ox < W; ++ox) {
            const double cx = (ox + 0.5) / alpha - 0.5;
            const int bx = static_cast<int>(std::floor(cx));
            double rows[4];
            for (int j = 0; j < 4; ++j) {
                double acc = 0.0;
                for (int i = 0; i < 4; ++i) acc += oracle_kernel(cx - (bx - 1 + i)) * at(by - 1 + j, bx - 1 + i);
                rows[j] = acc;
            }
            double v = 0.0;
            for (int j = 0; j < 4; ++j) v += oracle_kernel(cy - (by - 1 + j)) * rows[j];
            out[oy][ox] = std::clamp(static_cast<int>(std::round(v)), -255, 255);
        }
    }
    return out;
}

PicturePlane oracle_transfer(const PicturePlane& prev_hr, const FrameSyntax& syntax, int alpha) {
    PicturePlane out(prev_hr.rows(), prev_hr.cols());
    for (const BlockNode& leaf : syntax.partition.leaves) {
        const auto up = oracle_upsample_block(syntax.residual, leaf.rect(), alpha);
        const QuarterPelMV hr_mv{alpha * leaf.mv.dx, alpha * leaf.mv.dy};
        for (int y = 0; y < leaf.h * alpha; ++y) {
            for (int x = 0; x < leaf.w * alpha; ++x) {
                const int hx = leaf.x * alpha + x;
                const int hy = leaf.y * alpha + y;
                const int pred = std::clamp(static_cast<int>(std::round(oracle_qpel_value(prev_hr, hx, hy, hr_mv))), 0, 255);
                out(hy, hx) = static_cast<std::uint8_t>(std::clamp(pred + up[y][x], 0, 255));
            }
        }
    }
    return out;
}

BruteForceMatch brute_force_search(const PicturePlane& ref, const PicturePlane& cur, const BlockRect& r, int range) {
    const int w = width(ref);
    const int h = height(ref);
    std::vector<BruteForceMatch> all;
    for (int dy = -range; dy <= range; ++dy)
        for (int dx = -range; dx <= range; ++dx) {
            std::int64_t sad = 0;
            for (int y = 0; y < r.h; ++y)
                for (int x = 0; x < r.w; ++x)
                    sad += std::abs(int(cur(r.y + y, r.x + x)) -
                                    int(ref(std::clamp(r.y + y + dy, 0, h - 1), std::clamp(r.x + x + dx, 0, w - 1))));
            all.push_back({dx, dy, sad});
        }
    return *std::min_element(all.begin(), all.end(), [](const BruteForceMatch& a, const BruteForceMatch& b) {
        return std::make_tuple(a.sad, std::abs(a.dx) + std::abs(a.dy), a.dy, a.dx) <
               std::make_tuple(b.sad, std::abs(b.dx) + std::abs(b.dy), b.dy, b.dx);
    });
}

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "fastsr_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace fast::test

#include <doctest.h>

#include <map>
#include <random>

#include "fast/encoder.hpp"
#include "fast/sampling.hpp"
#include "test_support.hpp"

using namespace fast;

TEST_CASE("integer search examples") {
    const PicturePlane ref = test::smooth_texture(64, 64, 21);
    const MotionResult same = estimate_motion_integer(ref, ref, {16, 16, 16, 16}, 8);
    CHECK(same.mv == QuarterPelMV{0, 0});
    CHECK(same.sad == 0);

    const PicturePlane cur = test::shift_plane(ref, 3, 0);
    for (const BlockRect r : {BlockRect{16, 16, 16, 16}, BlockRect{32, 8, 8, 8}, BlockRect{8, 40, 16, 8}}) {
        const MotionResult m = estimate_motion_integer(ref, cur, r, 8);
        CHECK(m.mv == QuarterPelMV{-12, 0});
        const auto bf = test::brute_force_search(ref, cur, r, 8);
        CHECK(m.mv == QuarterPelMV{4 * bf.dx, 4 * bf.dy});
        CHECK(m.sad == bf.sad);
    }
}

TEST_CASE("integer search equals brute force on uncorrelated noise") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const PicturePlane ref = test::random_plane(40, 40, 100 + trial);
        const PicturePlane cur = test::random_plane(40, 40, 200 + trial);
        const int bw = 4 + static_cast<int>(rng() % 13);
        const int bh = 4 + static_cast<int>(rng() % 13);
        const BlockRect r{static_cast<int>(rng() % (40 - bw + 1)), static_cast<int>(rng() % (40 - bh + 1)), bw, bh};
        const MotionResult m = estimate_motion_integer(ref, cur, r, 6);
        const auto bf = test::brute_force_search(ref, cur, r, 6);
        CHECK(m.mv == QuarterPelMV{4 * bf.dx, 4 * bf.dy});
        CHECK(m.sad == bf.sad);
        CHECK(block_sad(ref, cur, r, m.mv) == m.sad);
    }
}

TEST_CASE("tie-break on flat frames keeps the zero vector") {
    const PicturePlane flat = PicturePlane::Constant(48, 48, 77);
    const MotionResult m = estimate_motion_integer(flat, flat, {16, 16, 16, 16}, 8);
    CHECK(m.mv == QuarterPelMV{0, 0});
    CHECK(refine_qpel(flat, flat, {16, 16, 16, 16}, m).mv == QuarterPelMV{0, 0});

    // Two equally good matches at dx=-2 and dx=+2: smaller |d| ties, then smaller dx wins.
    PicturePlane ref = PicturePlane::Constant(32, 32, 0);
    ref.col(10).setConstant(200);
    ref.col(14).setConstant(200);
    PicturePlane cur = PicturePlane::Constant(32, 32, 0);
    cur.col(12).setConstant(200);
    const MotionResult t = estimate_motion_integer(ref, cur, {11, 8, 3, 8}, 4);
    CHECK(t.sad == 0);
    CHECK(t.mv == QuarterPelMV{-8, 0});
}

TEST_CASE("sub-pel refinement") {
    const PicturePlane ref = test::smooth_texture(64, 64, 31);
    const PicturePlane cur = qpel_fetch_block(ref, 0, 0, 64, 64, {2, 0});
    const BlockRect r{24, 24, 16, 16};
    const MotionResult integer = estimate_motion_integer(ref, cur, r, 4);
    CHECK(integer.sad > 0);
    const MotionResult refined = refine_qpel(ref, cur, r, integer);
    CHECK(refined.mv.dx % 4 != 0);
    CHECK(refined.mv == QuarterPelMV{2, 0});
    CHECK(refined.sad < integer.sad);
    CHECK(refined.sad == 0);

    const PicturePlane q = qpel_fetch_block(ref, 0, 0, 64, 64, {-1, 3});
    CHECK(refine_qpel(ref, q, r, estimate_motion_integer(ref, q, r, 4)).mv == QuarterPelMV{-1, 3});
    CHECK(refine_qpel(ref, q, r, estimate_motion_integer(ref, q, r, 4), MvPrecision::Integer).mv.is_integer_pel());

    const MotionResult zero{{8, -4}, 0};
    CHECK(refine_qpel(ref, ref, r, zero).mv == QuarterPelMV{8, -4});
    CHECK_THROWS_AS(refine_qpel(ref, ref, r, MotionResult{{1, 0}, 5}), ParameterError);
}

TEST_CASE("refinement never worsens the objective") {
    for (int trial = 0; trial < 20; ++trial) {
        const PicturePlane ref = test::smooth_texture(48, 48, 300 + trial, 2);
        const PicturePlane cur = qpel_fetch_block(ref, 0, 0, 48, 48, {trial % 7 - 3, trial % 5 - 2});
        const BlockRect r{8 + trial % 16, 8 + trial % 13, 16, 16};
        const MotionResult i = estimate_motion_integer(ref, cur, r, 4);
        const MotionResult h = refine_qpel(ref, cur, r, i, MvPrecision::Half);
        const MotionResult q = refine_qpel(ref, cur, r, i, MvPrecision::Quarter);
        CHECK(i.sad >= h.sad);
        CHECK(h.sad >= q.sad);
        CHECK(block_sad(ref, cur, r, q.mv) == q.sad);
        CHECK(h.mv.dx % 2 == 0);
        CHECK(h.mv.dy % 2 == 0);
    }
}

TEST_CASE("quadtree examples") {
    EncoderConfig cfg;
    const PicturePlane a = test::random_plane(192, 128, 41);

    const BlockPartition same = build_quadtree(a, a, cfg);
    CHECK(same.leaves.size() == 6);
    for (const auto& leaf : same.leaves) CHECK(leaf.size == 64);

    PicturePlane b = a;
    b.block(8, 72, 8, 8) = a.block(8, 72, 8, 8).unaryExpr([](std::uint8_t v) { return std::uint8_t(v ^ 0x80); });
    cfg.split_threshold = 1.0;
    const BlockPartition p = build_quadtree(a, b, cfg);
    CHECK(tiles_exactly(p));
    std::map<int, int> by_size;
    for (const auto& leaf : p.leaves) ++by_size[leaf.size];
    CHECK(by_size[64] == 5);
    CHECK(by_size[32] == 3);
    CHECK(by_size[16] == 3);
    CHECK(by_size[8] == 4);
    bool found = false;
    for (const auto& leaf : p.leaves)
        if (leaf.x == 72 && leaf.y == 8) found = leaf.size == 8;
    CHECK(found);

    const PicturePlane odd = test::random_plane(100, 60, 42);
    const BlockPartition clipped = build_quadtree(odd, odd, EncoderConfig{});
    CHECK(tiles_exactly(clipped));
    REQUIRE(clipped.leaves.size() == 2);
    CHECK(clipped.leaves[1].x == 64);
    CHECK(clipped.leaves[1].w == 36);
    CHECK(clipped.leaves[1].h == 60);
    CHECK(clipped.leaves[1].size == 64);
}

TEST_CASE("quadtree tiles odd frames when splitting") {
    EncoderConfig cfg;
    cfg.split_threshold = 0.0;
    for (auto [w, h] : {std::pair{100, 60}, {37, 91}, {8, 8}, {130, 9}}) {
        const BlockPartition p = build_quadtree(test::random_plane(w, h, 1), test::random_plane(w, h, 2), cfg);
        CHECK(tiles_exactly(p));
        for (const auto& leaf : p.leaves) CHECK(leaf.size == 8);
    }
}

TEST_CASE("encode_frame examples") {
    const PicturePlane a = test::smooth_texture(96, 80, 51);

    const EncodedFrame same = encode_frame(a, a, EncoderConfig{});
    for (const auto& leaf : same.syntax.partition.leaves) {
        CHECK(leaf.skip);
        CHECK(leaf.mv.is_zero());
        CHECK(leaf.mean_abs_residual == 0.0);
    }
    CHECK(planes_equal(same.recon, a));

    for (int trial = 0; trial < 10; ++trial) {
        const PicturePlane ref = test::random_plane(72, 56, 600 + trial);
        const PicturePlane cur = test::random_plane(72, 56, 700 + trial);
        const EncodedFrame e = encode_frame(ref, cur, EncoderConfig{});
        CHECK(planes_equal(e.recon, cur));
        CHECK(planes_equal(reconstruct_frame(ref, e.syntax), cur));
        CHECK(tiles_exactly(e.syntax.partition));
    }

    CHECK_THROWS_AS(encode_frame(a, test::random_plane(96, 81, 1), EncoderConfig{}), ParameterError);
    EncoderConfig bad;
    bad.min_block = 12;
    CHECK_THROWS_AS(encode_frame(a, a, bad), ParameterError);
}

TEST_CASE("deadzone absorbs +-1 noise around the true prediction") {
    const PicturePlane ref = test::smooth_texture(96, 64, 61);
    const PicturePlane shifted = qpel_fetch_block(ref, 0, 0, 96, 64, {8, -4});
    std::mt19937 rng(62);
    PicturePlane cur = shifted;
    for (int i = 0; i < cur.size(); ++i) {
        const int v = cur.data()[i] + ((rng() & 1) ? 1 : -1);
        cur.data()[i] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    }
    EncoderConfig cfg;
    cfg.residual_mode = ResidualMode::Deadzone;
    cfg.deadzone = 2;
    const EncodedFrame e = encode_frame(ref, cur, cfg);
    for (const auto& leaf : e.syntax.partition.leaves) {
        CHECK(leaf.skip);
        CHECK(planes_equal(block_region_view(e.recon, leaf), qpel_fetch_block(ref, leaf.rect(), leaf.mv)));
    }
    CHECK(planes_equal(e.recon, shifted));
}

TEST_CASE("deadzone safety and skip soundness") {
    for (int trial = 0; trial < 10; ++trial) {
        const PicturePlane ref = test::smooth_texture(80, 64, 800 + trial);
        PicturePlane cur = qpel_fetch_block(ref, 0, 0, 80, 64, {trial - 5, 3});
        std::mt19937 rng(trial);
        for (int i = 0; i < cur.size(); ++i)
            cur.data()[i] = static_cast<std::uint8_t>(std::clamp(int(cur.data()[i]) + int(rng() % 9) - 4, 0, 255));
        EncoderConfig cfg;
        cfg.residual_mode = ResidualMode::Deadzone;
        cfg.deadzone = 1 + trial % 3;
        const EncodedFrame e = encode_frame(ref, cur, cfg);
        CHECK(((e.recon.cast<int>() - cur.cast<int>()).abs() <= cfg.deadzone).all());
        for (const auto& leaf : e.syntax.partition.leaves) {
            const bool zero = (block_region_view(e.syntax.residual, leaf) == 0).all();
            CHECK(leaf.skip == zero);
            CHECK(leaf.mean_abs_residual == doctest::Approx(mean_abs_over(e.syntax.residual, leaf.rect())));
        }
        CHECK(planes_equal(reconstruct_frame(ref, e.syntax), e.recon));
    }
}

TEST_CASE("encode_sequence chains reconstructions") {
    const auto clip = test::natural_clip(96, 64, 4, 2, 1, true);
    std::vector<PicturePlane> recon;
    EncoderConfig cfg;
    cfg.residual_mode = ResidualMode::Deadzone;
    const auto syntax = encode_sequence(clip, cfg, &recon);
    REQUIRE(syntax.size() == 3);
    REQUIRE(recon.size() == 4);
    CHECK(planes_equal(recon[0], clip[0]));
    for (int i = 0; i < 3; ++i) {
        CHECK(syntax[i].frame_index == i + 1);
        CHECK(syntax[i].reference_index == i);
        CHECK(planes_equal(reconstruct_frame(recon[i], syntax[i]), recon[i + 1]));
    }
    CHECK(encode_sequence({clip[0]}, cfg).empty());
}

#include <doctest.h>

#include <random>

#include "fast/metrics.hpp"
#include "fast/sampling.hpp"
#include "test_support.hpp"

using namespace fast;

TEST_CASE("kernel weights") {
    const CubicKernel k;
    const auto w0 = k.weights(0.0);
    CHECK(w0[0] == 0.0);
    CHECK(w0[1] == 1.0);
    CHECK(w0[2] == 0.0);
    CHECK(w0[3] == 0.0);

    // Hand-evaluated Catmull-Rom weights at the x2 sample phases.
    const auto q = k.weights(0.25);
    CHECK(q[0] == -9.0 / 128);
    CHECK(q[1] == 111.0 / 128);
    CHECK(q[2] == 29.0 / 128);
    CHECK(q[3] == -3.0 / 128);
    const auto h = k.weights(0.5);
    CHECK(h[0] == -1.0 / 16);
    CHECK(h[1] == 9.0 / 16);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double t = u(rng);
        const auto w = k.weights(t);
        CHECK(std::abs(w[0] + w[1] + w[2] + w[3] - 1.0) < 1e-12);
        CHECK(w[1] == doctest::Approx(test::oracle_kernel(t)).epsilon(1e-12));
    }
}

TEST_CASE("upsample examples") {
    CHECK(planes_equal(bicubic_upsample(PicturePlane(PicturePlane::Constant(5, 7, 128)), 2), PicturePlane::Constant(10, 14, 128)));
    CHECK(planes_equal(bicubic_upsample(PicturePlane(PicturePlane::Constant(5, 7, 128)), 3), PicturePlane::Constant(15, 21, 128)));
    CHECK(planes_equal(bicubic_upsample(PicturePlane(PicturePlane::Constant(5, 7, 128)), 4), PicturePlane::Constant(20, 28, 128)));
    CHECK(planes_equal(bicubic_upsample(ResidualPlane(ResidualPlane::Zero(6, 3)), 2), ResidualPlane::Zero(12, 6)));

    // Exact values are k/128: 0, -765, -2295, 7395, 28305 (mirrored).
    PicturePlane row(1, 5);
    row << 0, 0, 255, 0, 0;
    const PicturePlane up = bicubic_upsample(row, 2);
    REQUIRE(up.rows() == 2);
    REQUIRE(up.cols() == 10);
    const int expect_pic[10] = {0, 0, 0, 58, 221, 221, 58, 0, 0, 0};
    for (int i = 0; i < 10; ++i) {
        CHECK(up(0, i) == expect_pic[i]);
        CHECK(up(1, i) == expect_pic[i]);
    }

    ResidualPlane rrow(1, 5);
    rrow << 0, 0, 255, 0, 0;
    const ResidualPlane rup = bicubic_upsample(rrow, 2);
    const int expect_res[10] = {0, -6, -18, 58, 221, 221, 58, -18, -6, 0};
    for (int i = 0; i < 10; ++i) CHECK(rup(0, i) == expect_res[i]);

    const RealPlane real = cubic_upsample_real(rrow.cast<double>(), 2);
    CHECK(real(0, 1) == -765.0 / 128);
    CHECK(real(0, 3) == 7395.0 / 128);
    CHECK(real(0, 4) == 28305.0 / 128);

    CHECK_THROWS_AS(bicubic_upsample(row, 5), ParameterError);
    CHECK_THROWS_AS(bicubic_upsample(row, 1), ParameterError);
}

TEST_CASE("upsample matches the closed-form oracle") {
    for (int alpha : {2, 4}) {
        const PicturePlane src = test::random_plane(13, 9, 40 + alpha);
        ResidualPlane res = src.cast<std::int16_t>() * std::int16_t{2} - std::int16_t{255};
        res = res.max(std::int16_t{-255}).min(std::int16_t{255});
        const ResidualPlane up = bicubic_upsample(res, alpha);
        const auto ref = test::oracle_upsample_block(res, {0, 0, 13, 9}, alpha);
        int diffs = 0;
        for (int y = 0; y < 9 * alpha; ++y)
            for (int x = 0; x < 13 * alpha; ++x) diffs += up(y, x) != ref[y][x];
        CHECK(diffs == 0);
    }
}

TEST_CASE("downsample examples") {
    CHECK(planes_equal(bicubic_downsample(PicturePlane(PicturePlane::Constant(8, 6, 200)), 2), PicturePlane::Constant(4, 3, 200)));

    PicturePlane checker(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) checker(y, x) = ((x + y) % 2) ? 255 : 0;
    // Cell mean 127.5 rounds half away from zero.
    CHECK(planes_equal(bicubic_downsample(checker, 2), PicturePlane::Constant(4, 4, 128)));

    CHECK_THROWS_AS(bicubic_downsample(checker, 5), ParameterError);
    CHECK_THROWS_AS(bicubic_downsample(PicturePlane(PicturePlane::Zero(9, 8)), 2), ParameterError);
    CHECK_THROWS_AS(bicubic_downsample(PicturePlane(PicturePlane::Zero(8, 9)), 3), ParameterError);
}

TEST_CASE("up/down round trip on band-limited content") {
    const PicturePlane blob = test::gaussian_blob(96, 80, 18.0);
    CHECK(psnr(blob, bicubic_downsample(bicubic_upsample(blob, 2), 2)) > 40.0);
}

TEST_CASE("qpel fetch examples") {
    const PicturePlane ref = test::random_plane(32, 24, 5);
    CHECK(planes_equal(qpel_fetch_block(ref, 4, 4, 8, 8, {0, 0}), PicturePlane(ref.block(4, 4, 8, 8))));
    CHECK(planes_equal(qpel_fetch_block(ref, 4, 4, 8, 8, {4, 0}), PicturePlane(ref.block(4, 5, 8, 8))));

    PicturePlane row(1, 4);
    row << 10, 20, 30, 40;
    // (-10 + 180 + 270 - 40) / 16 = 25: the cubic reproduces a linear ramp exactly.
    CHECK(qpel_fetch_block(row, 1, 0, 1, 1, {2, 0})(0, 0) == 25);

    CHECK_THROWS_AS(qpel_fetch_block(ref, 0, 0, 0, 4, {}), ParameterError);
    CHECK_THROWS_AS(qpel_fetch_block(ref, 0, 0, 4, -1, {}), ParameterError);
}

TEST_CASE("integer-phase identity, including vectors leaving the frame") {
    const PicturePlane ref = test::random_plane(40, 30, 6);
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> d(-30, 30);
    for (int i = 0; i < 200; ++i) {
        const int dx = d(rng);
        const int dy = d(rng);
        const BlockRect r{static_cast<int>(rng() % 32), static_cast<int>(rng() % 22), 8, 8};
        const PicturePlane got = qpel_fetch_block(ref, r, {4 * dx, 4 * dy});
        PicturePlane want(8, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                want(y, x) = ref(std::clamp(r.y + y + dy, 0, 29), std::clamp(r.x + x + dx, 0, 39));
        CHECK(planes_equal(got, want));
    }
}

TEST_CASE("qpel fetch matches the straight-line oracle") {
    const PicturePlane ref = test::random_plane(24, 20, 9);
    std::mt19937 rng(10);
    std::uniform_int_distribution<int> d(-50, 50);
    int diffs = 0;
    for (int i = 0; i < 200; ++i) {
        const QuarterPelMV mv{d(rng), d(rng)};
        const PicturePlane got = qpel_fetch_block(ref, 0, 0, 24, 20, mv);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 24; ++x) {
                const int v = std::clamp(static_cast<int>(std::round(test::oracle_qpel_value(ref, x, y, mv))), 0, 255);
                diffs += got(y, x) != v;
            }
    }
    CHECK(diffs == 0);
}

TEST_CASE("shift consistency") {
    const PicturePlane ref = test::random_plane(40, 16, 12);
    const PicturePlane left = test::shift_plane(ref, -1, 0);  // left(y, x) = ref(y, x + 1)
    const PicturePlane a = qpel_fetch_block(ref, 4, 4, 30, 8, {1, 0});
    const PicturePlane b = qpel_fetch_block(left, 4, 4, 30, 8, {-3, 0});
    CHECK(planes_equal(a, b));
}

TEST_CASE("floor helpers") {
    CHECK(floor_div(-1, 4) == -1);
    CHECK(floor_mod(-1, 4) == 3);
    CHECK(floor_div(-4, 4) == -1);
    CHECK(floor_mod(-4, 4) == 0);
    CHECK(floor_div(7, 4) == 1);
    CHECK(floor_mod(7, 4) == 3);
}

#include <cmath>

#include "doctest.h"
#include "flair/errors.hpp"
#include "flair/metrics.hpp"
#include "testutil.hpp"

using namespace flair;

TEST_SUITE("metrics") {

TEST_CASE("psnr: cap and the uniform-error values") {
    Image a(16, 16, 1);
    for (double& v : a.data) v = 0.5;
    CHECK(psnr(a, a) == 100.0);

    Image b = a;
    for (double& v : b.data) v += 0.1;
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
    Image c = a;
    for (double& v : c.data) v += 0.01;
    CHECK(psnr(a, c) == doctest::Approx(40.0).epsilon(1e-9));
    CHECK_THROWS_AS(psnr(a, Image(8, 8, 1)), dimension_error);
}

TEST_CASE("psnr: symmetric and strictly decreasing in uniform error") {
    Image a(12, 12, 3);
    flair::Rng rng(3);
    for (double& v : a.data) v = rng.uniform01() * 0.5;
    double prev = 1e9;
    for (double err : {0.01, 0.02, 0.05, 0.1, 0.3}) {
        Image b = a;
        for (double& v : b.data) v += err;
        CHECK(psnr(a, b) == psnr(b, a));
        const double p = psnr(a, b);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("ssim: identical images score 1") {
    Image a = testutil::synth_textured(24, 24, 7);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ssim(a, a) == ssim(a, a));
}

TEST_CASE("ssim: inverted checkerboard is anticorrelated") {
    Image a(16, 16, 1);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) a.at(y, x, 0) = (x + y) % 2 ? 1.0 : 0.0;
    Image b = a;
    for (double& v : b.data) v = 1.0 - v;
    const double s = ssim(a, b);
    CHECK(s < 0.0);
    CHECK(s == ssim(b, a));
    CHECK(s >= -1.0);
}

TEST_CASE("ssim: equal constants score 1 through the stabilizers") {
    Image a(12, 12, 1);
    Image b(12, 12, 1);
    for (double& v : a.data) v = 0.5;
    for (double& v : b.data) v = 0.5;
    CHECK(ssim(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim: bounds on random pairs and the window contract") {
    flair::Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Image a(14, 14, 1), b(14, 14, 1);
        for (double& v : a.data) v = rng.uniform01();
        for (double& v : b.data) v = rng.uniform01();
        const double s = ssim(a, b);
        CHECK(s <= 1.0);
        CHECK(s >= -1.0);
    }
    CHECK_THROWS_AS(ssim(Image(8, 8, 1), Image(8, 8, 1)), contract_error);
}

TEST_CASE("iou: identical, disjoint, half-covered, empty, non-binary") {
    std::vector<uint8_t> a = {1, 1, 0, 0, 1, 0};
    CHECK(iou(a, a) == 1.0);
    std::vector<uint8_t> b = {0, 0, 1, 1, 0, 0};
    CHECK(iou(a, b) == 0.0);
    CHECK(iou(a, b) == iou(b, a));
    std::vector<uint8_t> target = {1, 1, 1, 1, 0, 0};
    std::vector<uint8_t> half = {1, 1, 0, 0, 0, 0};
    CHECK(iou(half, target) == 0.5);
    std::vector<uint8_t> empty(6, 0);
    CHECK(iou(empty, empty) == 1.0);
    std::vector<uint8_t> bad = {2, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(iou(bad, a), contract_error);
}

}  // TEST_SUITE

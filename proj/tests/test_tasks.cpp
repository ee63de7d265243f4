#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "flair/errors.hpp"
#include "flair/metrics.hpp"
#include "flair/tasks.hpp"
#include "testutil.hpp"

using namespace flair;

namespace {

TrainConfig tiny_config(ActivationKind kind = ActivationKind::RcGauss) {
    TrainConfig cfg;
    cfg.activation = kind;
    cfg.hidden_layers = 2;
    cfg.hidden_width = 32;
    cfg.iterations = 200;
    cfg.lr = 5e-3;
    cfg.seed = 1;
    cfg.pe_bands = 6;
    return cfg;
}

}  // namespace

TEST_SUITE("tasks") {

TEST_CASE("mse_loss: zero at the target, channel sum, quadratic scaling") {
    Matrix p(4, 3, 0.2);
    CHECK(mse_loss(p, p) == 0.0);
    Matrix q(4, 3, 1.2);  // residual 1 everywhere -> loss equals C
    CHECK(mse_loss(q, p) == doctest::Approx(3.0).epsilon(1e-12));
    Matrix r(4, 3, 2.2);  // residual doubled -> loss x4
    CHECK(mse_loss(r, p) == doctest::Approx(12.0).epsilon(1e-12));
    CHECK_THROWS_AS(mse_loss(Matrix(0, 3), Matrix(0, 3)), contract_error);
    CHECK_THROWS_AS(mse_loss(Matrix(2, 3), Matrix(3, 2)), dimension_error);
}

TEST_CASE("add_noise: black-pixel mean matches the clamped-Gaussian expectation") {
    Image black(100, 100, 1);
    const Image noisy = add_noise(black, 30.0, 2.0, 42);
    double mean = 0.0;
    for (double v : noisy.data) mean += v;
    mean /= noisy.data.size();
    // E[max(0, N(0, 2/30))] = (2/30)/sqrt(2*pi) = 0.0266
    CHECK(mean == doctest::Approx(0.0266).epsilon(0.15));
}

TEST_CASE("add_noise: roughly unbiased on mid-gray") {
    Image gray(100, 100, 1);
    for (double& v : gray.data) v = 0.5;
    const Image noisy = add_noise(gray, 30.0, 2.0, 7);
    double mean = 0.0;
    for (double v : noisy.data) mean += v;
    mean /= noisy.data.size();
    CHECK(std::fabs(mean - 0.5) < 0.02);
}

TEST_CASE("add_noise: deterministic under a seed, guards the level") {
    const Image img = testutil::synth_smooth(16, 16, 3);
    const Image a = add_noise(img, 30.0, 2.0, 99);
    const Image b = add_noise(img, 30.0, 2.0, 99);
    for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
    const Image c = add_noise(img, 30.0, 2.0, 100);
    size_t differing = 0;
    for (size_t i = 0; i < a.data.size(); ++i) differing += a.data[i] != c.data[i];
    CHECK(differing > 0);
    CHECK_THROWS_AS(add_noise(img, 0.0, 2.0, 1), contract_error);
}

TEST_CASE("fit_image: constant gray image trains to > 40 dB for any activation") {
    Image img(32, 32, 1);
    for (double& v : img.data) v = 0.5;
    for (ActivationKind kind : {ActivationKind::RcGauss, ActivationKind::Sine,
                                ActivationKind::Gaussian, ActivationKind::ReluPE}) {
        TrainConfig cfg = tiny_config(kind);
        cfg.hidden_width = 64;  // gives ReLU+PE enough reach to cancel its encoding
        cfg.lr = 5e-2;          // the DC-only signal tolerates a coarse step
        const TaskReport rep = fit_image(img, cfg);
        CAPTURE(activation_name(kind));
        CHECK(rep.psnr > 40.0);
        CHECK_FALSE(rep.diverged);
    }
}

TEST_CASE("fit_image: loss curve finite, params echoed, report round trip") {
    const Image img = testutil::synth_textured(24, 24, 5);
    TrainConfig cfg = tiny_config();
    cfg.iterations = 60;
    OutputOptions out;
    out.out_dir = testutil::scratch_dir("fit");
    const TaskReport rep = fit_image(img, cfg, out);
    CHECK(rep.loss_curve.size() == 60);
    for (double v : rep.loss_curve) CHECK(std::isfinite(v));
    CHECK(rep.learned_params.size() == 2);

    // Reported scalars must equal the stored model's bitwise.
    const InrModel m = InrModel::load(out.out_dir + "/model.flr");
    const auto scalars = m.activation_scalars();
    REQUIRE(scalars.size() == rep.learned_params.size());
    for (size_t l = 0; l < scalars.size(); ++l)
        for (int k = 0; k < 3; ++k) CHECK(scalars[l][k] == rep.learned_params[l][k]);

    std::ifstream is(out.out_dir + "/report.json");
    REQUIRE(is.good());
    json parsed;
    is >> parsed;
    CHECK(parsed["schema"] == 1);
    CHECK(parsed["task"] == "fit");
    CHECK(parsed["metrics"].contains("psnr"));
    CHECK(parsed["metrics"].contains("ssim"));
    CHECK(parsed["config"]["iters"] == 60);
    CHECK(std::filesystem::exists(out.out_dir + "/loss.csv"));
    CHECK(std::filesystem::exists(out.out_dir + "/recon.png"));
    std::filesystem::remove_all(out.out_dir);
}

TEST_CASE("fit_image: WEGE adds one input channel and stays runnable") {
    const Image img = testutil::synth_textured(24, 24, 9);
    TrainConfig cfg = tiny_config();
    cfg.iterations = 40;
    cfg.wege.enabled = true;
    OutputOptions out;
    out.out_dir = testutil::scratch_dir("fitw");
    out.dump_wege = true;
    const TaskReport rep = fit_image(img, cfg, out);
    CHECK_FALSE(rep.diverged);
    const InrModel m = InrModel::load(out.out_dir + "/model.flr");
    CHECK(m.input_dim == 3);
    CHECK(std::filesystem::exists(out.out_dir + "/wege_filtered.png"));
    std::filesystem::remove_all(out.out_dir);
}

TEST_CASE("fit_image: bitwise deterministic under the same seed") {
    const Image img = testutil::synth_textured(20, 20, 13);
    TrainConfig cfg = tiny_config();
    cfg.iterations = 50;
    const TaskReport a = fit_image(img, cfg);
    const TaskReport b = fit_image(img, cfg);
    CHECK(a.psnr == b.psnr);
    CHECK(a.ssim == b.ssim);
    REQUIRE(a.loss_curve.size() == b.loss_curve.size());
    for (size_t i = 0; i < a.loss_curve.size(); ++i) CHECK(a.loss_curve[i] == b.loss_curve[i]);
}

TEST_CASE("super_resolve: scale 1 degenerates to the fitting protocol") {
    const Image img = testutil::synth_smooth(16, 16, 3);
    TrainConfig cfg = tiny_config();
    cfg.iterations = 80;
    const TaskReport rep = super_resolve(img, img, 1.0, cfg);
    CHECK_FALSE(rep.diverged);
    CHECK(rep.psnr > 20.0);
}

TEST_CASE("super_resolve: constant LR upsamples to a constant") {
    Image lr(12, 12, 1);
    for (double& v : lr.data) v = 0.62;
    Image hr(24, 24, 1);
    for (double& v : hr.data) v = 0.62;
    TrainConfig cfg = tiny_config();
    cfg.iterations = 400;
    const TaskReport rep = super_resolve(lr, hr, 2.0, cfg);
    // 1e-2 uniform deviation corresponds to 40 dB.
    CHECK(rep.psnr > 40.0);
}

TEST_CASE("super_resolve: dimension consistency is enforced") {
    const Image lr = testutil::synth_smooth(8, 8, 1);
    const Image hr = testutil::synth_smooth(20, 20, 1);
    CHECK_THROWS_AS(super_resolve(lr, hr, 2.0, tiny_config()), contract_error);
}

TEST_CASE("denoise: zero-noise input degenerates to fitting and reports noisy psnr") {
    const Image clean = testutil::synth_smooth(16, 16, 5);
    TrainConfig cfg = tiny_config();
    cfg.iterations = 200;
    const TaskReport rep = denoise(clean, clean, cfg);
    CHECK(rep.extra_metrics.at("noisy_psnr") == 100.0);
    CHECK(rep.psnr > 25.0);
}

TEST_CASE("occupancy: all-empty grid scores IoU 1 by convention") {
    OccupancyGrid g;
    g.d = g.h = g.w = 12;
    g.voxels.assign(g.count(), 0);
    TrainConfig cfg = tiny_config();
    cfg.iterations = 400;
    cfg.lr = 2e-2;
    const TaskReport rep = fit_occupancy(g, cfg);
    REQUIRE(rep.iou.has_value());
    CHECK(*rep.iou == 1.0);
    CHECK(rep.psnr > 40.0);
}

TEST_CASE("occupancy: OCC1 round trip and artifacts") {
    const OccupancyGrid g = testutil::solid_sphere(10);
    const std::string dir = testutil::scratch_dir("occ");
    save_occupancy(dir + "/grid.occ1", g);
    const OccupancyGrid loaded = load_occupancy(dir + "/grid.occ1");
    CHECK(loaded.d == 10);
    CHECK(loaded.voxels == g.voxels);

    TrainConfig cfg = tiny_config();
    cfg.iterations = 150;
    OutputOptions out;
    out.out_dir = dir;
    const TaskReport rep = fit_occupancy(loaded, cfg, out);
    CHECK(rep.iou.has_value());
    CHECK(std::filesystem::exists(dir + "/pred.occ1"));
    CHECK(std::filesystem::exists(dir + "/report.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("occupancy: corrupt and oversized files are rejected") {
    const std::string dir = testutil::scratch_dir("occbad");
    {
        std::ofstream os(dir + "/bad.occ1", std::ios::binary);
        os << "NOPE";
    }
    CHECK_THROWS_AS(load_occupancy(dir + "/bad.occ1"), io_error);
    {
        std::ofstream os(dir + "/big.occ1", std::ios::binary);
        os << "OCC1";
        const uint32_t dims[3] = {1024, 4, 4};
        os.write(reinterpret_cast<const char*>(dims), 12);
    }
    CHECK_THROWS_AS(load_occupancy(dir + "/big.occ1"), contract_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("image IO: PNG 8/16-bit and PNM round trips") {
    const std::string dir = testutil::scratch_dir("io");
    const Image img = testutil::synth_textured(17, 23, 21);

    save_image(dir + "/x8.png", img, 8);
    const Image r8 = load_image(dir + "/x8.png");
    REQUIRE(r8.h == 17);
    REQUIRE(r8.c == 3);
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::fabs(r8.data[i] - img.data[i]) < 0.5 / 255.0 + 1e-9);

    save_image(dir + "/x16.png", img, 16);
    const Image r16 = load_image(dir + "/x16.png");
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::fabs(r16.data[i] - img.data[i]) < 0.5 / 65535.0 + 1e-9);

    save_image(dir + "/x.ppm", img);
    const Image rp = load_image(dir + "/x.ppm");
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::fabs(rp.data[i] - img.data[i]) < 0.5 / 255.0 + 1e-9);

    const Matrix gray = to_gray(img);
    Image gimg(17, 23, 1);
    gimg.data = gray.data;
    save_image(dir + "/g.pgm", gimg);
    const Image rg = load_image(dir + "/g.pgm");
    CHECK(rg.c == 1);

    CHECK_THROWS_AS(load_image(dir + "/missing.png"), io_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("box_downsample and bicubic_resize basics") {
    Image img(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) img.at(y, x, 0) = y * 4 + x;
    for (double& v : img.data) v /= 16.0;
    const Image down = box_downsample(img, 2);
    CHECK(down.h == 2);
    CHECK(down.at(0, 0, 0) ==
          doctest::Approx((img.at(0, 0, 0) + img.at(0, 1, 0) + img.at(1, 0, 0) +
                           img.at(1, 1, 0)) /
                          4.0));
    CHECK_THROWS_AS(box_downsample(img, 3), contract_error);

    Image flat(6, 6, 1);
    for (double& v : flat.data) v = 0.25;
    const Image up = bicubic_resize(flat, 9, 9);
    for (double v : up.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

}  // TEST_SUITE

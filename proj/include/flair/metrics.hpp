#pragma once

#include <optional>

#include "flair/image.hpp"
#include "flair/matrix.hpp"

namespace flair {

struct MetricResult {
    double psnr = 0.0;
    double ssim = 0.0;
    std::optional<double> iou;
};

// 10*log10(peak^2 / MSE) over all entries, capped at 100 dB (MSE = 0).
double psnr(const Image& a, const Image& b, double peak = 1.0);
double psnr_values(const double* a, const double* b, size_t n, double peak = 1.0);

// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03; RGB images score the per-channel mean.
double ssim(const Image& a, const Image& b);

// |intersection| / |union| of two binary fields; empty union scores 1.
double iou(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& target);

}  // namespace flair

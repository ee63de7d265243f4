#include "flair/metrics.hpp"

#include <cmath>

#include "flair/errors.hpp"

namespace flair {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

inline int clampi(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

// Channel plane SSIM; local stats use a replicate border.
double ssim_plane(const Image& a, const Image& b, int ch) {
    static const std::vector<double> kernel = [] {
        std::vector<double> k(kWindow);
        double sum = 0.0;
        for (int i = 0; i < kWindow; ++i) {
            const double d = i - (kWindow - 1) / 2.0;
            k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += k[i];
        }
        for (double& v : k) v /= sum;
        return k;
    }();

    const double c1 = kK1 * kK1;
    const double c2 = kK2 * kK2;
    const int h = a.h, w = a.w;
    const int r = kWindow / 2;
    double total = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const double ky = kernel[dy + r];
                const int yy = clampi(y + dy, h);
                for (int dx = -r; dx <= r; ++dx) {
                    const double wgt = ky * kernel[dx + r];
                    const int xx = clampi(x + dx, w);
                    const double va = a.at(yy, xx, ch);
                    const double vb = b.at(yy, xx, ch);
                    mu_a += wgt * va;
                    mu_b += wgt * vb;
                    aa += wgt * va * va;
                    bb += wgt * vb * vb;
                    ab += wgt * va * vb;
                }
            }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    return total / (static_cast<double>(h) * w);
}

}  // namespace

double psnr_values(const double* a, const double* b, size_t n, double peak) {
    if (n == 0) throw contract_error("psnr: empty input");
    double mse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse <= 0.0) return 100.0;
    return std::min(100.0, 10.0 * std::log10(peak * peak / mse));
}

double psnr(const Image& a, const Image& b, double peak) {
    if (a.h != b.h || a.w != b.w || a.c != b.c)
        throw dimension_error("psnr: image shapes differ");
    return psnr_values(a.data.data(), b.data.data(), a.data.size(), peak);
}

double ssim(const Image& a, const Image& b) {
    if (a.h != b.h || a.w != b.w || a.c != b.c)
        throw dimension_error("ssim: image shapes differ");
    if (a.h < kWindow || a.w < kWindow)
        throw contract_error("ssim: image smaller than the 11x11 window");
    double total = 0.0;
    for (int ch = 0; ch < a.c; ++ch) total += ssim_plane(a, b, ch);
    return total / a.c;
}

double iou(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& target) {
    if (pred.size() != target.size()) throw dimension_error("iou: size mismatch");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] > 1 || target[i] > 1) throw contract_error("iou: inputs must be binary");
        inter += pred[i] & target[i];
        uni += pred[i] | target[i];
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace flair

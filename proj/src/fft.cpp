#include "flair/fft.hpp"

#include <cmath>

namespace flair {

namespace {

bool is_pow2(size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<cplx>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void dft_direct(std::vector<cplx>& a, bool inverse) {
    const size_t n = a.size();
    std::vector<cplx> out(n);
    const double sign = inverse ? 2.0 : -2.0;
    for (size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (size_t t = 0; t < n; ++t) {
            const double ang = sign * M_PI * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += a[t] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    a = std::move(out);
}

}  // namespace

void fourier_transform(std::vector<cplx>& a, bool inverse) {
    if (a.empty()) return;
    if (is_pow2(a.size()))
        fft_radix2(a, inverse);
    else
        dft_direct(a, inverse);
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(a.size());
        for (cplx& v : a) v *= inv;
    }
}

std::vector<double> fft2d_magnitude_centered(const std::vector<double>& grid, int n) {
    std::vector<cplx> work(grid.begin(), grid.end());
    std::vector<cplx> row(n), col(n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) row[x] = work[static_cast<size_t>(y) * n + x];
        fourier_transform(row);
        for (int x = 0; x < n; ++x) work[static_cast<size_t>(y) * n + x] = row[x];
    }
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) col[y] = work[static_cast<size_t>(y) * n + x];
        fourier_transform(col);
        for (int y = 0; y < n; ++y) work[static_cast<size_t>(y) * n + x] = col[y];
    }
    std::vector<double> mag(static_cast<size_t>(n) * n);
    const int half = n / 2;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const int sy = (y + half) % n;
            const int sx = (x + half) % n;
            mag[static_cast<size_t>(sy) * n + sx] = std::abs(work[static_cast<size_t>(y) * n + x]);
        }
    return mag;
}

}  // namespace flair

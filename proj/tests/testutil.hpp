#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "flair/image.hpp"
#include "flair/matrix.hpp"
#include "flair/rng.hpp"
#include "flair/tasks.hpp"

namespace testutil {

using flair::Image;
using flair::Matrix;

inline Matrix random_matrix(int r, int c, flair::Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

// Central difference d/dh f(h) at h = 0.
template <typename F>
double central_diff(F f, double h = 1e-5) {
    return (f(h) - f(-h)) / (2.0 * h);
}

inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

// --- deterministic desk corpus ------------------------------------------

// Textured crop: plaid of oriented sinusoids + radial chirp + hard edges.
// Frequencies stay below the pixel Nyquist of a 128-wide grid.
inline Image synth_textured(int h, int w, uint64_t seed) {
    flair::Rng rng(seed);
    const double f1 = rng.uniform(6.0, 9.0);
    const double f2 = rng.uniform(10.0, 14.0);
    const double chirp = rng.uniform(8.0, 12.0);
    const double ang = rng.uniform(0.0, M_PI);
    const double ca = std::cos(ang), sa = std::sin(ang);
    Image img(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = 2.0 * (x + 0.5) / w - 1.0;
            const double v = 2.0 * (y + 0.5) / h - 1.0;
            const double rot = ca * u + sa * v;
            const double r2 = u * u + v * v;
            const double plaid =
                0.5 * std::sin(2.0 * M_PI * f1 * u) * std::sin(2.0 * M_PI * f1 * v) +
                0.35 * std::sin(2.0 * M_PI * f2 * rot);
            const double rings = 0.45 * std::sin(2.0 * M_PI * chirp * r2);
            const double block = (std::fmod(std::floor(3.0 * (u + 1.0)) +
                                                std::floor(3.0 * (v + 1.0)),
                                            2.0) == 0.0)
                                     ? 0.18
                                     : -0.18;
            for (int ch = 0; ch < 3; ++ch) {
                const double phase = 0.25 * ch;
                const double val = 0.5 + 0.5 * (0.55 * plaid + 0.35 * rings + block) +
                                   0.05 * std::sin(2.0 * M_PI * (f1 * u + phase));
                img.at(y, x, ch) = std::clamp(val, 0.02, 0.98);
            }
        }
    return img;
}

// Homogeneous scene: low-frequency gradients and one broad blob.
inline Image synth_smooth(int h, int w, uint64_t seed) {
    flair::Rng rng(seed);
    const double cx = rng.uniform(-0.3, 0.3);
    const double cy = rng.uniform(-0.3, 0.3);
    Image img(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = 2.0 * (x + 0.5) / w - 1.0;
            const double v = 2.0 * (y + 0.5) / h - 1.0;
            const double blob = std::exp(-((u - cx) * (u - cx) + (v - cy) * (v - cy)) / 0.35);
            for (int ch = 0; ch < 3; ++ch)
                img.at(y, x, ch) = std::clamp(
                    0.45 + 0.18 * u + 0.12 * v + 0.25 * blob - 0.04 * ch, 0.02, 0.98);
        }
    return img;
}

// Piecewise-constant panels with texture inside some cells; SR-friendly
// (strong edges plus recoverable detail).
inline Image synth_edged(int h, int w, uint64_t seed) {
    flair::Rng rng(seed);
    double shade[4][4];
    for (auto& row : shade)
        for (double& s : row) s = rng.uniform(0.15, 0.85);
    const double f = rng.uniform(4.0, 6.0);
    Image img(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = 2.0 * (x + 0.5) / w - 1.0;
            const double v = 2.0 * (y + 0.5) / h - 1.0;
            const int ci = std::min(3, static_cast<int>(2.0 * (u + 1.0)));
            const int cj = std::min(3, static_cast<int>(2.0 * (v + 1.0)));
            const double tex = ((ci + cj) % 2 == 0)
                                   ? 0.16 * std::sin(2.0 * M_PI * f * u) *
                                         std::cos(2.0 * M_PI * f * v)
                                   : 0.0;
            for (int ch = 0; ch < 3; ++ch)
                img.at(y, x, ch) =
                    std::clamp(shade[ci][cj] + tex + 0.03 * ch * (u - v), 0.02, 0.98);
        }
    return img;
}

inline flair::OccupancyGrid solid_sphere(int n, double radius_frac = 0.35) {
    flair::OccupancyGrid g;
    g.d = g.h = g.w = n;
    g.voxels.resize(g.count());
    const double r2 = radius_frac * radius_frac;
    size_t i = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x, ++i) {
                const double u = (x + 0.5) / n - 0.5;
                const double v = (y + 0.5) / n - 0.5;
                const double t = (z + 0.5) / n - 0.5;
                g.voxels[i] = (u * u + v * v + t * t <= r2) ? 1 : 0;
            }
    return g;
}

// Unique scratch directory under the build tree.
inline std::string scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("flair_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace testutil

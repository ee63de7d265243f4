#pragma once

#include <string>

#include "flair/image.hpp"
#include "flair/matrix.hpp"

namespace flair {

// Single-level orthonormal Haar sub-bands. lh holds the horizontal detail
// (difference along x), hl the vertical detail, hh the diagonal. Odd input
// dims are edge-replicated to even before the transform and cropped back on
// inverse.
struct Subbands {
    Matrix ll, lh, hl, hh;
    int orig_h = 0;
    int orig_w = 0;
};

Subbands dwt2(const Matrix& image);
Matrix idwt2(const Subbands& sb);

// Pixel-wise energy score: reconstruction from {LH,HL,HH} minus the
// reconstruction from {LL}. Input must be a grayscale plane in [0,1].
// With absolute=true the score is |high-band reconstruction| instead.
Matrix energy_map(const Matrix& gray, bool absolute = false);

// Min-max rescale (E - Emin)/(Emax - Emin + eps); a constant map becomes
// all zeros.
Matrix normalize_scores(const Matrix& raw, double norm_eps = 1e-8);

// Mean over the (2r+1)^2 window with edge-replicated (clamped) indices.
Matrix box_mean(const Matrix& m, int r);

// He et al. guided filter: per-window linear model of the guide fitted to
// the scores, coefficients averaged over overlapping windows.
Matrix guided_filter(const Matrix& guide, const Matrix& scores, int r, double reg);

// Gaussian bilateral smoothing of the score map (kernel truncated at
// ceil(3*spatial_sigma), edge-replicated).
Matrix bilateral_filter(const Matrix& scores, double spatial_sigma, double range_sigma);

enum class ScoreFilter { Guided, Bilateral, None };

struct WegeOptions {
    bool enabled = false;
    ScoreFilter filter = ScoreFilter::Guided;
    int radius = 4;
    double reg = 1e-3;
    double spatial_sigma = 2.0;
    double range_sigma = 0.1;
    double norm_eps = 1e-8;
    bool absolute_energy = false;
};

// Raw / normalized / filtered wavelet-energy planes for one image.
struct EnergyMap {
    Matrix raw;
    Matrix normalized;
    Matrix filtered;
    int radius = 4;
    double reg = 1e-3;
    double norm_eps = 1e-8;

    static EnergyMap build(const Image& image, const WegeOptions& opts);

    // Bilinear lookup of `filtered` at a continuous coordinate in [-1,1]^2.
    double sample(double x, double y) const;
};

// Per-coordinate filtered scores for an N x 2 coordinate batch (N x 1 out).
Matrix sample_guidance(const EnergyMap& map, const Matrix& coords);

// Debug dump: raw/normalized/filtered as 16-bit grayscale PNG plus CSV.
void dump_energy_maps(const EnergyMap& map, const std::string& dir);

}  // namespace flair

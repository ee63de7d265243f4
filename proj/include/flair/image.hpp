#pragma once

#include <string>
#include <vector>

#include "flair/matrix.hpp"

namespace flair {

// H x W x C floats in [0,1], row-major with channel fastest. C is 1 or 3.
struct Image {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h_, int w_, int c_)
        : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, 0.0) {}

    double& at(int y, int x, int ch) {
        return data[(static_cast<size_t>(y) * w + x) * c + ch];
    }
    double at(int y, int x, int ch) const {
        return data[(static_cast<size_t>(y) * w + x) * c + ch];
    }
    size_t pixel_count() const { return static_cast<size_t>(h) * w; }
};

// PNG (8/16-bit, gray or RGB[A]) and binary PGM/PPM (P5/P6), chosen by
// file extension on write and by magic bytes on read.
Image load_image(const std::string& path);
void save_image(const std::string& path, const Image& img, int bit_depth = 8);

// 16-bit grayscale PNG of a single plane, min-max scaled to the full range.
void save_plane_png16(const std::string& path, const Matrix& plane);
void save_plane_csv(const std::string& path, const Matrix& plane);

// Rec.601 luma (0.299 R + 0.587 G + 0.114 B) as an H x W plane.
Matrix to_gray(const Image& img);

Image clamp01(Image img);

// Box-average downsampling by an integer factor (both dims divisible).
Image box_downsample(const Image& img, int factor);
// Catmull-Rom bicubic resize for non-integer scales.
Image bicubic_resize(const Image& img, int out_h, int out_w);

// N x 2 grid of pixel-center coordinates in [-1,1]^2, row-major over pixels,
// columns ordered (x, y).
Matrix grid_coords(int h, int w);

// Reshapes an N x C prediction over grid_coords(h, w) back into an image,
// clamping to [0,1].
Image rasterize(const Matrix& pred, int h, int w);

}  // namespace flair

#include "flair/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "flair/errors.hpp"

namespace flair {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw io_error("cannot open image file " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw io_error("libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("failed to decode PNG " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) png_set_swap(png);  // stream is big-endian
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int channels = png_get_channels(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error(path + ": unsupported channel count after expansion");
    }

    const size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> raster(row_bytes * h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = raster.data() + row_bytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(h, w, channels);
    const double scale = depth == 16 ? 65535.0 : 255.0;
    for (int y = 0; y < h; ++y) {
        const unsigned char* row = raster.data() + row_bytes * y;
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < channels; ++ch) {
                double v;
                if (depth == 16) {
                    uint16_t u;
                    std::memcpy(&u, row + (x * channels + ch) * 2, 2);
                    v = u;
                } else {
                    v = row[x * channels + ch];
                }
                img.at(y, x, ch) = v / scale;
            }
    }
    return img;
}

void save_png(const std::string& path, const Image& img, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw contract_error("save_image: PNG bit depth must be 8 or 16");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw io_error("cannot write image file " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw io_error("libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("failed to encode PNG " + path);
    }
    png_init_io(png, fp.get());
    const int color = img.c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, img.w, img.h, bit_depth, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const double scale = bit_depth == 16 ? 65535.0 : 255.0;
    const int bytes = bit_depth / 8;
    std::vector<unsigned char> row(static_cast<size_t>(img.w) * img.c * bytes);
    for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < img.c; ++ch) {
                const double v = std::clamp(img.at(y, x, ch), 0.0, 1.0);
                const auto q = static_cast<uint32_t>(std::lround(v * scale));
                unsigned char* dst = row.data() + (static_cast<size_t>(x) * img.c + ch) * bytes;
                if (bit_depth == 16) {
                    dst[0] = static_cast<unsigned char>(q >> 8);  // PNG is big-endian
                    dst[1] = static_cast<unsigned char>(q & 0xff);
                } else {
                    dst[0] = static_cast<unsigned char>(q);
                }
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

int read_pnm_token(std::istream& is) {
    // Skips whitespace and '#' comments.
    while (true) {
        int ch = is.peek();
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(ch)) {
            is.get();
        } else {
            break;
        }
    }
    int v;
    is >> v;
    if (!is) throw io_error("malformed PNM header");
    return v;
}

Image load_pnm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open image file " + path);
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw io_error(path + ": only binary PGM (P5) / PPM (P6) supported");
    const int channels = m1 == '6' ? 3 : 1;
    const int w = read_pnm_token(is);
    const int h = read_pnm_token(is);
    const int maxval = read_pnm_token(is);
    if (maxval <= 0 || maxval > 65535) throw io_error(path + ": bad PNM maxval");
    is.get();  // single whitespace before raster

    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raster(static_cast<size_t>(h) * w * channels * bytes);
    is.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!is) throw io_error(path + ": truncated PNM raster");

    Image img(h, w, channels);
    for (size_t i = 0; i < img.data.size(); ++i) {
        uint32_t v;
        if (bytes == 2)
            v = static_cast<uint32_t>(raster[2 * i]) << 8 | raster[2 * i + 1];  // big-endian
        else
            v = raster[i];
        img.data[i] = static_cast<double>(v) / maxval;
    }
    return img;
}

void save_pnm(const std::string& path, const Image& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write image file " + path);
    os << (img.c == 3 ? "P6" : "P5") << "\n" << img.w << " " << img.h << "\n255\n";
    std::vector<unsigned char> raster(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i)
        raster[i] = static_cast<unsigned char>(
            std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
    os.write(reinterpret_cast<const char*>(raster.data()),
             static_cast<std::streamsize>(raster.size()));
    if (!os) throw io_error("short write to " + path);
}

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

Image load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw io_error("cannot open image file " + path);
    unsigned char sig[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(sig), 2);
    probe.close();
    if (sig[0] == 0x89 && sig[1] == 'P') return load_png(path);
    if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) return load_pnm(path);
    throw io_error(path + ": unrecognized image format (PNG/PGM/PPM supported)");
}

void save_image(const std::string& path, const Image& img, int bit_depth) {
    if (img.h <= 0 || img.w <= 0 || (img.c != 1 && img.c != 3))
        throw contract_error("save_image: empty image or unsupported channel count");
    if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm"))
        save_pnm(path, img);
    else
        save_png(path, img, bit_depth);
}

void save_plane_png16(const std::string& path, const Matrix& plane) {
    double lo = plane.data.empty() ? 0.0 : plane.data[0];
    double hi = lo;
    for (double v : plane.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    Image img(plane.rows, plane.cols, 1);
    for (size_t i = 0; i < plane.data.size(); ++i)
        img.data[i] = span > 0.0 ? (plane.data[i] - lo) / span : 0.0;
    save_png(path, img, 16);
}

void save_plane_csv(const std::string& path, const Matrix& plane) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot write " + path);
    os.precision(17);
    for (int r = 0; r < plane.rows; ++r) {
        for (int c = 0; c < plane.cols; ++c) os << (c ? "," : "") << plane.at(r, c);
        os << "\n";
    }
}

Matrix to_gray(const Image& img) {
    Matrix g(img.h, img.w);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            g.at(y, x) = img.c == 1 ? img.at(y, x, 0)
                                    : 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                                          0.114 * img.at(y, x, 2);
    return g;
}

Image clamp01(Image img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
    return img;
}

Image box_downsample(const Image& img, int factor) {
    if (factor < 1 || img.h % factor != 0 || img.w % factor != 0)
        throw contract_error("box_downsample: dims must be divisible by the factor");
    Image out(img.h / factor, img.w / factor, img.c);
    const double inv = 1.0 / (factor * factor);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            for (int ch = 0; ch < img.c; ++ch) {
                double acc = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        acc += img.at(y * factor + dy, x * factor + dx, ch);
                out.at(y, x, ch) = acc * inv;
            }
    return out;
}

namespace {
double catmull_rom(double p0, double p1, double p2, double p3, double t) {
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}
}  // namespace

Image bicubic_resize(const Image& img, int out_h, int out_w) {
    Image out(out_h, out_w, img.c);
    auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
    for (int y = 0; y < out_h; ++y) {
        const double sy = (y + 0.5) * img.h / out_h - 0.5;
        const int iy = static_cast<int>(std::floor(sy));
        const double ty = sy - iy;
        for (int x = 0; x < out_w; ++x) {
            const double sx = (x + 0.5) * img.w / out_w - 0.5;
            const int ix = static_cast<int>(std::floor(sx));
            const double tx = sx - ix;
            for (int ch = 0; ch < img.c; ++ch) {
                double col[4];
                for (int k = -1; k <= 2; ++k) {
                    const int yy = clampi(iy + k, img.h);
                    col[k + 1] = catmull_rom(img.at(yy, clampi(ix - 1, img.w), ch),
                                             img.at(yy, clampi(ix, img.w), ch),
                                             img.at(yy, clampi(ix + 1, img.w), ch),
                                             img.at(yy, clampi(ix + 2, img.w), ch), tx);
                }
                out.at(y, x, ch) = std::clamp(catmull_rom(col[0], col[1], col[2], col[3], ty),
                                              0.0, 1.0);
            }
        }
    }
    return out;
}

Matrix grid_coords(int h, int w) {
    Matrix coords(h * w, 2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int r = y * w + x;
            coords.at(r, 0) = 2.0 * (x + 0.5) / w - 1.0;
            coords.at(r, 1) = 2.0 * (y + 0.5) / h - 1.0;
        }
    return coords;
}

Image rasterize(const Matrix& pred, int h, int w) {
    if (pred.rows != h * w)
        throw dimension_error("rasterize: " + pred.shape_str() + " does not cover " +
                              std::to_string(h) + "x" + std::to_string(w));
    Image img(h, w, pred.cols);
    for (int r = 0; r < pred.rows; ++r)
        for (int ch = 0; ch < pred.cols; ++ch)
            img.data[static_cast<size_t>(r) * pred.cols + ch] =
                std::clamp(pred.at(r, ch), 0.0, 1.0);
    return img;
}

}  // namespace flair

#include "flair/wege.hpp"

#include <algorithm>
#include <cmath>

#include "flair/errors.hpp"

namespace flair {

namespace {

Matrix pad_to_even(const Matrix& m) {
    const int h = m.rows + (m.rows % 2);
    const int w = m.cols + (m.cols % 2);
    if (h == m.rows && w == m.cols) return m;
    Matrix out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(y, x) = m.at(std::min(y, m.rows - 1), std::min(x, m.cols - 1));
    return out;
}

inline int clampi(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

}  // namespace

Subbands dwt2(const Matrix& image) {
    if (image.rows == 0 || image.cols == 0) throw contract_error("dwt2: empty image");
    const Matrix src = pad_to_even(image);
    const int hh = src.rows / 2;
    const int hw = src.cols / 2;
    Subbands sb;
    sb.orig_h = image.rows;
    sb.orig_w = image.cols;
    sb.ll = Matrix(hh, hw);
    sb.lh = Matrix(hh, hw);
    sb.hl = Matrix(hh, hw);
    sb.hh = Matrix(hh, hw);
    for (int y = 0; y < hh; ++y)
        for (int x = 0; x < hw; ++x) {
            const double a = src.at(2 * y, 2 * x);
            const double b = src.at(2 * y, 2 * x + 1);
            const double c = src.at(2 * y + 1, 2 * x);
            const double d = src.at(2 * y + 1, 2 * x + 1);
            sb.ll.at(y, x) = (a + b + c + d) / 2.0;
            sb.lh.at(y, x) = (a - b + c - d) / 2.0;
            sb.hl.at(y, x) = (a + b - c - d) / 2.0;
            sb.hh.at(y, x) = (a - b - c + d) / 2.0;
        }
    return sb;
}

Matrix idwt2(const Subbands& sb) {
    const int hh = sb.ll.rows;
    const int hw = sb.ll.cols;
    Matrix out(sb.orig_h > 0 ? sb.orig_h : 2 * hh, sb.orig_w > 0 ? sb.orig_w : 2 * hw);
    for (int y = 0; y < hh; ++y)
        for (int x = 0; x < hw; ++x) {
            const double ll = sb.ll.at(y, x);
            const double lh = sb.lh.at(y, x);
            const double hl = sb.hl.at(y, x);
            const double dd = sb.hh.at(y, x);
            const double a = (ll + lh + hl + dd) / 2.0;
            const double b = (ll - lh + hl - dd) / 2.0;
            const double c = (ll + lh - hl - dd) / 2.0;
            const double d = (ll - lh - hl + dd) / 2.0;
            if (2 * y < out.rows && 2 * x < out.cols) out.at(2 * y, 2 * x) = a;
            if (2 * y < out.rows && 2 * x + 1 < out.cols) out.at(2 * y, 2 * x + 1) = b;
            if (2 * y + 1 < out.rows && 2 * x < out.cols) out.at(2 * y + 1, 2 * x) = c;
            if (2 * y + 1 < out.rows && 2 * x + 1 < out.cols) out.at(2 * y + 1, 2 * x + 1) = d;
        }
    return out;
}

Matrix energy_map(const Matrix& gray, bool absolute) {
    Subbands sb = dwt2(gray);
    Subbands high = sb;
    high.ll = Matrix(sb.ll.rows, sb.ll.cols);
    const Matrix high_rec = idwt2(high);
    if (absolute) {
        Matrix out = high_rec;
        for (double& v : out.data) v = std::fabs(v);
        return out;
    }
    Subbands low = sb;
    low.lh = Matrix(sb.ll.rows, sb.ll.cols);
    low.hl = Matrix(sb.ll.rows, sb.ll.cols);
    low.hh = Matrix(sb.ll.rows, sb.ll.cols);
    const Matrix low_rec = idwt2(low);
    Matrix out(gray.rows, gray.cols);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = high_rec.data[i] - low_rec.data[i];
    return out;
}

Matrix normalize_scores(const Matrix& raw, double norm_eps) {
    if (norm_eps <= 0.0) throw contract_error("normalize_scores: norm_eps must be > 0");
    if (raw.data.empty()) throw contract_error("normalize_scores: empty map");
    double lo = raw.data[0], hi = raw.data[0];
    for (double v : raw.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Matrix out(raw.rows, raw.cols);
    const double denom = hi - lo + norm_eps;
    for (size_t i = 0; i < raw.data.size(); ++i) out.data[i] = (raw.data[i] - lo) / denom;
    return out;
}

Matrix box_mean(const Matrix& m, int r) {
    if (r < 1) throw contract_error("box_mean: radius must be >= 1");
    if (r >= std::min(m.rows, m.cols))
        throw contract_error("box_mean: radius " + std::to_string(r) + " too large for " +
                             m.shape_str());
    // Separable passes with clamped indices (edge replication).
    Matrix horiz(m.rows, m.cols);
    const double inv = 1.0 / (2 * r + 1);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d) acc += m.at(y, clampi(x + d, m.cols));
            horiz.at(y, x) = acc * inv;
        }
    Matrix out(m.rows, m.cols);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d) acc += horiz.at(clampi(y + d, m.rows), x);
            out.at(y, x) = acc * inv;
        }
    return out;
}

Matrix guided_filter(const Matrix& guide, const Matrix& scores, int r, double reg) {
    if (!guide.same_shape(scores))
        throw dimension_error("guided_filter: guide " + guide.shape_str() + " vs scores " +
                              scores.shape_str());
    if (reg <= 0.0) throw contract_error("guided_filter: reg must be > 0");
    if (r >= std::min(guide.rows, guide.cols))
        throw contract_error("guided_filter: radius " + std::to_string(r) + " too large for " +
                             guide.shape_str());

    Matrix ii(guide.rows, guide.cols);
    Matrix ip(guide.rows, guide.cols);
    for (size_t i = 0; i < guide.data.size(); ++i) {
        ii.data[i] = guide.data[i] * guide.data[i];
        ip.data[i] = guide.data[i] * scores.data[i];
    }
    const Matrix mean_i = box_mean(guide, r);
    const Matrix mean_p = box_mean(scores, r);
    const Matrix corr_ii = box_mean(ii, r);
    const Matrix corr_ip = box_mean(ip, r);

    Matrix a(guide.rows, guide.cols);
    Matrix b(guide.rows, guide.cols);
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double var = corr_ii.data[i] - mean_i.data[i] * mean_i.data[i];
        const double cov = corr_ip.data[i] - mean_i.data[i] * mean_p.data[i];
        a.data[i] = cov / (var + reg);
        b.data[i] = mean_p.data[i] - a.data[i] * mean_i.data[i];
    }
    const Matrix mean_a = box_mean(a, r);
    const Matrix mean_b = box_mean(b, r);
    Matrix out(guide.rows, guide.cols);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = mean_a.data[i] * guide.data[i] + mean_b.data[i];
    return out;
}

Matrix bilateral_filter(const Matrix& scores, double spatial_sigma, double range_sigma) {
    if (spatial_sigma <= 0.0 || range_sigma <= 0.0)
        throw contract_error("bilateral_filter: sigmas must be > 0");
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * spatial_sigma)));
    const double inv_s2 = 1.0 / (2.0 * spatial_sigma * spatial_sigma);
    const double inv_r2 = 1.0 / (2.0 * range_sigma * range_sigma);
    Matrix out(scores.rows, scores.cols);
    for (int y = 0; y < scores.rows; ++y)
        for (int x = 0; x < scores.cols; ++x) {
            const double center = scores.at(y, x);
            double acc = 0.0, norm = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const double v = scores.at(clampi(y + dy, scores.rows),
                                               clampi(x + dx, scores.cols));
                    const double dv = v - center;
                    const double w = std::exp(-(dy * dy + dx * dx) * inv_s2 - dv * dv * inv_r2);
                    acc += w * v;
                    norm += w;
                }
            out.at(y, x) = acc / norm;
        }
    return out;
}

EnergyMap EnergyMap::build(const Image& image, const WegeOptions& opts) {
    const Matrix gray = to_gray(image);
    EnergyMap map;
    map.radius = opts.radius;
    map.reg = opts.reg;
    map.norm_eps = opts.norm_eps;
    map.raw = energy_map(gray, opts.absolute_energy);
    map.normalized = normalize_scores(map.raw, opts.norm_eps);
    switch (opts.filter) {
        case ScoreFilter::Guided:
            map.filtered = guided_filter(gray, map.normalized, opts.radius, opts.reg);
            break;
        case ScoreFilter::Bilateral:
            map.filtered = bilateral_filter(map.normalized, opts.spatial_sigma, opts.range_sigma);
            break;
        case ScoreFilter::None:
            map.filtered = map.normalized;
            break;
    }
    return map;
}

double EnergyMap::sample(double x, double y) const {
    const Matrix& f = filtered;
    double px = (x + 1.0) * 0.5 * f.cols - 0.5;
    double py = (y + 1.0) * 0.5 * f.rows - 0.5;
    // Snap to the lattice when a coordinate is a pixel center up to rounding.
    if (std::fabs(px - std::round(px)) < 1e-9) px = std::round(px);
    if (std::fabs(py - std::round(py)) < 1e-9) py = std::round(py);
    const int x0 = clampi(static_cast<int>(std::floor(px)), f.cols);
    const int y0 = clampi(static_cast<int>(std::floor(py)), f.rows);
    const int x1 = clampi(x0 + 1, f.cols);
    const int y1 = clampi(y0 + 1, f.rows);
    const double tx = std::clamp(px - x0, 0.0, 1.0);
    const double ty = std::clamp(py - y0, 0.0, 1.0);
    const double top = f.at(y0, x0) * (1.0 - tx) + f.at(y0, x1) * tx;
    const double bot = f.at(y1, x0) * (1.0 - tx) + f.at(y1, x1) * tx;
    return top * (1.0 - ty) + bot * ty;
}

Matrix sample_guidance(const EnergyMap& map, const Matrix& coords) {
    if (coords.cols < 2)
        throw dimension_error("sample_guidance: coords must be N x 2, got " + coords.shape_str());
    if (map.filtered.data.empty()) throw contract_error("sample_guidance: filtered map missing");
    Matrix out(coords.rows, 1);
    for (int r = 0; r < coords.rows; ++r) out.at(r, 0) = map.sample(coords.at(r, 0), coords.at(r, 1));
    return out;
}

void dump_energy_maps(const EnergyMap& map, const std::string& dir) {
    save_plane_png16(dir + "/wege_raw.png", map.raw);
    save_plane_csv(dir + "/wege_raw.csv", map.raw);
    save_plane_png16(dir + "/wege_normalized.png", map.normalized);
    save_plane_csv(dir + "/wege_normalized.csv", map.normalized);
    save_plane_png16(dir + "/wege_filtered.png", map.filtered);
    save_plane_csv(dir + "/wege_filtered.csv", map.filtered);
}

}  // namespace flair

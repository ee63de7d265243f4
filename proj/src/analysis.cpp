#include "flair/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "flair/errors.hpp"
#include "flair/fft.hpp"
#include "flair/rng.hpp"

namespace flair {

namespace {
constexpr double kDbFloor = -120.0;
}

KernelSpectrum empirical_ntk(const ActivationSpec& act, int n_inputs, int n_neurons, int n_seeds,
                             uint64_t seed) {
    if (n_inputs < 2 || n_neurons < 1 || n_seeds < 1)
        throw contract_error("empirical_ntk: need n_inputs >= 2, n_neurons/seeds >= 1");
    std::vector<double> xs(n_inputs);
    for (int i = 0; i < n_inputs; ++i)
        xs[i] = -1.0 + 2.0 * i / (n_inputs - 1);

    const double wb = weight_init_bound(act, 1, true);
    const double cb = std::sqrt(6.0 / n_neurons);
    Matrix gram(n_inputs, n_inputs);
    for (int s = 0; s < n_seeds; ++s) {
        Rng rng(seed + static_cast<uint64_t>(s));
        // Feature matrix: columns are d f / d{c_k, w_k, b_k} at each grid x.
        Matrix feats(n_inputs, 3 * n_neurons);
        for (int k = 0; k < n_neurons; ++k) {
            const double w = rng.uniform(-wb, wb);
            const double b = rng.uniform(-1.0, 1.0);
            const double c = rng.uniform(-cb, cb);
            for (int i = 0; i < n_inputs; ++i) {
                const double pre = w * xs[i] + b;
                const double sv = activation_value(pre, act);
                const double sd = activation_grads(pre, act).d_x;
                feats.at(i, 3 * k) = sv;
                feats.at(i, 3 * k + 1) = c * sd * xs[i];
                feats.at(i, 3 * k + 2) = c * sd;
            }
        }
        const Matrix g = matmul_nt(feats, feats);
        for (size_t i = 0; i < gram.data.size(); ++i) gram.data[i] += g.data[i];
    }
    const double inv = 1.0 / n_seeds;
    for (double& v : gram.data) v *= inv;
    // Symmetrize (dgemm rounding can leave asymmetry at machine precision).
    for (int i = 0; i < n_inputs; ++i)
        for (int j = i + 1; j < n_inputs; ++j) {
            const double m = 0.5 * (gram.at(i, j) + gram.at(j, i));
            gram.at(i, j) = m;
            gram.at(j, i) = m;
        }

    KernelSpectrum ks;
    ks.eigenvalues = symmetric_eigenvalues(gram);
    ks.gram = std::move(gram);
    return ks;
}

std::vector<double> symmetric_eigenvalues(const Matrix& sym) {
    if (sym.rows != sym.cols) throw contract_error("symmetric_eigenvalues: matrix not square");
    const int n = sym.rows;
    Matrix a = sym;
    auto off_norm = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a.at(i, j) * a.at(i, j);
        return std::sqrt(2.0 * s);
    };
    double norm = 0.0;
    for (double v : a.data) norm += v * v;
    norm = std::sqrt(norm);
    const double tol = std::max(1e-14 * norm, 1e-300);

    const int max_sweeps = 64;
    int sweep = 0;
    while (off_norm() > tol && sweep++ < max_sweeps) {
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
    }
    if (off_norm() > tol * 1e3)
        throw numeric_error("jacobi eigensolver stalled; off-diagonal norm " +
                            std::to_string(off_norm()) + " vs tol " + std::to_string(tol));
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a.at(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
    return w;
}

Spectrogram stft_line(const Image& image, int row, int window, int hop) {
    if (row < 0 || row >= image.h)
        throw contract_error("stft_line: row " + std::to_string(row) + " out of bounds for " +
                             std::to_string(image.h) + " rows");
    if (image.w < window)
        throw contract_error("stft_line: image width " + std::to_string(image.w) +
                             " shorter than the " + std::to_string(window) + "-sample window");
    if (hop < 1) throw contract_error("stft_line: hop must be >= 1");

    const Matrix gray = to_gray(image);
    Spectrogram sg;
    sg.window = window;
    sg.hop = hop;
    sg.frames = (image.w - window) / hop + 1;
    sg.bins = window / 2 + 1;
    sg.magnitudes_db.resize(static_cast<size_t>(sg.frames) * sg.bins);
    sg.freq_axis.resize(sg.bins);
    for (int k = 0; k < sg.bins; ++k) sg.freq_axis[k] = static_cast<double>(k) / window;

    const std::vector<double> hann = hann_window(window);
    std::vector<cplx> frame(window);
    for (int f = 0; f < sg.frames; ++f) {
        const int start = f * hop;
        for (int i = 0; i < window; ++i) frame[i] = cplx(hann[i] * gray.at(row, start + i), 0.0);
        fourier_transform(frame);
        for (int k = 0; k < sg.bins; ++k) {
            const double db = 20.0 * std::log10(std::abs(frame[k]) + 1e-12);
            sg.magnitudes_db[static_cast<size_t>(f) * sg.bins + k] = std::max(db, kDbFloor);
        }
    }
    return sg;
}

std::vector<std::vector<double>> neuron_fft(const InrModel& model, int layer, int grid_n) {
    if (layer < 1 || layer > model.hidden_layer_count())
        throw contract_error("neuron_fft: layer index out of range");
    if (grid_n < 4) throw contract_error("neuron_fft: grid too small");

    // Coordinates over [-1,1]^2; extra input channels (WEGE) held at zero.
    Matrix coords(grid_n * grid_n, model.input_dim);
    for (int y = 0; y < grid_n; ++y)
        for (int x = 0; x < grid_n; ++x) {
            const int r = y * grid_n + x;
            coords.at(r, 0) = 2.0 * (x + 0.5) / grid_n - 1.0;
            coords.at(r, 1) = 2.0 * (y + 0.5) / grid_n - 1.0;
        }
    Matrix z = lift_inputs(model, coords);
    for (int l = 0; l < layer - 1; ++l) {
        const InrModel::Layer& lay = model.layers[l];
        Matrix h = matmul(z, lay.W);
        add_row_inplace(h, lay.b);
        for (double& v : h.data) v = activation_value(v, lay.act);
        z = std::move(h);
    }
    const InrModel::Layer& lay = model.layers[layer - 1];
    Matrix pre = matmul(z, lay.W);
    add_row_inplace(pre, lay.b);

    std::vector<std::vector<double>> spectra;
    spectra.reserve(pre.cols);
    std::vector<double> plane(static_cast<size_t>(grid_n) * grid_n);
    for (int j = 0; j < pre.cols; ++j) {
        for (int r = 0; r < pre.rows; ++r)
            plane[r] = activation_value(pre.at(r, j), lay.act);
        spectra.push_back(fft2d_magnitude_centered(plane, grid_n));
    }
    return spectra;
}

UncertaintyResult uncertainty_product(const ActivationSpec& spec, double domain_halfwidth,
                                      int samples) {
    if (domain_halfwidth <= 0.0) throw contract_error("uncertainty_product: halfwidth must be > 0");
    if (samples < 4096) throw contract_error("uncertainty_product: samples must be >= 4096");

    ActivationSpec basis = spec;
    basis.zeta = 0.0;

    const int n = samples;
    const double dt = 2.0 * domain_halfwidth / n;
    std::vector<double> psi(n);
    double max_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = -domain_halfwidth + (i + 0.5) * dt;
        psi[i] = activation_value(t, basis);
        max_abs = std::max(max_abs, std::fabs(psi[i]));
    }
    if (max_abs == 0.0) throw contract_error("uncertainty_product: basis is identically zero");

    auto spread = [](const std::vector<double>& p2, const std::vector<double>& axis) {
        double mass = 0.0, mean = 0.0;
        for (size_t i = 0; i < p2.size(); ++i) {
            mass += p2[i];
            mean += axis[i] * p2[i];
        }
        mean /= mass;
        double var = 0.0;
        for (size_t i = 0; i < p2.size(); ++i) {
            const double d = axis[i] - mean;
            var += d * d * p2[i];
        }
        return std::sqrt(var / mass);
    };

    std::vector<double> t_axis(n), p_t(n);
    for (int i = 0; i < n; ++i) {
        t_axis[i] = -domain_halfwidth + (i + 0.5) * dt;
        p_t[i] = psi[i] * psi[i];
    }

    std::vector<cplx> spec_c(psi.begin(), psi.end());
    fourier_transform(spec_c);
    std::vector<double> f_axis(n), p_f(n);
    for (int k = 0; k < n; ++k) {
        const double f = (k < n / 2 ? k : k - n) / (n * dt);
        f_axis[k] = f;
        p_f[k] = std::norm(spec_c[k]);
    }

    UncertaintyResult res;
    res.sigma_t = spread(p_t, t_axis);
    res.sigma_f = spread(p_f, f_axis);
    res.product = res.sigma_t * res.sigma_f;
    return res;
}

std::vector<std::pair<double, double>> basis_spectrum(const ActivationSpec& spec,
                                                      double domain_halfwidth, int samples) {
    ActivationSpec basis = spec;
    basis.zeta = 0.0;
    const int n = samples;
    const double dt = 2.0 * domain_halfwidth / n;
    std::vector<cplx> psi(n);
    for (int i = 0; i < n; ++i)
        psi[i] = cplx(activation_value(-domain_halfwidth + (i + 0.5) * dt, basis), 0.0);
    fourier_transform(psi);
    std::vector<std::pair<double, double>> out;
    out.reserve(n / 2);
    for (int k = 0; k < n / 2; ++k)
        out.emplace_back(k / (n * dt), std::abs(psi[k]));
    return out;
}

void write_ntk_csv(const std::string& path, const KernelSpectrum& ks) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot write " + path);
    os.precision(17);
    os << "index,eigenvalue\n";
    for (size_t i = 0; i < ks.eigenvalues.size(); ++i) os << i << "," << ks.eigenvalues[i] << "\n";
}

void write_stft_csv(const std::string& path, const Spectrogram& sg) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot write " + path);
    os.precision(17);
    os << "frame,bin,db\n";
    for (int f = 0; f < sg.frames; ++f)
        for (int k = 0; k < sg.bins; ++k) os << f << "," << k << "," << sg.db(f, k) << "\n";
}

void save_spectrogram_png(const std::string& path, const Spectrogram& sg) {
    // Frequency on the vertical axis, bin 0 at the bottom.
    Matrix plane(sg.bins, sg.frames);
    for (int f = 0; f < sg.frames; ++f)
        for (int k = 0; k < sg.bins; ++k) plane.at(sg.bins - 1 - k, f) = sg.db(f, k);
    save_plane_png16(path, plane);
}

void save_neuron_fft_montage(const std::string& path,
                             const std::vector<std::vector<double>>& spectra, int grid_n) {
    if (spectra.empty()) throw contract_error("save_neuron_fft_montage: no spectra");
    const int shown = std::min<int>(64, static_cast<int>(spectra.size()));
    const int tiles = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(shown))));
    Matrix plane(tiles * grid_n, tiles * grid_n);
    for (int t = 0; t < shown; ++t) {
        const int ty = (t / tiles) * grid_n;
        const int tx = (t % tiles) * grid_n;
        double peak = 0.0;
        for (double v : spectra[t]) peak = std::max(peak, v);
        const double inv = peak > 0.0 ? 1.0 / peak : 0.0;
        for (int y = 0; y < grid_n; ++y)
            for (int x = 0; x < grid_n; ++x)
                plane.at(ty + y, tx + x) = spectra[t][static_cast<size_t>(y) * grid_n + x] * inv;
    }
    save_plane_png16(path, plane);
}

}  // namespace flair

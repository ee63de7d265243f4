#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "flair/activation.hpp"
#include "flair/analysis.hpp"
#include "flair/errors.hpp"
#include "flair/image.hpp"
#include "flair/metrics.hpp"
#include "flair/network.hpp"
#include "flair/runtime.hpp"
#include "flair/tasks.hpp"
#include "flair/wege.hpp"

namespace py = pybind11;
using namespace flair;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DArray& a) {
    if (a.ndim() != 2) throw contract_error("expected a 2D array");
    Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy_n(a.data(), m.size(), m.data.begin());
    return m;
}

DArray from_matrix(const Matrix& m) {
    DArray a({static_cast<py::ssize_t>(m.rows), static_cast<py::ssize_t>(m.cols)});
    std::copy_n(m.data.begin(), m.size(), a.mutable_data());
    return a;
}

Image to_image(const DArray& a) {
    if (a.ndim() == 2) {
        Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), 1);
        std::copy_n(a.data(), img.data.size(), img.data.begin());
        return img;
    }
    if (a.ndim() == 3 && (a.shape(2) == 1 || a.shape(2) == 3)) {
        Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                  static_cast<int>(a.shape(2)));
        std::copy_n(a.data(), img.data.size(), img.data.begin());
        return img;
    }
    throw contract_error("expected an HxW or HxWx{1,3} array");
}

py::array from_image(const Image& img) {
    if (img.c == 1) {
        DArray a({static_cast<py::ssize_t>(img.h), static_cast<py::ssize_t>(img.w)});
        std::copy_n(img.data.begin(), img.data.size(), a.mutable_data());
        return a;
    }
    DArray a({static_cast<py::ssize_t>(img.h), static_cast<py::ssize_t>(img.w),
              static_cast<py::ssize_t>(img.c)});
    std::copy_n(img.data.begin(), img.data.size(), a.mutable_data());
    return a;
}

// Elementwise apply over an arbitrary-shape array.
template <typename F>
py::array_t<double> elementwise(const DArray& x, F f) {
    py::array_t<double> out(std::vector<py::ssize_t>(x.shape(), x.shape() + x.ndim()));
    const double* src = x.data();
    double* dst = out.mutable_data();
    for (py::ssize_t i = 0; i < x.size(); ++i) dst[i] = f(src[i]);
    return out;
}

TrainConfig config_from_dict(const py::dict& d) {
    TrainConfig cfg;
    for (auto item : d) {
        const std::string key = py::cast<std::string>(item.first);
        const py::handle v = item.second;
        if (key == "activation")
            cfg.activation = activation_from_name(py::cast<std::string>(v));
        else if (key == "hidden_layers")
            cfg.hidden_layers = py::cast<int>(v);
        else if (key == "hidden_width")
            cfg.hidden_width = py::cast<int>(v);
        else if (key == "iters")
            cfg.iterations = py::cast<long>(v);
        else if (key == "lr")
            cfg.lr = py::cast<double>(v);
        else if (key == "seed")
            cfg.seed = py::cast<uint64_t>(v);
        else if (key == "pe_bands")
            cfg.pe_bands = py::cast<int>(v);
        else if (key == "omega0")
            cfg.omega0 = py::cast<double>(v);
        else if (key == "t_init")
            cfg.t_init = py::cast<double>(v);
        else if (key == "sigma_init")
            cfg.sigma_init = py::cast<double>(v);
        else if (key == "zeta_init")
            cfg.zeta_init = py::cast<double>(v);
        else if (key == "batch_size")
            cfg.batch_size = py::cast<int>(v);
        else if (key == "poisson_level")
            cfg.poisson_level = py::cast<double>(v);
        else if (key == "gaussian_sigma")
            cfg.gaussian_sigma = py::cast<double>(v);
        else if (key == "wege") {
            const std::string mode = py::cast<std::string>(v);
            if (mode == "none") {
                cfg.wege.enabled = false;
            } else if (mode == "guided" || mode == "bilateral") {
                cfg.wege.enabled = true;
                cfg.wege.filter =
                    mode == "guided" ? ScoreFilter::Guided : ScoreFilter::Bilateral;
            } else {
                throw contract_error("wege must be guided|bilateral|none");
            }
        } else if (key == "wege_r")
            cfg.wege.radius = py::cast<int>(v);
        else if (key == "wege_reg")
            cfg.wege.reg = py::cast<double>(v);
        else if (key == "wege_spatial_sigma")
            cfg.wege.spatial_sigma = py::cast<double>(v);
        else if (key == "wege_range_sigma")
            cfg.wege.range_sigma = py::cast<double>(v);
        else
            throw contract_error("unknown config key '" + key + "'");
    }
    return cfg;
}

py::object report_to_py(const TaskReport& rep) {
    const py::object loads = py::module_::import("json").attr("loads");
    return loads(rep.to_json().dump());
}

ActivationSpec spec_from_args(const std::string& name, double T, double sigma, double zeta,
                              double beta, double omega0) {
    ActivationSpec s;
    s.kind = activation_from_name(name);
    s.T = T;
    s.sigma = sigma;
    s.zeta = zeta;
    s.beta = beta;
    s.omega0 = omega0 > 0.0 ? omega0 : default_omega0(s.kind);
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Band-limited coordinate-network toolkit (RC-GAUSS activation, "
              "wavelet-energy-guided encoding, spectral diagnostics)";
    apply_thread_cap();

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const config_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const contract_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const dimension_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const io_error& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const divergence_error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        } catch (const numeric_error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def(
        "rc_basis",
        [](const DArray& x, double T, double beta) {
            return elementwise(x, [&](double v) { return rc_basis(v, T, beta); });
        },
        py::arg("x"), py::arg("T") = 1.0, py::arg("beta") = 0.05,
        "Raised-cosine kernel sinc(x/T)/T with roll-off correction");

    m.def(
        "rc_gauss",
        [](const DArray& x, double T, double sigma, double zeta, double beta) {
            ActivationSpec s;
            s.T = T;
            s.sigma = sigma;
            s.zeta = zeta;
            s.beta = beta;
            return elementwise(x, [&](double v) { return rc_gauss(v, s); });
        },
        py::arg("x"), py::arg("T") = 1.0, py::arg("sigma") = 2.0, py::arg("zeta") = 0.0,
        py::arg("beta") = 0.05);

    m.def(
        "activation",
        [](const std::string& name, const DArray& x, double T, double sigma, double zeta,
           double beta, double omega0) {
            const ActivationSpec s = spec_from_args(name, T, sigma, zeta, beta, omega0);
            return elementwise(x, [&](double v) { return activation_value(v, s); });
        },
        py::arg("name"), py::arg("x"), py::arg("T") = 1.0, py::arg("sigma") = 2.0,
        py::arg("zeta") = 0.0, py::arg("beta") = 0.05, py::arg("omega0") = 0.0);

    m.def(
        "positional_encode",
        [](const DArray& coords, int bands) {
            return from_matrix(positional_encode(to_matrix(coords), bands));
        },
        py::arg("coords"), py::arg("bands"));

    m.def(
        "dwt2",
        [](const DArray& img) {
            const Subbands sb = dwt2(to_matrix(img));
            return py::make_tuple(from_matrix(sb.ll), from_matrix(sb.lh), from_matrix(sb.hl),
                                  from_matrix(sb.hh));
        },
        py::arg("image"), "Single-level orthonormal Haar sub-bands (LL, LH, HL, HH)");

    m.def(
        "idwt2",
        [](const DArray& ll, const DArray& lh, const DArray& hl, const DArray& hh, int h,
           int w) {
            Subbands sb;
            sb.ll = to_matrix(ll);
            sb.lh = to_matrix(lh);
            sb.hl = to_matrix(hl);
            sb.hh = to_matrix(hh);
            sb.orig_h = h > 0 ? h : 2 * sb.ll.rows;
            sb.orig_w = w > 0 ? w : 2 * sb.ll.cols;
            return from_matrix(idwt2(sb));
        },
        py::arg("ll"), py::arg("lh"), py::arg("hl"), py::arg("hh"), py::arg("h") = -1,
        py::arg("w") = -1);

    m.def(
        "energy_map",
        [](const DArray& gray, bool absolute) {
            return from_matrix(energy_map(to_matrix(gray), absolute));
        },
        py::arg("gray"), py::arg("absolute") = false);

    m.def(
        "normalize_scores",
        [](const DArray& raw, double eps) {
            return from_matrix(normalize_scores(to_matrix(raw), eps));
        },
        py::arg("raw"), py::arg("eps") = 1e-8);

    m.def(
        "guided_filter",
        [](const DArray& guide, const DArray& scores, int r, double reg) {
            return from_matrix(guided_filter(to_matrix(guide), to_matrix(scores), r, reg));
        },
        py::arg("guide"), py::arg("scores"), py::arg("r") = 4, py::arg("reg") = 1e-3);

    m.def(
        "bilateral_filter",
        [](const DArray& scores, double spatial_sigma, double range_sigma) {
            return from_matrix(bilateral_filter(to_matrix(scores), spatial_sigma, range_sigma));
        },
        py::arg("scores"), py::arg("spatial_sigma") = 2.0, py::arg("range_sigma") = 0.1);

    m.def(
        "psnr",
        [](const DArray& a, const DArray& b, double peak) {
            if (a.size() != b.size()) throw dimension_error("psnr: size mismatch");
            return psnr_values(a.data(), b.data(), static_cast<size_t>(a.size()), peak);
        },
        py::arg("a"), py::arg("b"), py::arg("peak") = 1.0);

    m.def(
        "ssim", [](const DArray& a, const DArray& b) { return ssim(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "iou",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& b) {
            std::vector<uint8_t> va(a.data(), a.data() + a.size());
            std::vector<uint8_t> vb(b.data(), b.data() + b.size());
            return iou(va, vb);
        },
        py::arg("pred"), py::arg("target"));

    m.def(
        "add_noise",
        [](const DArray& img, double poisson_level, double gaussian_sigma, uint64_t seed) {
            return from_image(add_noise(to_image(img), poisson_level, gaussian_sigma, seed));
        },
        py::arg("image"), py::arg("poisson_level") = 30.0, py::arg("gaussian_sigma") = 2.0,
        py::arg("seed") = 1);

    m.def(
        "uncertainty_product",
        [](const std::string& activation, double T, double sigma, double beta, double omega0,
           double halfwidth, int samples) {
            const ActivationSpec s = spec_from_args(activation, T, sigma, 0.0, beta, omega0);
            const UncertaintyResult u = uncertainty_product(s, halfwidth, samples);
            return py::make_tuple(u.sigma_t, u.sigma_f, u.product);
        },
        py::arg("activation") = "rc-gauss", py::arg("T") = 1.0, py::arg("sigma") = 2.0,
        py::arg("beta") = 0.05, py::arg("omega0") = 0.0, py::arg("halfwidth") = 16.0,
        py::arg("samples") = 8192,
        "Returns (sigma_t, sigma_f, product); the lower bound is 1/(4*pi)");

    m.def(
        "ntk_eigenvalues",
        [](const std::string& activation, int n_inputs, int n_neurons, int n_seeds,
           uint64_t seed, double T, double sigma, double zeta, double omega0) {
            const ActivationSpec s = spec_from_args(activation, T, sigma, zeta, 0.05, omega0);
            const KernelSpectrum ks = empirical_ntk(s, n_inputs, n_neurons, n_seeds, seed);
            py::array_t<double> out(
                std::vector<py::ssize_t>{static_cast<py::ssize_t>(ks.eigenvalues.size())});
            std::copy(ks.eigenvalues.begin(), ks.eigenvalues.end(), out.mutable_data());
            return out;
        },
        py::arg("activation"), py::arg("n_inputs") = 128, py::arg("n_neurons") = 1024,
        py::arg("n_seeds") = 32, py::arg("seed") = 7, py::arg("T") = 1.0,
        py::arg("sigma") = 2.0, py::arg("zeta") = 1.0, py::arg("omega0") = 0.0);

    m.def(
        "stft_line",
        [](const DArray& image, int row, int window, int hop) {
            const Spectrogram sg = stft_line(to_image(image), row, window, hop);
            DArray db({static_cast<py::ssize_t>(sg.frames), static_cast<py::ssize_t>(sg.bins)});
            std::copy(sg.magnitudes_db.begin(), sg.magnitudes_db.end(), db.mutable_data());
            py::array_t<double> freqs(
                std::vector<py::ssize_t>{static_cast<py::ssize_t>(sg.bins)});
            std::copy(sg.freq_axis.begin(), sg.freq_axis.end(), freqs.mutable_data());
            return py::make_tuple(db, freqs);
        },
        py::arg("image"), py::arg("row"), py::arg("window") = 256, py::arg("hop") = 64);

    m.def(
        "fit_image",
        [](const DArray& image, const py::dict& config) {
            const TaskReport rep = fit_image(to_image(image), config_from_dict(config));
            return report_to_py(rep);
        },
        py::arg("image"), py::arg("config") = py::dict());

    m.def(
        "super_resolve",
        [](const DArray& lr, const DArray& hr, double scale, const py::dict& config) {
            const TaskReport rep =
                super_resolve(to_image(lr), to_image(hr), scale, config_from_dict(config));
            return report_to_py(rep);
        },
        py::arg("lr"), py::arg("hr"), py::arg("scale"), py::arg("config") = py::dict());

    m.def(
        "denoise",
        [](const DArray& noisy, const DArray& clean, const py::dict& config) {
            const TaskReport rep = denoise(to_image(noisy), to_image(clean),
                                           config_from_dict(config));
            return report_to_py(rep);
        },
        py::arg("noisy"), py::arg("clean"), py::arg("config") = py::dict());

    m.def(
        "fit_occupancy",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& voxels,
           const py::dict& config) {
            if (voxels.ndim() != 3) throw contract_error("expected a DxHxW uint8 array");
            OccupancyGrid g;
            g.d = static_cast<int>(voxels.shape(0));
            g.h = static_cast<int>(voxels.shape(1));
            g.w = static_cast<int>(voxels.shape(2));
            g.voxels.assign(voxels.data(), voxels.data() + voxels.size());
            return report_to_py(fit_occupancy(g, config_from_dict(config)));
        },
        py::arg("voxels"), py::arg("config") = py::dict());

    m.def(
        "model_predict",
        [](const std::string& model_path, const DArray& coords) {
            const InrModel model = InrModel::load(model_path);
            return from_matrix(model.predict(to_matrix(coords)));
        },
        py::arg("model_path"), py::arg("coords"),
        "Forward pass of a saved FLR1 model over N x input_dim coordinates");

    m.attr("UNCERTAINTY_LOWER_BOUND") = 1.0 / (4.0 * M_PI);
}

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flair/activation.hpp"
#include "flair/image.hpp"
#include "flair/matrix.hpp"
#include "flair/network.hpp"

namespace flair {

// Gradient Gram matrix of a random-feature 1D network plus its eigenvalues
// (descending).
struct KernelSpectrum {
    Matrix gram;
    std::vector<double> eigenvalues;
};

// Monte-Carlo estimate of E_theta[grad_theta f(x) . grad_theta f(x')] for
// f(x) = sum_k c_k act(w_k x + b_k) over a uniform grid in [-1,1].
// Weights/biases follow the activation's init scheme.
KernelSpectrum empirical_ntk(const ActivationSpec& act, int n_inputs, int n_neurons, int n_seeds,
                             uint64_t seed = 7);

// Eigenvalues of a symmetric matrix via cyclic Jacobi sweeps, descending.
// Throws numeric_error with the residual off-diagonal norm if sweeps fail
// to converge.
std::vector<double> symmetric_eigenvalues(const Matrix& sym);

struct Spectrogram {
    int window = 256;
    int hop = 64;
    int frames = 0;
    int bins = 0;                       // window/2 + 1
    std::vector<double> magnitudes_db;  // frames x bins, floored at -120 dB
    std::vector<double> freq_axis;      // cycles/sample per bin

    double db(int frame, int bin) const {
        return magnitudes_db[static_cast<size_t>(frame) * bins + bin];
    }
};

std::vector<double> hann_window(int n);

// Hann-windowed magnitude STFT (dB) of one horizontal scan line of the
// image's luma; the frame index is the window start / hop.
Spectrogram stft_line(const Image& image, int row, int window = 256, int hop = 64);

// Centered 2D FFT magnitudes of every neuron of one hidden layer (1-based
// index), evaluated over a grid_n x grid_n grid on [-1,1]^2. Any non-spatial
// input channel is held at zero.
std::vector<std::vector<double>> neuron_fft(const InrModel& model, int layer, int grid_n);

struct UncertaintyResult {
    double sigma_t = 0.0;
    double sigma_f = 0.0;
    double product = 0.0;
};

// Discretized second-moment spreads of |psi|^2 in time and of its FFT
// magnitude^2 in frequency (cycles per unit), for the basis with zeta = 0.
UncertaintyResult uncertainty_product(const ActivationSpec& spec, double domain_halfwidth,
                                      int samples);

// Magnitude spectrum samples (f >= 0, cycles/unit) of the zeta = 0 basis;
// used for band-limit checks.
std::vector<std::pair<double, double>> basis_spectrum(const ActivationSpec& spec,
                                                      double domain_halfwidth, int samples);

void write_ntk_csv(const std::string& path, const KernelSpectrum& ks);
void write_stft_csv(const std::string& path, const Spectrogram& sg);
void save_spectrogram_png(const std::string& path, const Spectrogram& sg);
void save_neuron_fft_montage(const std::string& path,
                             const std::vector<std::vector<double>>& spectra, int grid_n);

}  // namespace flair

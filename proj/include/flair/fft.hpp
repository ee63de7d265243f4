#pragma once

#include <complex>
#include <vector>

namespace flair {

using cplx = std::complex<double>;

// Unscaled forward DFT (inverse applies the 1/N factor). Radix-2 in place
// for power-of-two lengths, direct evaluation otherwise.
void fourier_transform(std::vector<cplx>& a, bool inverse = false);

// Centered (DC in the middle) 2D FFT magnitudes of a real n x n grid stored
// row-major.
std::vector<double> fft2d_magnitude_centered(const std::vector<double>& grid, int n);

}  // namespace flair

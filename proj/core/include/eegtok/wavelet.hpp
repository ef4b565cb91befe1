#pragma once

#include <array>
#include <vector>

#include "eegtok/eegio.hpp"

namespace eegtok {

// sym4 orthonormal decomposition pair: lowpass h and its quadrature mirror
// g[k] = (-1)^k h[7-k]. Sum h = sqrt(2), sum h^2 = 1.
std::pair<std::array<double, 8>, std::array<double, 8>> sym4_filters();

// Undecimated (a-trous) transform coefficients of one channel. All sequences
// keep the input length; approx[j-1] = A_j, details[j-1] = D_j.
struct SwtCoeffs {
  std::vector<std::vector<double>> approx;
  std::vector<std::vector<double>> details;
  int levels = 0;
};

// Stationary wavelet transform with circular boundary handling. Level j uses
// the filters upsampled by 2^(j-1). Requires len(x) divisible by 2^J and
// len(x) >= 2^J * 8.
SwtCoeffs swt_decompose(const std::vector<double>& x, int levels = 4);

// Inverse transform; exact up to floating-point roundoff.
std::vector<double> swt_reconstruct(const SwtCoeffs& coeffs);

// Per-channel rhythm-specific signals at fs = 128 Hz.
struct BandStack {
  std::array<std::vector<double>, 5> bands;  // indexed by Band::Delta..Gamma

  const std::vector<double>& operator[](Band b) const {
    return bands[static_cast<std::size_t>(b)];
  }
};

// Four-level SWT band split at 128 Hz: delta <- A_4, theta <- D_4,
// alpha <- D_3, beta <- D_2, gamma <- D_1, each reconstructed back to the
// signal domain so the five bands sum to the input exactly.
BandStack extract_bands(const std::vector<double>& x);

}  // namespace eegtok

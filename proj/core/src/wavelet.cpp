#include "eegtok/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace eegtok {
namespace {

// sym4 decomposition lowpass (symlet-4, pywt/Matlab tap ordering).
constexpr std::array<double, 8> kSym4Lo = {
    -0.07576571478927333, -0.02963552764599851, 0.49761866763201545,
    0.80373875180591614,  0.29785779560527736,  -0.09921954357684722,
    -0.01260396726203783, 0.03222310060404270};

// Correlation analysis step: out[n] = sum_k f[k] * x[(n + scale*k) mod N].
std::vector<double> analyze(const std::vector<double>& x, const std::array<double, 8>& f,
                            std::size_t scale) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 8; ++k) acc += f[k] * x[(i + scale * k) % n];
    out[i] = acc;
  }
  return out;
}

// Convolution synthesis step; the 1/2 factor restores unit overall gain since
// |H|^2 + |G|^2 = 2 for the orthonormal pair.
std::vector<double> synthesize(const std::vector<double>& a, const std::vector<double>& d,
                               const std::array<double, 8>& h, const std::array<double, 8>& g,
                               std::size_t scale) {
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t idx = (i + n - (scale * k) % n) % n;
      acc += h[k] * a[idx] + g[k] * d[idx];
    }
    out[i] = 0.5 * acc;
  }
  return out;
}

}  // namespace

std::pair<std::array<double, 8>, std::array<double, 8>> sym4_filters() {
  std::array<double, 8> h = kSym4Lo;
  std::array<double, 8> g{};
  for (std::size_t k = 0; k < 8; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[7 - k];
  return {h, g};
}

SwtCoeffs swt_decompose(const std::vector<double>& x, int levels) {
  if (levels < 1) throw std::invalid_argument("swt: levels must be >= 1");
  const std::size_t n = x.size();
  const std::size_t div = std::size_t{1} << levels;
  if (n % div != 0) throw std::invalid_argument("swt: length not divisible by 2^J");
  if (n < div * 8) throw std::invalid_argument("swt: signal too short for J levels");

  const auto [h, g] = sym4_filters();
  SwtCoeffs coeffs;
  coeffs.levels = levels;
  std::vector<double> a = x;
  for (int j = 1; j <= levels; ++j) {
    const std::size_t scale = std::size_t{1} << (j - 1);
    coeffs.details.push_back(analyze(a, g, scale));
    a = analyze(a, h, scale);
    coeffs.approx.push_back(a);
  }
  return coeffs;
}

std::vector<double> swt_reconstruct(const SwtCoeffs& coeffs) {
  if (coeffs.levels < 1 || coeffs.approx.size() != static_cast<std::size_t>(coeffs.levels) ||
      coeffs.details.size() != static_cast<std::size_t>(coeffs.levels))
    throw std::invalid_argument("swt_reconstruct: inconsistent coefficient set");
  const std::size_t n = coeffs.approx.back().size();
  for (const auto* seqs : {&coeffs.approx, &coeffs.details})
    for (const auto& s : *seqs)
      if (s.size() != n) throw std::invalid_argument("swt_reconstruct: inconsistent lengths");

  const auto [h, g] = sym4_filters();
  std::vector<double> a = coeffs.approx.back();
  for (int j = coeffs.levels; j >= 1; --j) {
    const std::size_t scale = std::size_t{1} << (j - 1);
    a = synthesize(a, coeffs.details[static_cast<std::size_t>(j - 1)], h, g, scale);
  }
  return a;
}

BandStack extract_bands(const std::vector<double>& x) {
  if (x.size() % 16 != 0)
    throw std::invalid_argument("extract_bands: length must be divisible by 16");
  constexpr int kLevels = 4;
  const auto coeffs = swt_decompose(x, kLevels);

  // Reconstruct each band from its single sub-band; linearity of the inverse
  // makes the five signals sum back to the input.
  auto single_band = [&](int detail_level /* 0 = use A_4 */) {
    SwtCoeffs c;
    c.levels = kLevels;
    const std::size_t n = x.size();
    for (int j = 1; j <= kLevels; ++j) {
      c.approx.emplace_back(n, 0.0);
      c.details.emplace_back(n, 0.0);
    }
    if (detail_level == 0)
      c.approx.back() = coeffs.approx.back();
    else
      c.details[static_cast<std::size_t>(detail_level - 1)] =
          coeffs.details[static_cast<std::size_t>(detail_level - 1)];
    return swt_reconstruct(c);
  };

  BandStack stack;
  stack.bands[static_cast<std::size_t>(Band::Delta)] = single_band(0);  // A_4: 0-4 Hz
  stack.bands[static_cast<std::size_t>(Band::Theta)] = single_band(4);  // D_4: 4-8 Hz
  stack.bands[static_cast<std::size_t>(Band::Alpha)] = single_band(3);  // D_3: 8-16 Hz
  stack.bands[static_cast<std::size_t>(Band::Beta)] = single_band(2);   // D_2: 16-32 Hz
  stack.bands[static_cast<std::size_t>(Band::Gamma)] = single_band(1);  // D_1: 32-64 Hz
  return stack;
}

}  // namespace eegtok

#pragma once

#include <string>
#include <vector>

#include "eegtok/eegio.hpp"

namespace eegtok {

struct FilterSpec {
  double lo = 0.5;   // Hz
  double hi = 45.0;  // Hz
  int order = 4;     // Butterworth prototype order
  bool zero_phase = true;
};

// Second-order section of an IIR cascade (a0 normalized to 1).
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Digital Butterworth band-pass as a cascade of `order` biquads, gain
// normalized to exactly 1 at the geometric band center.
std::vector<Biquad> butter_bandpass(double lo, double hi, double fs, int order = 4);

std::vector<double> sosfilt(const std::vector<Biquad>& sos, const std::vector<double>& x);

// Band-pass filter; zero_phase applies the cascade forward and backward with
// odd-reflection padding so mid-band components keep zero group delay.
std::vector<double> bandpass(const std::vector<double>& x, double fs, const FilterSpec& spec);

// Rational-ratio resampler (upsample p, Kaiser windowed-sinc FIR, downsample
// q). Output length is round(len * fs_out / fs_in).
std::vector<double> resample(const std::vector<double>& x, double fs_in, double fs_out = 128.0);

// Windows of length L starting every L*(1-overlap) samples; trailing samples
// that do not fill a window are dropped.
std::vector<std::vector<double>> segment(const std::vector<double>& x, std::size_t L = 128,
                                         double overlap = 0.5);

// Per-row z-score with population (1/N) std; rows with std < 1e-8 map to zero.
void zscore_inplace(std::vector<std::vector<double>>& seg);
std::vector<std::vector<double>> zscore(const std::vector<std::vector<double>>& seg);

// One normalized training window.
struct Segment {
  std::vector<std::vector<double>> data;  // [n_channels][L]
  std::string subject_id;
  Label label = Label::HC;
  Band band = Band::Full;
  std::size_t index = 0;
};

}  // namespace eegtok

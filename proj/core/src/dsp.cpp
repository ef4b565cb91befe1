#include "eegtok/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace eegtok {
namespace {

using cd = std::complex<double>;

// Evaluate one section's response at z.
cd biquad_response(const Biquad& s, cd z) {
  const cd zi = 1.0 / z;
  return (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
}

}  // namespace

std::vector<Biquad> butter_bandpass(double lo, double hi, double fs, int order) {
  if (!(0.0 < lo && lo < hi && hi < fs / 2.0))
    throw std::invalid_argument("butter_bandpass: need 0 < lo < hi < fs/2");
  if (order < 1) throw std::invalid_argument("butter_bandpass: order must be >= 1");

  // Pre-warped analog band edges for the bilinear transform.
  const double k = 2.0 * fs;
  const double wl = k * std::tan(M_PI * lo / fs);
  const double wh = k * std::tan(M_PI * hi / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // Analog Butterworth prototype poles on the unit circle, left half-plane;
  // each maps to two band-pass poles under s -> (s^2 + w0^2)/(bw*s).
  // Band-pass zeros (z = +1 and z = -1, `order` of each) give b = (1, 0, -1).
  std::vector<Biquad> sos;
  auto bilinear = [&](cd s) { return (k + s) / (k - s); };
  auto bp_poles = [&](cd p) {
    const cd bp = bw * p;
    const cd disc = std::sqrt(bp * bp - 4.0 * w0 * w0);
    return std::pair<cd, cd>{(bp + disc) / 2.0, (bp - disc) / 2.0};
  };
  for (int i = 1; i <= order; ++i) {
    const double theta = M_PI * (2.0 * i + order - 1.0) / (2.0 * order);
    const cd p(std::cos(theta), std::sin(theta));
    if (p.imag() > 1e-12) {
      // Upper-half prototype pole: its two band-pass poles each pair with a
      // conjugate contributed by conj(p), so each yields one section.
      const auto [s1, s2] = bp_poles(p);
      for (cd z : {bilinear(s1), bilinear(s2)})
        sos.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
    } else if (std::abs(p.imag()) <= 1e-12) {
      // Real prototype pole: the two band-pass poles are mutually conjugate
      // (or both real) and form exactly one section.
      const auto [s1, s2] = bp_poles(cd(p.real(), 0.0));
      const cd z1 = bilinear(s1), z2 = bilinear(s2);
      sos.push_back({1.0, 0.0, -1.0, -(z1 + z2).real(), (z1 * z2).real()});
    }
  }
  if (sos.size() != static_cast<std::size_t>(order))
    throw std::logic_error("butter_bandpass: section pairing failed");

  // Normalize to unit gain at the geometric band center.
  const double wc = 2.0 * M_PI * std::sqrt(lo * hi) / fs;
  const cd zc = std::polar(1.0, wc);
  double mag = 1.0;
  for (const auto& s : sos) mag *= std::abs(biquad_response(s, zc));
  const double g = std::pow(1.0 / mag, 1.0 / order);
  for (auto& s : sos) {
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
  }
  return sos;
}

namespace {

// Transposed direct-form II with initial state matched to the input level x0,
// so a constant input produces its steady-state response from sample one.
std::vector<double> sosfilt_zi(const std::vector<Biquad>& sos, const std::vector<double>& x,
                               double x0) {
  std::vector<double> y = x;
  double level = x0;  // DC level entering the current section
  for (const auto& s : sos) {
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double s2 = (s.b2 - s.a2 * dc) * level;
    double s1 = (s.b1 - s.a1 * dc) * level + s2;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level *= dc;
  }
  return y;
}

}  // namespace

std::vector<double> sosfilt(const std::vector<Biquad>& sos, const std::vector<double>& x) {
  return sosfilt_zi(sos, x, 0.0);
}

std::vector<double> bandpass(const std::vector<double>& x, double fs, const FilterSpec& spec) {
  if (x.size() <= static_cast<std::size_t>(3 * spec.order))
    throw std::invalid_argument("bandpass: signal too short");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("bandpass: non-finite input");
  const auto sos = butter_bandpass(spec.lo, spec.hi, fs, spec.order);
  if (!spec.zero_phase) return sosfilt_zi(sos, x, x.front());

  // Odd-reflection padding on both ends.
  const std::size_t pad = std::min<std::size_t>(3 * spec.order, x.size() - 1);
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[x.size() - 1 - i]);

  auto fwd = sosfilt_zi(sos, ext, ext.front());
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = sosfilt_zi(sos, fwd, fwd.front());
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad),
          bwd.begin() + static_cast<std::ptrdiff_t>(pad + x.size())};
}

namespace {

double bessel_i0(double x) {
  // Series expansion; converges quickly for the beta values used here.
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

// Best rational approximation p/q with q bounded, by continued fractions.
std::pair<long, long> to_rational(double ratio, long max_den) {
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = ratio;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(x);
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = x - a;
    if (frac < 1e-12) break;
    x = 1.0 / frac;
  }
  if (q1 == 0 || std::abs(static_cast<double>(p1) / q1 - ratio) > 1e-9 * ratio)
    throw std::invalid_argument("resample: ratio not expressible as a small rational");
  return {p1, q1};
}

}  // namespace

std::vector<double> resample(const std::vector<double>& x, double fs_in, double fs_out) {
  if (x.empty()) throw std::invalid_argument("resample: empty input");
  if (fs_in <= 0 || fs_out <= 0) throw std::invalid_argument("resample: rates must be positive");
  if (fs_in == fs_out) return x;

  const auto [p, q] = to_rational(fs_out / fs_in, 1000);
  if (p > 1000) throw std::invalid_argument("resample: ratio not expressible as a small rational");

  // Kaiser windowed-sinc low-pass at the tighter of the two Nyquist limits.
  const long m = std::max(p, q);
  const long n_taps = 64 * m + 1;
  const long center = (n_taps - 1) / 2;
  const double beta = 8.0;
  const double fc = 1.0 / static_cast<double>(m);  // fraction of upsampled Nyquist
  const double i0b = bessel_i0(beta);
  std::vector<double> h(static_cast<std::size_t>(n_taps));
  for (long i = 0; i < n_taps; ++i) {
    const double t = static_cast<double>(i - center);
    const double sinc = t == 0.0 ? 1.0 : std::sin(M_PI * fc * t) / (M_PI * fc * t);
    const double r = t / static_cast<double>(center);
    const double win = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[static_cast<std::size_t>(i)] = static_cast<double>(p) * fc * sinc * win;
  }

  const long len = static_cast<long>(x.size());
  const long n_out = std::lround(static_cast<double>(x.size()) * fs_out / fs_in);
  std::vector<double> y(static_cast<std::size_t>(n_out), 0.0);
  for (long out = 0; out < n_out; ++out) {
    // Output sample `out` sits at position out*q on the upsampled grid.
    const long u = out * q + center;
    long n_lo = (u - n_taps + 1 + p - 1) / p;  // ceil((u - n_taps + 1) / p)
    if (u - n_taps + 1 <= 0) n_lo = 0;
    n_lo = std::max(0L, n_lo);
    const long n_hi = std::min(len - 1, u / p);
    double acc = 0.0;
    for (long n = n_lo; n <= n_hi; ++n)
      acc += x[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(u - n * p)];
    y[static_cast<std::size_t>(out)] = acc;
  }
  return y;
}

std::vector<std::vector<double>> segment(const std::vector<double>& x, std::size_t L,
                                         double overlap) {
  if (x.size() < L) throw std::invalid_argument("segment: signal shorter than L");
  const std::size_t step = static_cast<std::size_t>(std::lround(L * (1.0 - overlap)));
  if (step == 0 || step > L) throw std::invalid_argument("segment: bad overlap");
  std::vector<std::vector<double>> out;
  for (std::size_t start = 0; start + L <= x.size(); start += step)
    out.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(start),
                     x.begin() + static_cast<std::ptrdiff_t>(start + L));
  return out;
}

void zscore_inplace(std::vector<std::vector<double>>& seg) {
  for (auto& row : seg) {
    if (row.empty()) throw std::invalid_argument("zscore: empty row");
    double mean = 0.0;
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("zscore: non-finite input");
      mean += v;
    }
    mean /= static_cast<double>(row.size());
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(row.size());
    const double sd = std::sqrt(var);
    if (sd < 1e-8) {
      std::fill(row.begin(), row.end(), 0.0);
    } else {
      for (double& v : row) v = (v - mean) / sd;
    }
  }
}

std::vector<std::vector<double>> zscore(const std::vector<std::vector<double>>& seg) {
  auto out = seg;
  zscore_inplace(out);
  return out;
}

}  // namespace eegtok

#include "eegtok/montage.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

namespace eegtok {
namespace {

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (n == 0.0) throw std::invalid_argument("zero-length electrode position");
  return {v[0] / n, v[1] / n, v[2] / n};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Great-circle midpoint of two unit vectors.
Vec3 slerp_mid(const Vec3& a, const Vec3& b) {
  return normalized({a[0] + b[0], a[1] + b[1], a[2] + b[2]});
}

MontageSpec build_standard_10_20() {
  const double deg = M_PI / 180.0;
  // Idealized spherical 10-20 geometry: midline electrodes at 36 degrees of
  // inclination from the vertex, circumferential ring at 72 degrees.
  auto ring = [&](double azimuth_deg) -> Vec3 {
    const double inc = 72.0 * deg, az = azimuth_deg * deg;
    return {std::sin(inc) * std::sin(az), std::sin(inc) * std::cos(az), std::cos(inc)};
  };
  const Vec3 Cz = {0, 0, 1};
  const Vec3 Fz = {0, std::sin(36 * deg), std::cos(36 * deg)};
  const Vec3 Pz = {0, -std::sin(36 * deg), std::cos(36 * deg)};
  const Vec3 C3 = {-std::sin(36 * deg), 0, std::cos(36 * deg)};
  const Vec3 C4 = {+std::sin(36 * deg), 0, std::cos(36 * deg)};
  const Vec3 Fp1 = ring(-18), Fp2 = ring(+18);
  const Vec3 F7 = ring(-54), F8 = ring(+54);
  const Vec3 T7 = ring(-90), T8 = ring(+90);
  const Vec3 P7 = ring(-126), P8 = ring(+126);
  const Vec3 O1 = ring(-162), O2 = ring(+162);
  const Vec3 F3 = slerp_mid(Fz, F7), F4 = slerp_mid(Fz, F8);
  const Vec3 P3 = slerp_mid(Pz, P7), P4 = slerp_mid(Pz, P8);

  MontageSpec spec;
  spec.names = {"Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T7", "C3", "Cz",
                "C4", "T8", "P7", "P3", "Pz", "P4", "P8", "O1", "O2"};
  spec.positions = {Fp1, Fp2, F7, F3, Fz, F4, F8, T7, C3, Cz,
                    C4, T8, P7, P3, Pz, P4, P8, O1, O2};
  for (auto& p : spec.positions) p = normalized(p);
  return spec;
}

}  // namespace

void MontageSpec::validate() const {
  if (names.size() != positions.size())
    throw std::invalid_argument("montage: names/positions size mismatch");
  std::set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second) throw std::invalid_argument("montage: duplicate channel " + n);
  for (const auto& p : positions) {
    const double n2 = dot(p, p);
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-9)
      throw std::invalid_argument("montage: position not on the unit sphere");
  }
}

int MontageSpec::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

const MontageSpec& standard_10_20() {
  static const MontageSpec spec = build_standard_10_20();
  return spec;
}

MontageSpec load_positions_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  const auto j = nlohmann::json::parse(is);
  MontageSpec spec;
  for (const auto& [name, pos] : j.items()) {
    if (!pos.is_array() || pos.size() != 3)
      throw std::runtime_error("positions file: expected [x,y,z] for " + name);
    spec.names.push_back(name);
    spec.positions.push_back(
        normalized({pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()}));
  }
  spec.validate();
  return spec;
}

double legendre(int n, double x) {
  if (n < 0) throw std::invalid_argument("legendre: negative degree");
  if (std::abs(x) > 1.0 + 1e-12) throw std::invalid_argument("legendre: |x| > 1");
  x = std::clamp(x, -1.0, 1.0);
  if (n == 0) return 1.0;
  double p_prev = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = p_next;
  }
  return p;
}

double spline_kernel(double x, int m, int n_terms) {
  if (m < 2) throw std::invalid_argument("spline_kernel: m must be >= 2");
  if (n_terms < 7) throw std::invalid_argument("spline_kernel: n_terms must be >= 7");
  if (std::abs(x) > 1.0 + 1e-12) throw std::invalid_argument("spline_kernel: |x| > 1");
  x = std::clamp(x, -1.0, 1.0);
  // Recurrence inlined so the full series costs one pass.
  double p_prev = 1.0;  // P_0
  double p = x;         // P_1
  double sum = 3.0 / std::pow(2.0, m) * p;  // n = 1 term
  for (int n = 2; n <= n_terms; ++n) {
    const double p_next = ((2.0 * n - 1.0) * x * p - (n - 1.0) * p_prev) / n;
    p_prev = p;
    p = p_next;
    sum += (2.0 * n + 1.0) / std::pow(static_cast<double>(n) * (n + 1.0), m) * p;
  }
  return sum / (4.0 * M_PI);
}

namespace {

Eigen::MatrixXd augmented_system(const std::vector<Vec3>& src, int m, double lambda,
                                 int n_terms) {
  const int n = static_cast<int>(src.size());
  Eigen::MatrixXd a(n + 1, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = spline_kernel(dot(src[i], src[j]), m, n_terms) + (i == j ? lambda : 0.0);
  for (int i = 0; i < n; ++i) {
    a(i, n) = 1.0;
    a(n, i) = 1.0;
  }
  a(n, n) = 0.0;
  return a;
}

Eigen::FullPivLU<Eigen::MatrixXd> factorize_or_throw(const Eigen::MatrixXd& a) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw std::runtime_error("fit_spline: singular system");
  return lu;
}

}  // namespace

SplineModel fit_spline(const std::vector<Vec3>& src_positions,
                       const std::vector<double>& values, int m, double lambda,
                       int n_terms) {
  const int n = static_cast<int>(src_positions.size());
  if (n < 4) throw std::invalid_argument("fit_spline: need at least 4 electrodes");
  if (values.size() != src_positions.size())
    throw std::invalid_argument("fit_spline: values/positions size mismatch");
  const auto lu = factorize_or_throw(augmented_system(src_positions, m, lambda, n_terms));
  Eigen::VectorXd rhs(n + 1);
  for (int i = 0; i < n; ++i) rhs(i) = values[i];
  rhs(n) = 0.0;
  const Eigen::VectorXd sol = lu.solve(rhs);
  SplineModel model;
  model.m = m;
  model.lambda = lambda;
  model.n_terms = n_terms;
  model.c0 = sol(n);
  model.c.assign(sol.data(), sol.data() + n);
  return model;
}

std::vector<double> interpolate_at(const SplineModel& model,
                                   const std::vector<Vec3>& src_positions,
                                   const std::vector<Vec3>& dst_positions) {
  if (model.c.size() != src_positions.size())
    throw std::invalid_argument("interpolate_at: model/source size mismatch");
  std::vector<double> out(dst_positions.size(), model.c0);
  for (std::size_t k = 0; k < dst_positions.size(); ++k)
    for (std::size_t j = 0; j < src_positions.size(); ++j)
      out[k] += model.c[j] *
                spline_kernel(dot(dst_positions[k], src_positions[j]), model.m, model.n_terms);
  return out;
}

SplineInterpolator::SplineInterpolator(const std::vector<Vec3>& src_positions,
                                       const std::vector<Vec3>& dst_positions, int m,
                                       double lambda, int n_terms) {
  const int n = static_cast<int>(src_positions.size());
  const int nd = static_cast<int>(dst_positions.size());
  if (n < 4) throw std::invalid_argument("interpolator: need at least 4 source electrodes");
  const auto lu = factorize_or_throw(augmented_system(src_positions, m, lambda, n_terms));
  const Eigen::MatrixXd inv = lu.inverse();
  Eigen::MatrixXd gds(nd, n + 1);
  for (int k = 0; k < nd; ++k) {
    for (int j = 0; j < n; ++j)
      gds(k, j) = spline_kernel(dot(dst_positions[k], src_positions[j]), m, n_terms);
    gds(k, n) = 1.0;
  }
  // dst = [G_ds 1] * A^{-1} * [v; 0]: only the first n columns ever see data.
  const Eigen::MatrixXd w = gds * inv.leftCols(n);
  weights_.assign(nd, std::vector<double>(n));
  for (int k = 0; k < nd; ++k)
    for (int j = 0; j < n; ++j) weights_[k][j] = w(k, j);
}

std::vector<double> SplineInterpolator::apply(const std::vector<double>& values) const {
  std::vector<double> out(weights_.size(), 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (values.size() != weights_[k].size())
      throw std::invalid_argument("interpolator: wrong value count");
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) acc += weights_[k][j] * values[j];
    out[k] = acc;
  }
  return out;
}

Recording harmonize(const Recording& rec, const MontageSpec& target, int m, double lambda,
                    int n_terms) {
  rec.validate();
  target.validate();
  const std::size_t n_out = target.names.size();

  std::vector<int> src_index(n_out, -1);
  std::size_t present = 0;
  for (std::size_t j = 0; j < n_out; ++j) {
    for (std::size_t i = 0; i < rec.channels.size(); ++i)
      if (rec.channels[i] == target.names[j]) {
        src_index[j] = static_cast<int>(i);
        ++present;
        break;
      }
  }

  Recording out;
  out.subject_id = rec.subject_id;
  out.label = rec.label;
  out.fs = rec.fs;
  out.channels = target.names;
  out.data.assign(n_out, std::vector<double>(rec.n_samples()));

  if (present == n_out) {
    // Superset (or exact) input: select the target rows, discard the rest.
    for (std::size_t j = 0; j < n_out; ++j) out.data[j] = rec.data[src_index[j]];
    return out;
  }

  // Subset path: every input channel must be a known target electrode.
  for (const auto& name : rec.channels)
    if (target.index_of(name) < 0)
      throw std::invalid_argument("harmonize: unknown channel position for " + name);
  if (present < 4) throw std::invalid_argument("harmonize: fewer than 4 known channels");

  std::vector<Vec3> src_pos, dst_pos;
  std::vector<std::size_t> src_rows, dst_rows;
  for (std::size_t j = 0; j < n_out; ++j) {
    if (src_index[j] >= 0) {
      src_pos.push_back(target.positions[j]);
      src_rows.push_back(j);
      out.data[j] = rec.data[src_index[j]];
    } else {
      dst_pos.push_back(target.positions[j]);
      dst_rows.push_back(j);
    }
  }

  const SplineInterpolator interp(src_pos, dst_pos, m, lambda, n_terms);
  std::vector<double> sample(src_pos.size());
  for (std::size_t t = 0; t < rec.n_samples(); ++t) {
    for (std::size_t i = 0; i < src_rows.size(); ++i) sample[i] = out.data[src_rows[i]][t];
    const auto est = interp.apply(sample);
    for (std::size_t k = 0; k < dst_rows.size(); ++k) out.data[dst_rows[k]][t] = est[k];
  }
  return out;
}

}  // namespace eegtok

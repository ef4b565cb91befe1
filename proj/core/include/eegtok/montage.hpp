#pragma once

#include <array>
#include <string>
#include <vector>

#include "eegtok/eegio.hpp"

namespace eegtok {

using Vec3 = std::array<double, 3>;

// Named electrode set with unit-sphere positions.
struct MontageSpec {
  std::vector<std::string> names;
  std::vector<Vec3> positions;

  void validate() const;  // unit norms, unique names
  int index_of(const std::string& name) const;  // -1 if absent
};

// The 19-channel 10-20 montage on an idealized unit sphere
// (+x right, +y anterior, +z up).
const MontageSpec& standard_10_20();

// Positions override: JSON object mapping channel name -> [x, y, z].
MontageSpec load_positions_json(const std::string& path);

// Legendre polynomial P_n(x) by the Bonnet three-term recurrence.
double legendre(int n, double x);

// Spherical spline kernel
//   g_m(x) = (1/4pi) * sum_{n=1}^{n_terms} (2n+1) / (n(n+1))^m * P_n(x).
double spline_kernel(double x, int m = 4, int n_terms = 50);

struct SplineModel {
  int m = 4;
  double lambda = 0.0;
  int n_terms = 50;
  double c0 = 0.0;
  std::vector<double> c;  // one coefficient per source electrode
};

// Fits the augmented system [[G + lambda*I, 1], [1^T, 0]] [c; c0] = [v; 0]
// where G[i][j] = g_m(<r_i, r_j>). Throws on degenerate geometry.
SplineModel fit_spline(const std::vector<Vec3>& src_positions,
                       const std::vector<double>& values, int m = 4,
                       double lambda = 0.0, int n_terms = 50);

// Evaluates the fitted field at dst_positions: G_ds * c + c0.
std::vector<double> interpolate_at(const SplineModel& model,
                                   const std::vector<Vec3>& src_positions,
                                   const std::vector<Vec3>& dst_positions);

// Precomputed source->destination interpolation operator; the augmented
// system is factorized once and reused across all time samples.
class SplineInterpolator {
 public:
  SplineInterpolator(const std::vector<Vec3>& src_positions,
                     const std::vector<Vec3>& dst_positions, int m = 4,
                     double lambda = 0.0, int n_terms = 50);
  // values: one sample per source electrode -> one value per destination.
  std::vector<double> apply(const std::vector<double>& values) const;

 private:
  std::vector<std::vector<double>> weights_;  // [n_dst][n_src]
};

// Harmonizes a recording onto the target montage. Channels present in the
// input are copied; missing ones are spline-interpolated per time sample.
// Default m/lambda/n_terms follow the module configuration (m=4, 1e-5, 50).
Recording harmonize(const Recording& rec, const MontageSpec& target,
                    int m = 4, double lambda = 1e-5, int n_terms = 50);

}  // namespace eegtok

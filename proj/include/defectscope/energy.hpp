#pragma once
#include <vector>

#include "defectscope/chart.hpp"
#include "defectscope/field.hpp"

namespace defectscope {

// A removed disk around a defect, with the radius of the polar quadrature
// patch glued over it.  Patches must not overlap each other; a patch larger
// than the domain is fine (the angular window clips exactly).
struct Puncture {
  Vec2 center;
  double eps;
  double patch_radius;
};

struct EnergyOptions {
  int radial_per_decade = 12;
  int radial_order = 12;
  int angular_panels = 8;
  int angular_order = 12;
  int background_cells = 12;
  int background_depth = 5;
  int background_order = 4;
  bool include_shape = true;     // drop |B[u]|^2 when false
  bool convergence_check = true; // QuadratureUnresolved beyond 1 %
};

// One-constant energy on the punctured domain:
//   E = int sum_j |x^j|^{-2} ( |Du/dw_j|^2 + B_j[u]^2 ) |x^1||x^2| dw
// with the covariant derivative in frame components
//   Du/dw_j = (d_j u1 - u2 F_j) e^1 + (d_j u2 + u1 F_j) e^2
// and B_j[u] = sum_i u_i L_ij / |x^i|.
double dirichlet_energy(const TangentField& field, const Chart& chart,
                        const std::vector<Puncture>& punctures,
                        const EnergyOptions& opts = {});

// pointwise energy density (the integrand above, including the area factor)
double energy_density(const TangentField& field, const Chart& chart, const Vec2& w,
                      bool include_shape = true);

struct SweepSchedule {
  double eps_hi;
  double eps_lo;
  int count = 9;         // >= 7 so at least 5 points survive the asymptotic trim
  double patch_radius;   // outer radius R of the local annuli
};

struct EnergySweep {
  Vec2 site;
  std::vector<double> eps;
  std::vector<double> energy;
  double slope = 0;       // dE / d log(1/eps), two largest eps dropped
  double intercept = 0;
  double ci95 = 0;        // 95 % half-width on the slope
  double fit_residual = 0;
  int used_points = 0;
  double lemma_rate = 0;  // raw lower-bound rate to compare against
  bool meets_lower_bound = true;
};

// Energy sweep over a geometric epsilon schedule about one defect site; the
// fitted slope is checked against the rate-lemma lower bound (within 2 %).
EnergySweep divergence_slope(const TangentField& field, const Chart& chart, const Vec2& site,
                             const SweepSchedule& schedule, double lemma_rate,
                             const EnergyOptions& opts = {});

}  // namespace defectscope

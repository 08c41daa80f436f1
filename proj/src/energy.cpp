#include "defectscope/energy.hpp"

#include <algorithm>
#include <cmath>

#include "defectscope/errors.hpp"
#include "defectscope/quadrature.hpp"

namespace defectscope {

double energy_density(const TangentField& field, const Chart& chart, const Vec2& w,
                      bool include_shape) {
  Vec2 a = field.components(w);
  double n2 = a.squaredNorm();
  if (!(n2 > 0)) fail(errc::degenerate_point, "field vanishes at an energy quadrature node");
  double n1 = std::sqrt(n2), n3 = n1 * n2;
  double u1 = a.x() / n1, u2 = a.y() / n1;

  // d_j u_i from the symbolic component derivatives of the raw field
  double da1[2], da2[2];
  for (int j = 0; j < 2; ++j) {
    da1[j] = field.component_derivative(0, j).eval(w.x(), w.y());
    da2[j] = field.component_derivative(1, j).eval(w.x(), w.y());
  }
  double du1[2], du2[2];
  for (int j = 0; j < 2; ++j) {
    du1[j] = a.y() * (a.y() * da1[j] - a.x() * da2[j]) / n3;
    du2[j] = a.x() * (a.x() * da2[j] - a.y() * da1[j]) / n3;
  }

  Vec3 x1, x2;
  chart.first_derivatives(w, x1, x2);
  double m1 = x1.norm(), m2 = x2.norm();
  double td = chart.degeneracy_tol();
  if (m1 < td || m2 < td)
    fail(errc::degenerate_point, "energy density at a degenerate chart point");
  Vec2 F = chart.f_vector(w);

  double mj2[2] = {m1 * m1, m2 * m2};
  double dens = 0.0;
  for (int j = 0; j < 2; ++j) {
    double c1 = du1[j] - u2 * F[j];
    double c2 = du2[j] + u1 * F[j];
    dens += (c1 * c1 + c2 * c2) / mj2[j];
  }
  if (include_shape) {
    SecondFundamental L = chart.second_fundamental(w);
    double A11 = L.L11 / m1, A12 = L.L12 / m1;
    double A21 = L.L12 / m2, A22 = L.L22 / m2;
    double B1 = u1 * A11 + u2 * A21;
    double B2 = u1 * A12 + u2 * A22;
    dens += (B1 * B1) / mj2[0] + (B2 * B2) / mj2[1];
  }
  return dens * m1 * m2;
}

namespace {

struct Window {
  bool any = false;
  bool full = false;
  double a_in = 0, a_out = 0;
};

Window angular_window(const Domain& dom, const Vec2& c, double r) {
  const int scan = 720;
  std::vector<bool> in(scan);
  int count = 0;
  for (int i = 0; i < scan; ++i) {
    double a = 2 * M_PI * i / scan;
    in[i] = dom.contains(c + r * Vec2(std::cos(a), std::sin(a)), 0.0);
    if (in[i]) ++count;
  }
  Window w;
  if (count == 0) return w;
  w.any = true;
  if (count == scan) {
    w.full = true;
    return w;
  }
  int best_start = 0, best_len = 0;
  for (int i = 0; i < scan; ++i) {
    if (!in[i] || in[(i + scan - 1) % scan]) continue;
    int len = 0;
    while (len < scan && in[(i + len) % scan]) ++len;
    if (len > best_len) { best_len = len; best_start = i; }
  }
  double step = 2 * M_PI / scan;
  auto inside = [&](double a) { return dom.contains(c + r * Vec2(std::cos(a), std::sin(a)), 0.0); };
  auto refine = [&](double out_a, double in_a) {
    for (int it = 0; it < 50; ++it) {
      double mid = 0.5 * (out_a + in_a);
      if (inside(mid)) in_a = mid; else out_a = mid;
    }
    return in_a;
  };
  w.a_in = refine((best_start - 1) * step, best_start * step);
  w.a_out = refine((best_start + best_len) * step, (best_start + best_len - 1) * step);
  if (w.a_out < w.a_in) w.a_out += 2 * M_PI;
  return w;
}

// integral of the density over (B(c, r_out) \ B(c, r_in)) intersected with
// the domain, in log-radial polar coordinates
double polar_patch(const TangentField& field, const Chart& chart, const Vec2& c, double r_in,
                   double r_out, const EnergyOptions& o) {
  if (!(r_out > r_in)) return 0.0;
  const Domain& dom = chart.domain();
  const GaussRule& gr = gauss_rule(o.radial_order);
  const GaussRule& ga = gauss_rule(o.angular_order);
  double l0 = std::log(r_in), l1 = std::log(r_out);
  int npan = std::max(1, (int)std::ceil((l1 - l0) / std::log(10.0) * o.radial_per_decade));
  double total = 0.0;
  for (int p = 0; p < npan; ++p) {
    double pa = l0 + (l1 - l0) * p / npan;
    double pb = l0 + (l1 - l0) * (p + 1) / npan;
    double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
    for (size_t i = 0; i < gr.nodes.size(); ++i) {
      double lr = mid + half * gr.nodes[i];
      double r = std::exp(lr);
      Window win = angular_window(dom, c, r);
      if (!win.any) continue;
      double a0 = win.full ? 0.0 : win.a_in;
      double a1 = win.full ? 2 * M_PI : win.a_out;
      double ring = 0.0;
      int apan = o.angular_panels;
      for (int q = 0; q < apan; ++q) {
        double qa = a0 + (a1 - a0) * q / apan;
        double qb = a0 + (a1 - a0) * (q + 1) / apan;
        double qm = 0.5 * (qa + qb), qh = 0.5 * (qb - qa);
        for (size_t k = 0; k < ga.nodes.size(); ++k) {
          double ang = qm + qh * ga.nodes[k];
          Vec2 w = c + r * Vec2(std::cos(ang), std::sin(ang));
          ring += ga.weights[k] * qh * energy_density(field, chart, w, o.include_shape);
        }
      }
      // dw = r dr dtheta = r^2 dlog(r) dtheta
      total += gr.weights[i] * half * ring * r * r;
    }
  }
  return total;
}

double signed_domain_distance(const Domain& dom, const Vec2& p) {
  double d = dom.boundary_distance(p);
  if (dom.kind() == Domain::Kind::polygon) return dom.contains(p) ? d : -d;
  return d;  // rectangle and disk distances are already signed
}

double background_cell(const TangentField& field, const Chart& chart,
                       const std::vector<Puncture>& punct, const Vec2& lo, const Vec2& hi,
                       int depth, const EnergyOptions& o) {
  const Domain& dom = chart.domain();
  Vec2 c = 0.5 * (lo + hi);
  double margin = 0.5 * (hi - lo).norm();

  double dd = signed_domain_distance(dom, c);
  bool dom_in = dd >= margin;
  bool dom_out = dd <= -margin;
  bool punct_out = false, punct_clear = true;
  for (const auto& p : punct) {
    double d = (c - p.center).norm();
    if (d + margin <= p.patch_radius) punct_out = true;   // cell swallowed by a patch
    if (d - margin < p.patch_radius) punct_clear = false;  // cell touches a patch
  }
  if (dom_out || punct_out) return 0.0;

  auto tensor = [&](auto&& filter) {
    const GaussRule& g = gauss_rule(o.background_order);
    double acc = 0.0;
    double hx = 0.5 * (hi.x() - lo.x()), hy = 0.5 * (hi.y() - lo.y());
    for (size_t i = 0; i < g.nodes.size(); ++i)
      for (size_t j = 0; j < g.nodes.size(); ++j) {
        Vec2 w(c.x() + hx * g.nodes[i], c.y() + hy * g.nodes[j]);
        if (!filter(w)) continue;
        acc += g.weights[i] * g.weights[j] * energy_density(field, chart, w, o.include_shape);
      }
    return acc * hx * hy;
  };

  if (dom_in && punct_clear) return tensor([](const Vec2&) { return true; });
  if (depth > 0) {
    double acc = 0.0;
    for (int sx = 0; sx < 2; ++sx)
      for (int sy = 0; sy < 2; ++sy) {
        Vec2 l(sx ? c.x() : lo.x(), sy ? c.y() : lo.y());
        Vec2 h(sx ? hi.x() : c.x(), sy ? hi.y() : c.y());
        acc += background_cell(field, chart, punct, l, h, depth - 1, o);
      }
    return acc;
  }
  // leaf straddling a boundary: filter nodes individually
  return tensor([&](const Vec2& w) {
    if (!dom.contains(w, 0.0)) return false;
    for (const auto& p : punct)
      if ((w - p.center).norm() < p.patch_radius) return false;
    return true;
  });
}

double energy_once(const TangentField& field, const Chart& chart,
                   const std::vector<Puncture>& punctures, const EnergyOptions& o) {
  for (size_t i = 0; i < punctures.size(); ++i) {
    if (!(punctures[i].eps > 0) || !(punctures[i].patch_radius > punctures[i].eps))
      fail(errc::validation, "puncture needs 0 < eps < patch_radius");
    for (size_t j = i + 1; j < punctures.size(); ++j)
      if ((punctures[i].center - punctures[j].center).norm() <
          punctures[i].patch_radius + punctures[j].patch_radius)
        fail(errc::validation, "puncture patches overlap; shrink patch radii");
  }
  double total = 0.0;
  for (const auto& p : punctures)
    total += polar_patch(field, chart, p.center, p.eps, p.patch_radius, o);

  const Domain& dom = chart.domain();
  Vec2 lo = dom.bbox_lo(), hi = dom.bbox_hi();
  int n = o.background_cells;
  double hx = (hi.x() - lo.x()) / n, hy = (hi.y() - lo.y()) / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec2 l(lo.x() + i * hx, lo.y() + j * hy);
      Vec2 h(lo.x() + (i + 1) * hx, lo.y() + (j + 1) * hy);
      total += background_cell(field, chart, punctures, l, h, o.background_depth, o);
    }
  return total;
}

}  // namespace

double dirichlet_energy(const TangentField& field, const Chart& chart,
                        const std::vector<Puncture>& punctures, const EnergyOptions& opts) {
  double coarse = energy_once(field, chart, punctures, opts);
  if (!opts.convergence_check) return coarse;
  EnergyOptions fine = opts;
  fine.radial_per_decade *= 2;
  fine.angular_panels *= 2;
  fine.background_cells *= 2;
  fine.background_depth += 1;
  fine.convergence_check = false;
  double refined = energy_once(field, chart, punctures, fine);
  if (std::fabs(refined - coarse) > 0.01 * std::fabs(refined))
    fail(errc::quadrature_unresolved,
         "energy quadrature not converged: " + std::to_string(coarse) + " vs " +
             std::to_string(refined));
  return refined;
}

EnergySweep divergence_slope(const TangentField& field, const Chart& chart, const Vec2& site,
                             const SweepSchedule& schedule, double lemma_rate,
                             const EnergyOptions& opts) {
  if (schedule.count < 7)
    fail(errc::validation, "sweep needs at least 7 epsilon points (5 after trimming)");
  if (!(schedule.eps_lo < schedule.eps_hi) || !(schedule.eps_hi < schedule.patch_radius))
    fail(errc::validation, "sweep needs eps_lo < eps_hi < patch_radius");

  EnergySweep sweep;
  sweep.site = site;
  sweep.lemma_rate = lemma_rate;
  int K = schedule.count;
  for (int k = 0; k < K; ++k)
    sweep.eps.push_back(schedule.eps_hi *
                        std::pow(schedule.eps_lo / schedule.eps_hi, k / (K - 1.0)));

  // E(eps_k) assembled incrementally so the outer quadrature cancels exactly
  // in the slope differences
  Puncture outer{site, sweep.eps[0], schedule.patch_radius};
  double e = dirichlet_energy(field, chart, {outer}, opts);
  sweep.energy.push_back(e);
  EnergyOptions ring_opts = opts;
  ring_opts.convergence_check = false;
  ring_opts.radial_per_decade = 2 * opts.radial_per_decade;
  for (int k = 1; k < K; ++k) {
    e += polar_patch(field, chart, site, sweep.eps[k], sweep.eps[k - 1], ring_opts);
    sweep.energy.push_back(e);
  }

  // least squares of E against log(1/eps), dropping the two largest eps
  int first = 2;
  int n = K - first;
  sweep.used_points = n;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = first; k < K; ++k) {
    double x = std::log(1.0 / sweep.eps[k]);
    sx += x; sy += sweep.energy[k]; sxx += x * x; sxy += x * sweep.energy[k];
  }
  double denom = n * sxx - sx * sx;
  sweep.slope = (n * sxy - sx * sy) / denom;
  sweep.intercept = (sy - sweep.slope * sx) / n;
  double ss = 0;
  for (int k = first; k < K; ++k) {
    double x = std::log(1.0 / sweep.eps[k]);
    double r = sweep.energy[k] - (sweep.slope * x + sweep.intercept);
    ss += r * r;
  }
  sweep.fit_residual = std::sqrt(ss / std::max(1, n - 2));
  double sxx_c = sxx - sx * sx / n;
  // two-sided 95 % t quantiles for small dof
  auto t95 = [](int dof) {
    static const double tbl[] = {12.71, 4.303, 3.182, 2.776, 2.571, 2.447,
                                 2.365, 2.306, 2.262, 2.228};
    if (dof <= 0) return 12.71;
    if (dof <= 10) return tbl[dof - 1];
    return 2.09;
  };
  sweep.ci95 = t95(n - 2) * sweep.fit_residual / std::sqrt(sxx_c);
  sweep.meets_lower_bound = sweep.slope >= lemma_rate * 0.98 - 1e-12;
  return sweep;
}

}  // namespace defectscope

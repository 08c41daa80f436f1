#include "defectscope/rates.hpp"

#include <cmath>

#include "defectscope/errors.hpp"

namespace defectscope {

RateWeight rate_weight_at(const Chart& chart, const Vec2& site, double holder_radius) {
  double m1, m2;
  chart.metric(site, m1, m2);
  double mplus = std::max(m1, m2), mminus = std::min(m1, m2);
  RateWeight w;
  if (mplus >= chart.degeneracy_tol()) {
    w.q = mminus / mplus;
    w.source = RateWeight::Source::metric_ratio;
    return w;
  }
  HolderData h = chart.holder_fit(site, holder_radius);
  if (!(h.h_plus > 0))
    fail(errc::fit_failed, "degenerate site with h_plus <= 0; no rate weight");
  w.q = h.h_minus / h.h_plus;
  w.source = RateWeight::Source::holder_ratio;
  return w;
}

namespace {
double qpow(double q, int e) {
  if (e == 1) return q;
  if (e == 2) return q * q;
  fail(errc::validation, "q exponent must be 1 or 2");
}
}  // namespace

double interior_rate(double q, double n, int q_exponent) { return qpow(q, q_exponent) * n * n; }

double interior_rate_raw(double q, double n, int q_exponent) {
  return 2 * M_PI * interior_rate(q, n, q_exponent);
}

double boundary_rate(double q, double strength, double wedge_angle, int q_exponent) {
  if (!(wedge_angle > 1e-12))
    fail(errc::zero_wedge, "boundary rate with non-positive wedge angle");
  return (2 * M_PI / wedge_angle) * qpow(q, q_exponent) * strength * strength;
}

double boundary_rate_raw(double q, double strength, double wedge_angle, int q_exponent) {
  return 2 * M_PI * boundary_rate(q, strength, wedge_angle, q_exponent);
}

RateTotals total_rate(const std::vector<RateSite>& sites, int q_exponent) {
  RateTotals tot;
  tot.normalized = 0.0;
  for (const auto& s : sites) {
    if (!s.q) fail(errc::missing_weight, "site without a rate weight");
    double c = s.boundary ? boundary_rate(*s.q, s.strength, s.wedge_angle, q_exponent)
                          : interior_rate(*s.q, s.strength, q_exponent);
    tot.contributions.push_back(c);
    tot.normalized += c;
  }
  tot.raw = 2 * M_PI * tot.normalized;
  return tot;
}

}  // namespace defectscope

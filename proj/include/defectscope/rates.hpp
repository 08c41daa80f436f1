#pragma once
#include <optional>
#include <vector>

#include "defectscope/chart.hpp"
#include "defectscope/rational.hpp"

namespace defectscope {

// Local divergence-rate weight of a site.  q = m-/m+ at regular points and
// h-/h+ at fully degenerate ones (m+ = 0), per the two branches of the rate
// lemmas.
struct RateWeight {
  std::optional<double> q;
  enum class Source { metric_ratio, holder_ratio } source = Source::metric_ratio;
};

RateWeight rate_weight_at(const Chart& chart, const Vec2& site, double holder_radius);

// Normalized rates (the planar-Q normalization that drops the global 2 pi);
// raw variants carry the lemma's 2 pi.  q_exponent selects q^2 (the lemma
// form, default) or q^1 (the abbreviated form printed in the prediction
// section of the source analysis).
double interior_rate(double q, double n, int q_exponent = 2);
double interior_rate_raw(double q, double n, int q_exponent = 2);
double boundary_rate(double q, double strength, double wedge_angle, int q_exponent = 2);
double boundary_rate_raw(double q, double strength, double wedge_angle, int q_exponent = 2);

struct RateSite {
  bool boundary = false;
  std::optional<double> q;
  double strength = 0.0;     // n for interior, m - tau/(2 pi) for boundary
  double wedge_angle = 0.0;  // boundary sites only
};

struct RateTotals {
  double normalized;  // Q
  double raw;         // with the 2 pi factor
  std::vector<double> contributions;  // normalized, per site
};

// Q = sum_i q^e n_i^2 + sum_j (2 pi / wedge_j) q_j^e strength_j^2.
// MissingWeight if any site lacks q.
RateTotals total_rate(const std::vector<RateSite>& sites, int q_exponent = 2);

}  // namespace defectscope

#include "defectscope/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "defectscope/errors.hpp"

namespace defectscope {

TangentField::TangentField(Expression a1, Expression a2, FieldMode mode)
    : a1_(std::move(a1)), a2_(std::move(a2)), mode_(mode) {
  d_[0][0] = a1_.derivative(0);
  d_[0][1] = a1_.derivative(1);
  d_[1][0] = a2_.derivative(0);
  d_[1][1] = a2_.derivative(1);
}

Vec2 TangentField::components(const Vec2& w) const {
  return Vec2(a1_.eval(w.x(), w.y()), a2_.eval(w.x(), w.y()));
}

Vec2 TangentField::unit_components(const Vec2& w) const {
  Vec2 a = components(w);
  return a / a.norm();
}

Eigen::Matrix2d TangentField::jacobian(const Vec2& w) const {
  Eigen::Matrix2d J;
  J(0, 0) = d_[0][0].eval(w.x(), w.y());
  J(0, 1) = d_[0][1].eval(w.x(), w.y());
  J(1, 0) = d_[1][0].eval(w.x(), w.y());
  J(1, 1) = d_[1][1].eval(w.x(), w.y());
  return J;
}

// --- zero location ------------------------------------------------------------

namespace {

struct GridScan {
  int n;
  Vec2 lo, hi;
  std::vector<Vec2> values;  // (n+1)^2 field values
  double scale = 0.0;

  Vec2 node(int i, int j) const {
    return Vec2(lo.x() + (hi.x() - lo.x()) * i / n, lo.y() + (hi.y() - lo.y()) * j / n);
  }
  const Vec2& value(int i, int j) const { return values[i * (n + 1) + j]; }
  double cell() const { return std::max(hi.x() - lo.x(), hi.y() - lo.y()) / n; }
};

GridScan scan_grid(const TangentField& field, const Chart& chart, int n) {
  GridScan g;
  g.n = n;
  g.lo = chart.domain().bbox_lo();
  g.hi = chart.domain().bbox_hi();
  g.values.resize((n + 1) * (n + 1));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Vec2 v = field.components(g.node(i, j));
      g.values[i * (n + 1) + j] = v;
      if (std::isfinite(v.norm())) g.scale = std::max(g.scale, v.norm());
    }
  if (g.scale <= 0) fail(errc::curve_of_zeros, "field vanishes on the whole sample grid");
  return g;
}

bool newton_polish(const TangentField& field, Vec2& p, double diam, double scale) {
  for (int it = 0; it < 60; ++it) {
    Vec2 a = field.components(p);
    if (!std::isfinite(a.x()) || !std::isfinite(a.y())) return false;
    Eigen::Matrix2d J = field.jacobian(p);
    double det = J.determinant();
    Vec2 step;
    if (std::fabs(det) > 1e-14 * scale * scale) {
      step = J.inverse() * a;
    } else {
      // Levenberg fallback for (near-)singular jacobians
      Eigen::Matrix2d JtJ = J.transpose() * J;
      JtJ += 1e-8 * scale * scale * Eigen::Matrix2d::Identity();
      step = JtJ.inverse() * (J.transpose() * a);
    }
    p -= step;
    if (step.norm() < 1e-14 * diam) break;
    if (step.norm() > 10 * diam) return false;  // diverged
  }
  Vec2 a = field.components(p);
  return a.norm() < 1e-10 * scale;
}

}  // namespace

std::vector<FieldZero> locate_zeros(const TangentField& field, const Chart& chart,
                                    const ZeroLocateOptions& opts) {
  const Domain& dom = chart.domain();
  GridScan g = scan_grid(field, chart, opts.grid_n);
  double diam = dom.diameter();
  double tiny = 1e-9 * g.scale;

  std::vector<Vec2> found;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const Vec2 c00 = g.value(i, j), c10 = g.value(i + 1, j);
      const Vec2 c01 = g.value(i, j + 1), c11 = g.value(i + 1, j + 1);
      auto crosses = [&](int k) {
        double v0 = c00[k], v1 = c10[k], v2 = c01[k], v3 = c11[k];
        double mn = std::min(std::min(v0, v1), std::min(v2, v3));
        double mx = std::max(std::max(v0, v1), std::max(v2, v3));
        return mn <= tiny && mx >= -tiny;
      };
      if (!crosses(0) || !crosses(1)) continue;
      Vec2 center = 0.5 * (g.node(i, j) + g.node(i + 1, j + 1));
      if (!dom.contains(center, g.cell())) continue;
      Vec2 p = center;
      if (!newton_polish(field, p, diam, g.scale)) continue;
      if (!dom.contains(p, 1e-7 * diam)) continue;
      found.push_back(p);
    }
  }

  // cluster duplicates from neighbouring cells
  std::vector<Vec2> zeros;
  double cluster = 1e-6 * diam;
  for (const Vec2& p : found) {
    bool dup = false;
    for (const Vec2& q : zeros)
      if ((p - q).norm() < cluster) { dup = true; break; }
    if (!dup) zeros.push_back(p);
  }

  if (zeros.size() > static_cast<size_t>(opts.max_zeros))
    fail(errc::curve_of_zeros, "found " + std::to_string(zeros.size()) +
                                   " zeros; the zero set does not look isolated");

  // isolation: the field must not vanish on a small circle around each zero
  double riso = 0.5 * g.cell();
  for (const Vec2& z : zeros) {
    double mn = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 64; ++k) {
      double ang = 2 * M_PI * k / 64;
      Vec2 q = z + riso * Vec2(std::cos(ang), std::sin(ang));
      if (!dom.contains(q, 1e-12 * diam)) continue;
      mn = std::min(mn, field.components(q).norm());
    }
    if (mn < 1e-9 * g.scale)
      fail(errc::curve_of_zeros,
           "field vanishes along a curve through (" + std::to_string(z.x()) + ", " +
               std::to_string(z.y()) + ")");
  }

  // separation against the grid resolution
  for (size_t i = 0; i < zeros.size(); ++i)
    for (size_t j = i + 1; j < zeros.size(); ++j)
      if ((zeros[i] - zeros[j]).norm() < g.cell())
        fail(errc::zero_not_isolated,
             "zeros closer than the grid resolution; refine the grid or the field");

  std::sort(zeros.begin(), zeros.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });

  std::vector<FieldZero> out;
  double btol = 1e-6 * diam;
  for (const Vec2& z : zeros) {
    FieldZero fz;
    fz.point = z;
    fz.boundary = dom.boundary_distance(z) < btol;
    out.push_back(fz);
  }
  return out;
}

double separation_radius(const std::vector<FieldZero>& zeros, const Domain& domain) {
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < zeros.size(); ++i) {
    for (size_t j = i + 1; j < zeros.size(); ++j)
      m = std::min(m, (zeros[i].point - zeros[j].point).norm());
    if (!zeros[i].boundary) m = std::min(m, domain.boundary_distance(zeros[i].point));
  }
  if (!std::isfinite(m)) m = domain.diameter();
  return 0.5 * m;
}

// --- winding ------------------------------------------------------------------

WindingResult winding_along(const TangentField& field,
                            const std::function<Vec2(double)>& curve, bool closed,
                            bool frame_corrected, const Chart* chart) {
  if (frame_corrected && chart == nullptr)
    fail(errc::validation, "frame correction needs the chart");
  const int max_samples = 1 << 20;
  int m = 64;
  double total = 0.0;
  std::vector<Vec2> pts;
  for (;;) {
    pts.resize(m + 1);
    for (int k = 0; k <= m; ++k) pts[k] = curve(static_cast<double>(k) / m);
    bool ok = true;
    total = 0.0;
    Vec2 prev;
    for (int k = 0; k <= m; ++k) {
      Vec2 a = field.components(pts[k]);
      double n = a.norm();
      if (!(n > 0.0) || !std::isfinite(n)) { ok = false; break; }
      Vec2 u = a / n;
      if (field.mode() == FieldMode::director)
        u = Vec2(u.x() * u.x() - u.y() * u.y(), 2.0 * u.x() * u.y());  // doubled angle
      if (k > 0) {
        double cross = prev.x() * u.y() - prev.y() * u.x();
        double dot = prev.dot(u);
        double step = std::atan2(cross, dot);
        if (std::fabs(step) > M_PI / 2) { ok = false; break; }
        total += step;
      }
      prev = u;
    }
    if (ok) break;
    m *= 2;
    if (m > max_samples)
      fail(errc::unresolved_winding,
           "angle step exceeds pi/2 after adaptive subdivision; curve too close to a zero");
  }

  double raw = total / (2 * M_PI);
  if (field.mode() == FieldMode::director) raw *= 0.5;

  if (frame_corrected) {
    double corr = 0.0;
    for (int k = 0; k < m; ++k) {
      Vec2 f0 = chart->f_vector(pts[k]);
      Vec2 f1 = chart->f_vector(pts[k + 1]);
      corr += 0.5 * (f0 + f1).dot(pts[k + 1] - pts[k]);
    }
    raw += corr / (2 * M_PI);
  }

  WindingResult res;
  res.raw = raw;
  res.samples = m;
  if (closed) {
    long long den = field.mode() == FieldMode::director ? 2 : 1;
    long long num = std::llround(raw * den);
    res.snapped = Rational(num, den);
    res.snap_distance = std::fabs(raw - res.snapped.to_double());
  } else {
    res.snapped = Rational(0);
    res.snap_distance = 0.0;
  }
  return res;
}

std::function<Vec2(double)> circle_loop(const Vec2& center, double radius) {
  return [center, radius](double t) {
    double a = 2 * M_PI * t;
    return Vec2(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
  };
}

BoundaryArc boundary_arc(const Domain& domain, const Vec2& center, double radius) {
  const int scan = 1440;
  auto inside = [&](double ang) {
    return domain.contains(center + radius * Vec2(std::cos(ang), std::sin(ang)), 0.0);
  };
  std::vector<bool> in(scan);
  int count = 0;
  for (int i = 0; i < scan; ++i) {
    in[i] = inside(2 * M_PI * i / scan);
    if (in[i]) ++count;
  }
  if (count == 0) fail(errc::validation, "boundary arc: circle lies outside the domain");
  if (count == scan) fail(errc::validation, "boundary arc: point is interior, use a full loop");
  // longest contiguous inside window (cyclic)
  int best_start = 0, best_len = 0;
  for (int i = 0; i < scan; ++i) {
    if (!in[i] || in[(i + scan - 1) % scan]) continue;
    int len = 0;
    while (len < scan && in[(i + len) % scan]) ++len;
    if (len > best_len) { best_len = len; best_start = i; }
  }
  double step = 2 * M_PI / scan;
  // refine entry/exit by bisection
  auto refine = [&](double out_ang, double in_ang) {
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (out_ang + in_ang);
      if (inside(mid)) in_ang = mid; else out_ang = mid;
    }
    return in_ang;
  };
  double a_in = refine((best_start - 1) * step, best_start * step);
  double a_out = refine((best_start + best_len) * step, (best_start + best_len - 1) * step);
  if (a_out < a_in) a_out += 2 * M_PI;
  BoundaryArc arc;
  arc.angle_in = a_in;
  arc.angle_out = a_out;
  arc.curve = [center, radius, a_in, a_out](double t) {
    double a = a_in + (a_out - a_in) * t;
    return Vec2(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
  };
  return arc;
}

WindingResult index_around(const TangentField& field, const std::function<Vec2(double)>& loop,
                           bool frame_corrected, const Chart* chart) {
  return winding_along(field, loop, /*closed=*/true, frame_corrected, chart);
}

double boundary_defect_strength(double tau, double m) { return m - tau / (2 * M_PI); }

Rational boundary_defect_strength(const Rational& tau_over_pi, const Rational& m) {
  return m - tau_over_pi / Rational(2);
}

}  // namespace defectscope

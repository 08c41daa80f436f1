#include "defectscope/chart.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "defectscope/errors.hpp"

namespace defectscope {

// --- Domain ----------------------------------------------------------------

Domain Domain::rectangle(const Vec2& lo, const Vec2& hi) {
  if (!(lo.x() < hi.x() && lo.y() < hi.y()))
    fail(errc::validation, "rectangle domain with empty extent");
  Domain d;
  d.kind_ = Kind::rectangle;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

Domain Domain::polygon(std::vector<Vec2> vertices) {
  if (vertices.size() < 3) fail(errc::validation, "polygon domain needs >= 3 vertices");
  Domain d;
  d.kind_ = Kind::polygon;
  d.verts_ = std::move(vertices);
  d.lo_ = d.verts_[0];
  d.hi_ = d.verts_[0];
  for (const auto& v : d.verts_) {
    d.lo_ = d.lo_.cwiseMin(v);
    d.hi_ = d.hi_.cwiseMax(v);
  }
  return d;
}

Domain Domain::disk(const Vec2& center, double radius) {
  if (!(radius > 0)) fail(errc::validation, "disk domain needs radius > 0");
  Domain d;
  d.kind_ = Kind::disk;
  d.center_ = center;
  d.radius_ = radius;
  d.lo_ = center - Vec2(radius, radius);
  d.hi_ = center + Vec2(radius, radius);
  return d;
}

bool Domain::contains(const Vec2& p, double tol) const {
  switch (kind_) {
    case Kind::rectangle:
      return p.x() >= lo_.x() - tol && p.x() <= hi_.x() + tol && p.y() >= lo_.y() - tol &&
             p.y() <= hi_.y() + tol;
    case Kind::disk:
      return (p - center_).norm() <= radius_ + tol;
    case Kind::polygon:
      // within tol of an edge counts as inside the closure
      return winding_inside(p) || signed_edge_distance(p) <= tol;
  }
  return false;
}

// helpers for polygon containment
bool Domain::winding_inside(const Vec2& p) const {
  bool in = false;
  size_t n = verts_.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = verts_[i];
    const Vec2& b = verts_[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      double xint = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < xint) in = !in;
    }
  }
  return in;
}

double Domain::signed_edge_distance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  size_t n = verts_.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = verts_[i];
    const Vec2& b = verts_[(i + 1) % n];
    Vec2 ab = b - a;
    double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (a + t * ab)).norm());
  }
  return best;
}

double Domain::boundary_distance(const Vec2& p) const {
  switch (kind_) {
    case Kind::rectangle:
      return std::min(std::min(p.x() - lo_.x(), hi_.x() - p.x()),
                      std::min(p.y() - lo_.y(), hi_.y() - p.y()));
    case Kind::disk:
      return radius_ - (p - center_).norm();
    case Kind::polygon:
      return signed_edge_distance(p);
  }
  return 0.0;
}

// --- Chart core -------------------------------------------------------------

namespace {
constexpr double k_fd_c1 = 8.0 / 12.0;
constexpr double k_fd_c2 = 1.0 / 12.0;
}  // namespace

void Chart::fd_first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const {
  double h = fd_step();
  auto d = [&](const Vec2& e) -> Vec3 {
    Vec3 p1 = position(w + h * e), m1 = position(w - h * e);
    Vec3 p2 = position(w + 2 * h * e), m2 = position(w - 2 * h * e);
    return (k_fd_c1 * (p1 - m1) - k_fd_c2 * (p2 - m2)) / h;
  };
  x1 = d(Vec2(1, 0));
  x2 = d(Vec2(0, 1));
}

void Chart::fd_second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const {
  double h = fd_step();
  auto d1 = [&](const Vec2& p, int which) -> Vec3 {
    Vec3 a, b;
    first_derivatives(p, a, b);
    return which == 0 ? a : b;
  };
  auto d = [&](int which, const Vec2& e) -> Vec3 {
    Vec3 p1 = d1(w + h * e, which), m1 = d1(w - h * e, which);
    Vec3 p2 = d1(w + 2 * h * e, which), m2 = d1(w - 2 * h * e, which);
    return (k_fd_c1 * (p1 - m1) - k_fd_c2 * (p2 - m2)) / h;
  };
  x11 = d(0, Vec2(1, 0));
  x12 = d(0, Vec2(0, 1));
  x22 = d(1, Vec2(0, 1));
}

void Chart::first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const {
  fd_first_derivatives(w, x1, x2);
}

void Chart::second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const {
  fd_second_derivatives(w, x11, x12, x22);
}

double Chart::metric_scale() const {
  std::call_once(scale_once_, [this] {
    double s = 0.0;
    const int n = 33;
    Vec2 lo = domain_.bbox_lo(), hi = domain_.bbox_hi();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Vec2 w(lo.x() + (hi.x() - lo.x()) * i / (n - 1.0),
               lo.y() + (hi.y() - lo.y()) * j / (n - 1.0));
        if (!domain_.contains(w, 1e-12)) continue;
        Vec3 x1, x2;
        first_derivatives(w, x1, x2);
        s = std::max(s, std::max(x1.norm(), x2.norm()));
      }
    }
    scale_ = s > 0 ? s : 1.0;
  });
  return scale_;
}

void Chart::metric(const Vec2& w, double& m1, double& m2) const {
  Vec3 x1, x2;
  first_derivatives(w, x1, x2);
  m1 = x1.norm();
  m2 = x2.norm();
}

double Chart::area_element(const Vec2& w) const {
  double m1, m2;
  metric(w, m1, m2);
  return m1 * m2;
}

Frame Chart::frame(const Vec2& w) const {
  if (!domain_.contains(w, 1e-9 * domain_.diameter()))
    fail(errc::outside_domain, "parameter point outside the chart domain");
  Frame fr;
  fr.x = position(w);
  first_derivatives(w, fr.x1, fr.x2);
  fr.m1 = fr.x1.norm();
  fr.m2 = fr.x2.norm();
  double td = degeneracy_tol();
  if (fr.m1 < td || fr.m2 < td)
    fail(errc::degenerate_point, "metric coefficient below degeneracy tolerance; frame undefined");
  fr.e1 = fr.x1 / fr.m1;
  fr.e2 = fr.x2 / fr.m2;
  Vec3 cr = fr.x1.cross(fr.x2);
  double cn = cr.norm();
  if (cn < td * td) fail(errc::degenerate_point, "x^1 x x^2 vanishes; normal undefined");
  fr.normal = cr / cn;
  return fr;
}

Vec2 Chart::f_vector(const Vec2& w) const {
  Vec3 x1, x2, x11, x12, x22;
  first_derivatives(w, x1, x2);
  second_derivatives(w, x11, x12, x22);
  double m1 = x1.norm(), m2 = x2.norm();
  double td = degeneracy_tol();
  if (m1 < td || m2 < td) fail(errc::degenerate_point, "F vector undefined at a degenerate point");
  // d|x^1|/dw2 = (x^1 . x^{12})/|x^1|, d|x^2|/dw1 = (x^2 . x^{12})/|x^2|
  return Vec2(-(x1.dot(x12)) / (m1 * m2), (x2.dot(x12)) / (m1 * m2));
}

double Chart::curvature_density(const Vec2& w) const {
  double h = fd_step();
  auto F = [&](const Vec2& p) { return f_vector(p); };
  double dF2_dw1 = (k_fd_c1 * (F(w + Vec2(h, 0)).y() - F(w - Vec2(h, 0)).y()) -
                    k_fd_c2 * (F(w + Vec2(2 * h, 0)).y() - F(w - Vec2(2 * h, 0)).y())) / h;
  double dF1_dw2 = (k_fd_c1 * (F(w + Vec2(0, h)).x() - F(w - Vec2(0, h)).x()) -
                    k_fd_c2 * (F(w + Vec2(0, 2 * h)).x() - F(w - Vec2(0, 2 * h)).x())) / h;
  return -(dF2_dw1 - dF1_dw2);
}

double Chart::gaussian_curvature(const Vec2& w) const {
  double m1, m2;
  metric(w, m1, m2);
  double td = degeneracy_tol();
  if (m1 < td || m2 < td) fail(errc::degenerate_point, "K undefined at a degenerate point");
  return curvature_density(w) / (m1 * m2);
}

SecondFundamental Chart::second_fundamental(const Vec2& w) const {
  Frame fr = frame(w);
  Vec3 x11, x12, x22;
  second_derivatives(w, x11, x12, x22);
  return SecondFundamental{x11.dot(fr.normal), x12.dot(fr.normal), x22.dot(fr.normal)};
}

double Chart::gaussian_curvature_from_shape(const Vec2& w) const {
  Frame fr = frame(w);
  Vec3 x11, x12, x22;
  second_derivatives(w, x11, x12, x22);
  double L11 = x11.dot(fr.normal), L12 = x12.dot(fr.normal), L22 = x22.dot(fr.normal);
  return (L11 * L22 - L12 * L12) / (fr.m1 * fr.m1 * fr.m2 * fr.m2);
}

double Chart::distance_to_degenerate(const Vec2& w) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : degenerate_) best = std::min(best, (s.point - w).norm());
  return best;
}

void Chart::validate_orthogonality(double tol, int samples, unsigned seed) const {
  std::mt19937 rng(seed);
  Vec2 lo = domain_.bbox_lo(), hi = domain_.bbox_hi();
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  double guard = 1e-3 * domain_.diameter();
  double scale = metric_scale();
  int checked = 0, attempts = 0;
  while (checked < samples && attempts < 50 * samples) {
    ++attempts;
    Vec2 w(ux(rng), uy(rng));
    if (!domain_.contains(w)) continue;
    if (distance_to_degenerate(w) < guard) continue;
    Vec3 x1, x2;
    first_derivatives(w, x1, x2);
    double dot = std::fabs(x1.dot(x2));
    if (dot > tol * x1.norm() * x2.norm() + 1e-12 * scale * scale)
      fail(errc::validation,
           "chart is not orthogonal at (" + std::to_string(w.x()) + ", " + std::to_string(w.y()) +
               "): |x1.x2| = " + std::to_string(dot));
    ++checked;
  }
}

// --- Holder fit ---------------------------------------------------------

namespace {

struct RaySet {
  std::vector<double> train;
  std::vector<double> heldout;
};

RaySet admissible_rays(const Domain& dom, const Vec2& center, double radius) {
  auto ok = [&](double ang) {
    Vec2 d(std::cos(ang), std::sin(ang));
    for (double f : {1.0, 0.6, 0.25, 0.01})
      if (!dom.contains(center + (f * radius) * d, 1e-12 * dom.diameter())) return false;
    return true;
  };
  const int scan = 720;
  std::vector<bool> adm(scan);
  int count = 0;
  for (int i = 0; i < scan; ++i) {
    adm[i] = ok(2 * M_PI * i / scan);
    if (adm[i]) ++count;
  }
  RaySet rs;
  if (count == scan) {
    for (int k = 0; k < 8; ++k) rs.train.push_back(2 * M_PI * k / 8);
    for (int k = 0; k < 8; ++k) rs.heldout.push_back(2 * M_PI * (k + 0.5) / 8);
    return rs;
  }
  if (count == 0)
    fail(errc::fit_failed, "no admissible rays from the fit center stay inside the domain");
  // longest contiguous admissible arc (cyclic)
  int best_start = 0, best_len = 0;
  for (int i = 0; i < scan; ++i) {
    if (!adm[i]) continue;
    if (adm[(i + scan - 1) % scan] && count != scan) continue;  // not an arc start
    int len = 0;
    while (len < scan && adm[(i + len) % scan]) ++len;
    if (len > best_len) { best_len = len; best_start = i; }
  }
  double step = 2 * M_PI / scan;
  double a0 = best_start * step + step;            // inset one scan step
  double a1 = (best_start + best_len - 1) * step - step;
  if (a1 <= a0) { a0 = best_start * step; a1 = a0 + (best_len - 1) * step; }
  const int nt = 9;
  for (int k = 0; k < nt; ++k) rs.train.push_back(a0 + (a1 - a0) * k / (nt - 1.0));
  for (int k = 0; k + 1 < nt; ++k) rs.heldout.push_back(a0 + (a1 - a0) * (k + 0.5) / (nt - 1.0));
  return rs;
}

}  // namespace

HolderData Chart::holder_fit(const Vec2& center, double radius) const {
  if (!(radius > 0)) fail(errc::validation, "holder_fit needs radius > 0");
  for (const auto& s : degenerate_) {
    double d = (s.point - center).norm();
    if (d > 1e-12 * domain_.diameter() && d <= radius)
      fail(errc::validation,
           "holder_fit ball contains another degenerate point; shrink the radius");
  }

  HolderData out;
  out.center = center;
  out.radius = radius;
  metric(center, out.m1, out.m2);
  out.m_minus = std::min(out.m1, out.m2);
  out.m_plus = std::max(out.m1, out.m2);

  RaySet rays = admissible_rays(domain_, center, radius);
  std::vector<double> radii, heldout_radii;
  const int nr = 16;
  for (int j = 0; j < nr; ++j)
    radii.push_back(radius / 100.0 * std::pow(100.0, j / (nr - 1.0)));
  for (int j = 0; j + 1 < nr; ++j) heldout_radii.push_back(std::sqrt(radii[j] * radii[j + 1]));

  double scale = metric_scale();
  double floor_y = 1e-10 * std::max(scale, 1e-30);
  double centers[2] = {out.m1, out.m2};

  // pooled log-log least squares for alpha on samples that moved
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int nfit = 0;
  struct Sample { double r; double y; };
  std::vector<Sample> samples;
  for (double ang : rays.train) {
    Vec2 dir(std::cos(ang), std::sin(ang));
    for (double r : radii) {
      double m1, m2;
      metric(center + r * dir, m1, m2);
      double ys[2] = {m1 - centers[0], m2 - centers[1]};
      for (double y : ys) {
        samples.push_back({r, y});
        if (std::fabs(y) > floor_y) {
          double lx = std::log(r), ly = std::log(std::fabs(y));
          sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
          ++nfit;
        }
      }
    }
  }

  double alpha = 0.0;
  if (nfit >= 2) {
    double denom = nfit * sxx - sx * sx;
    if (std::fabs(denom) > 1e-30) alpha = (nfit * sxy - sx * sy) / denom;
    if (alpha < 0) alpha = 0;
  }
  double hmin = 0.0, hmax = 0.0;
  if (nfit > 0) {
    hmin = std::numeric_limits<double>::infinity();
    hmax = -hmin;
    for (const auto& s : samples) {
      double ratio = s.y / std::pow(s.r, alpha);
      hmin = std::min(hmin, ratio);
      hmax = std::max(hmax, ratio);
    }
  }
  out.alpha = alpha;
  out.h_minus = hmin;
  out.h_plus = hmax;

  // re-verify the sandwich on held-out rays and radii
  double worst = 0.0;
  for (double ang : rays.heldout) {
    Vec2 dir(std::cos(ang), std::sin(ang));
    for (double r : heldout_radii) {
      Vec2 p = center + r * dir;
      if (!domain_.contains(p, 1e-12 * domain_.diameter())) continue;
      double m1, m2;
      metric(p, m1, m2);
      double vals[2] = {m1, m2};
      double ra = std::pow(r, alpha);
      double slack =
          0.05 * (std::fabs(hmin) + std::fabs(hmax) + (hmax - hmin)) * ra + 1e-9 * (scale + 1.0);
      for (int i = 0; i < 2; ++i) {
        double lo = centers[i] + hmin * ra;
        double hi = centers[i] + hmax * ra;
        double viol = std::max(lo - vals[i], vals[i] - hi);
        worst = std::max(worst, viol);
        if (viol > slack)
          fail(errc::fit_failed, "Holder sandwich violated on held-out samples by " +
                                     std::to_string(viol) + " at r = " + std::to_string(r));
      }
    }
  }
  out.max_violation = worst;

  if (out.m_plus < degeneracy_tol() && !(out.h_minus > 0))
    fail(errc::fit_failed,
         "degenerate center with h_minus <= 0: chart collapses along a curve, not a point");
  return out;
}

// --- Families ----------------------------------------------------------------

Vec3 SphereChart::position(const Vec2& w) const {
  double st = std::sin(w.x()), ct = std::cos(w.x());
  double sp = std::sin(w.y()), cp = std::cos(w.y());
  return r_ * Vec3(st * cp, st * sp, ct);
}

void SphereChart::first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const {
  double st = std::sin(w.x()), ct = std::cos(w.x());
  double sp = std::sin(w.y()), cp = std::cos(w.y());
  x1 = r_ * Vec3(ct * cp, ct * sp, -st);
  x2 = r_ * Vec3(-st * sp, st * cp, 0.0);
}

void SphereChart::second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const {
  double st = std::sin(w.x()), ct = std::cos(w.x());
  double sp = std::sin(w.y()), cp = std::cos(w.y());
  x11 = -r_ * Vec3(st * cp, st * sp, ct);
  x12 = r_ * Vec3(-ct * sp, ct * cp, 0.0);
  x22 = r_ * Vec3(-st * cp, -st * sp, 0.0);
}

RevolutionChart::RevolutionChart(Domain d, Expression radius_profile, Expression height_profile)
    : Chart(std::move(d)), f_(std::move(radius_profile)), g_(std::move(height_profile)) {
  df_ = f_.derivative(0);
  dg_ = g_.derivative(0);
  ddf_ = df_.derivative(0);
  ddg_ = dg_.derivative(0);
}

Vec3 RevolutionChart::position(const Vec2& w) const {
  double f = f_.eval(w.x()), g = g_.eval(w.x());
  return Vec3(f * std::cos(w.y()), f * std::sin(w.y()), g);
}

void RevolutionChart::first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const {
  double f = f_.eval(w.x()), df = df_.eval(w.x()), dg = dg_.eval(w.x());
  double sp = std::sin(w.y()), cp = std::cos(w.y());
  x1 = Vec3(df * cp, df * sp, dg);
  x2 = Vec3(-f * sp, f * cp, 0.0);
}

void RevolutionChart::second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const {
  double f = f_.eval(w.x()), df = df_.eval(w.x());
  double ddf = ddf_.eval(w.x()), ddg = ddg_.eval(w.x());
  double sp = std::sin(w.y()), cp = std::cos(w.y());
  x11 = Vec3(ddf * cp, ddf * sp, ddg);
  x12 = Vec3(-df * sp, df * cp, 0.0);
  x22 = Vec3(-f * cp, -f * sp, 0.0);
}

ExpressionChart::ExpressionChart(Domain d, Expression x, Expression y, Expression z)
    : Chart(std::move(d)) {
  c_[0] = std::move(x);
  c_[1] = std::move(y);
  c_[2] = std::move(z);
  for (int i = 0; i < 3; ++i) {
    d1_[i][0] = c_[i].derivative(0);
    d1_[i][1] = c_[i].derivative(1);
    d2_[i][0] = d1_[i][0].derivative(0);
    d2_[i][1] = d1_[i][0].derivative(1);
    d2_[i][2] = d1_[i][1].derivative(1);
  }
}

Vec3 ExpressionChart::position(const Vec2& w) const {
  return Vec3(c_[0].eval(w.x(), w.y()), c_[1].eval(w.x(), w.y()), c_[2].eval(w.x(), w.y()));
}

void ExpressionChart::first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const {
  for (int i = 0; i < 3; ++i) {
    x1[i] = d1_[i][0].eval(w.x(), w.y());
    x2[i] = d1_[i][1].eval(w.x(), w.y());
  }
}

void ExpressionChart::second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const {
  for (int i = 0; i < 3; ++i) {
    x11[i] = d2_[i][0].eval(w.x(), w.y());
    x12[i] = d2_[i][1].eval(w.x(), w.y());
    x22[i] = d2_[i][2].eval(w.x(), w.y());
  }
}

}  // namespace defectscope

#include "defectscope/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "defectscope/errors.hpp"

namespace defectscope {

// --- BoundarySegment --------------------------------------------------------

BoundarySegment BoundarySegment::line(const Vec2& from, const Vec2& to) {
  BoundarySegment s;
  s.kind_ = Kind::line;
  s.a_ = from;
  s.b_ = to;
  return s;
}

BoundarySegment BoundarySegment::arc(const Vec2& center, double radius, double angle_start,
                                     double angle_end) {
  if (!(radius > 0)) fail(errc::validation, "arc segment needs radius > 0");
  BoundarySegment s;
  s.kind_ = Kind::arc;
  s.a_ = center;
  s.radius_ = radius;
  s.ang0_ = angle_start;
  s.ang1_ = angle_end;
  return s;
}

BoundarySegment BoundarySegment::expression(Expression x1, Expression x2) {
  BoundarySegment s;
  s.kind_ = Kind::expression;
  s.e1_ = std::move(x1);
  s.e2_ = std::move(x2);
  s.de1_ = s.e1_.derivative(0);
  s.de2_ = s.e2_.derivative(0);
  return s;
}

Vec2 BoundarySegment::point(double t) const {
  switch (kind_) {
    case Kind::line:
      return a_ + t * (b_ - a_);
    case Kind::arc: {
      double ang = ang0_ + t * (ang1_ - ang0_);
      return a_ + radius_ * Vec2(std::cos(ang), std::sin(ang));
    }
    case Kind::expression:
      return Vec2(e1_.eval(t), e2_.eval(t));
  }
  return Vec2::Zero();
}

Vec2 BoundarySegment::tangent(double t) const {
  switch (kind_) {
    case Kind::line:
      return b_ - a_;
    case Kind::arc: {
      double ang = ang0_ + t * (ang1_ - ang0_);
      double d = ang1_ - ang0_;
      return radius_ * d * Vec2(-std::sin(ang), std::cos(ang));
    }
    case Kind::expression:
      return Vec2(de1_.eval(t), de2_.eval(t));
  }
  return Vec2::Zero();
}

// --- BoundaryComponent -------------------------------------------------------

BoundaryComponent::BoundaryComponent(const Chart* chart, std::vector<BoundarySegment> segments)
    : chart_(chart), segments_(std::move(segments)) {
  if (segments_.empty()) fail(errc::validation, "boundary component has no segments");
  // closure and continuity in the surface (parameter seams are allowed)
  double tol = 1e-7 * (chart_->metric_scale() * chart_->domain().diameter() + 1.0);
  for (size_t i = 0; i < segments_.size(); ++i) {
    const auto& cur = segments_[i];
    const auto& nxt = segments_[(i + 1) % segments_.size()];
    Vec3 pend = chart_->position(cur.point(1.0));
    Vec3 pstart = chart_->position(nxt.point(0.0));
    if ((pend - pstart).norm() > tol)
      fail(errc::validation, "boundary component is not closed on the surface at junction " +
                                 std::to_string(i));
  }
  build_tables();
  compute_vertices();
}

double BoundaryComponent::speed_local(int seg, double t) const {
  Vec2 b = segments_[seg].point(t);
  Vec2 bp = segments_[seg].tangent(t);
  Vec3 x1, x2;
  chart_->first_derivatives(b, x1, x2);
  return (x1 * bp.x() + x2 * bp.y()).norm();
}

Vec3 BoundaryComponent::surface_tangent_local(int seg, double t) const {
  Vec2 b = segments_[seg].point(t);
  Vec2 bp = segments_[seg].tangent(t);
  Vec3 x1, x2;
  chart_->first_derivatives(b, x1, x2);
  Vec3 d = x1 * bp.x() + x2 * bp.y();
  double n = d.norm();
  if (n < 1e-300) fail(errc::degenerate_curve, "vanishing tangent on boundary segment");
  return d / n;
}

void BoundaryComponent::build_tables() {
  seg_len_.assign(segments_.size(), 0.0);
  seg_start_.assign(segments_.size(), 0.0);
  knots_cum_.assign(segments_.size(), {});
  double acc = 0.0;
  for (size_t i = 0; i < segments_.size(); ++i) {
    seg_start_[i] = acc;
    auto& cum = knots_cum_[i];
    cum.resize(kKnots + 1);
    cum[0] = 0.0;
    for (int k = 0; k < kKnots; ++k) {
      double t0 = static_cast<double>(k) / kKnots;
      double t1 = static_cast<double>(k + 1) / kKnots;
      double piece = integrate_1d([&](double t) { return speed_local((int)i, t); }, t0, t1, 1, 12);
      cum[k + 1] = cum[k] + piece;
    }
    seg_len_[i] = cum[kKnots];
    if (seg_len_[i] < 1e-12 * (chart_->metric_scale() * chart_->domain().diameter() + 1.0))
      fail(errc::degenerate_curve, "boundary segment " + std::to_string(i) + " has zero length");
    acc += seg_len_[i];
  }
  total_length_ = acc;
}

std::pair<int, double> BoundaryComponent::locate(double s) const {
  // wrap into [0, L): the curve is closed
  s = std::fmod(s, total_length_);
  if (s < 0) s += total_length_;
  int seg = static_cast<int>(std::upper_bound(seg_start_.begin(), seg_start_.end(), s) -
                             seg_start_.begin()) - 1;
  seg = std::clamp(seg, 0, static_cast<int>(segments_.size()) - 1);
  double target = s - seg_start_[seg];
  const auto& cum = knots_cum_[seg];
  int k = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
  k = std::clamp(k, 0, kKnots - 1);
  double t0 = static_cast<double>(k) / kKnots;
  double t = t0;
  double have = cum[k];
  // Newton on the cumulative length within the knot interval
  for (int it = 0; it < 40; ++it) {
    double len = have + integrate_1d([&](double u) { return speed_local(seg, u); }, t0, t, 1, 8);
    double sp = speed_local(seg, t);
    double dt = (target - len) / std::max(sp, 1e-300);
    t += dt;
    t = std::clamp(t, t0 - 1e-3, t0 + 1.0 / kKnots + 1e-3);
    if (std::fabs(dt) < 1e-14) break;
  }
  return {seg, std::clamp(t, 0.0, 1.0)};
}

Vec2 BoundaryComponent::beta(double s) const {
  auto [seg, t] = locate(s);
  return segments_[seg].point(t);
}

Vec3 BoundaryComponent::gamma(double s) const { return chart_->position(beta(s)); }

Vec3 BoundaryComponent::surface_tangent(double s) const {
  auto [seg, t] = locate(s);
  return surface_tangent_local(seg, t);
}

void BoundaryComponent::compute_vertices() {
  vertices_.clear();
  size_t n = segments_.size();
  for (size_t j = 0; j < n; ++j) {
    size_t prev = (j + n - 1) % n;
    Vec3 tm = surface_tangent_local(static_cast<int>(prev), 1.0);
    Vec3 tp = surface_tangent_local(static_cast<int>(j), 0.0);
    double c = std::clamp(tm.dot(tp), -1.0, 1.0);
    if (c <= -1.0 + 1e-12)
      fail(errc::cusp_vertex, "cusp (exterior angle +-pi) at boundary junction " +
                                  std::to_string(j));
    double ang = std::acos(c);
    Vec2 b = segments_[j].point(0.0);
    Frame fr = chart_->frame(b);
    double sign = tm.cross(tp).dot(fr.normal) >= 0 ? 1.0 : -1.0;
    Vertex v;
    v.junction = static_cast<int>(j);
    v.s = seg_start_[j];
    v.tau = sign * ang;
    vertices_.push_back(v);
  }
}

std::vector<double> BoundaryComponent::exterior_angles() const {
  std::vector<double> out;
  out.reserve(vertices_.size());
  for (const auto& v : vertices_) out.push_back(v.tau);
  return out;
}

double BoundaryComponent::geodesic_curvature_local(int seg, double t) const {
  double h = 1e-5;
  auto T = [&](double u) { return surface_tangent_local(seg, u); };
  Vec3 dT = (8.0 * (T(t + h) - T(t - h)) - (T(t + 2 * h) - T(t - 2 * h))) / (12.0 * h);
  double sp = speed_local(seg, t);
  Vec3 Tt = T(t);
  Frame fr = chart_->frame(segments_[seg].point(t));
  // kg = gamma'' . (N x gamma'), with d/ds = (1/speed) d/dt
  return (dT / sp).dot(fr.normal.cross(Tt));
}

double BoundaryComponent::geodesic_curvature(double s) const {
  auto [seg, t] = locate(s);
  double d_end = std::min(t, 1.0 - t) * seg_len_[seg];
  if (d_end < 1e-9 * total_length_)
    fail(errc::vertex_point, "geodesic curvature requested at a vertex");
  return geodesic_curvature_local(seg, t);
}

double BoundaryComponent::kg_integral(int panels, int order) const {
  double total = 0.0;
  for (int i = 0; i < segment_count(); ++i) {
    total += integrate_1d(
        [&](double t) { return geodesic_curvature_local(i, t) * speed_local(i, t); }, 0.0, 1.0,
        panels, order);
  }
  return total;
}

// --- Gauss-Bonnet -------------------------------------------------------------

double total_curvature(const Chart& chart, int panels, int order) {
  const Domain& dom = chart.domain();
  auto density = [&](double x, double y) { return chart.curvature_density(Vec2(x, y)); };
  switch (dom.kind()) {
    case Domain::Kind::rectangle:
      return integrate_rect(density, dom.bbox_lo(), dom.bbox_hi(), panels, order);
    case Domain::Kind::polygon:
      return integrate_polygon(density, dom.vertices(), panels, order);
    case Domain::Kind::disk: {
      // polar map about the center; measure r dr dtheta
      auto f = [&](double r, double th) {
        Vec2 w = dom.center() + r * Vec2(std::cos(th), std::sin(th));
        return chart.curvature_density(w) * r;
      };
      return integrate_rect(f, Vec2(0, 0), Vec2(dom.radius(), 2 * M_PI), panels, order);
    }
  }
  return 0.0;
}

GaussBonnetReport gauss_bonnet_residual(const Chart& chart,
                                        const std::vector<BoundaryComponent>& components,
                                        double chi, const QuadratureLevel& level) {
  auto eval = [&](int ap, int ao, int lp, int lo) {
    double kg = 0.0, tau = 0.0;
    for (const auto& comp : components) {
      kg += comp.kg_integral(lp, lo);
      for (double t : comp.exterior_angles()) tau += t;
    }
    double curv = total_curvature(chart, ap, ao);
    return 2 * M_PI * chi - kg - curv - tau;
  };
  GaussBonnetReport rep;
  rep.chi = chi;
  rep.kg_integral = 0.0;
  rep.tau_sum = 0.0;
  for (const auto& comp : components) {
    rep.kg_integral += comp.kg_integral(level.line_panels, level.line_order);
    for (double t : comp.exterior_angles()) rep.tau_sum += t;
  }
  rep.curvature_integral = total_curvature(chart, level.area_panels, level.area_order);
  rep.residual = 2 * M_PI * chi - rep.kg_integral - rep.curvature_integral - rep.tau_sum;
  double coarse = eval(std::max(2, level.area_panels / 2), std::max(4, level.area_order / 2),
                       std::max(2, level.line_panels / 2), std::max(4, level.line_order / 2));
  rep.error_estimate = std::fabs(rep.residual - coarse);
  return rep;
}

}  // namespace defectscope

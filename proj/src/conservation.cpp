#include "defectscope/conservation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "defectscope/errors.hpp"

namespace defectscope {

long long euler_characteristic(const TopologyDescriptor& topo) {
  long long from_gm = 2 - 2 * static_cast<long long>(topo.genus) - topo.boundary_components;
  if (topo.triangulation) {
    auto [f, e, v] = *topo.triangulation;
    long long from_tri = f - e + v;
    if (from_tri != from_gm)
      fail(errc::inconsistent_topology,
           "triangulation gives chi = " + std::to_string(from_tri) +
               " but genus/boundary give chi = " + std::to_string(from_gm));
    return from_tri;
  }
  return from_gm;
}

namespace {

using Cx = std::complex<double>;

// frame components of u and of the curve tangent as unit complex numbers;
// director mode doubles both angles
struct RelAngle {
  const TangentField& field;
  const Chart& chart;
  bool director;

  Cx relative(const Vec2& w, const Vec2& param_tangent) const {
    Vec3 x1, x2;
    chart.first_derivatives(w, x1, x2);
    double m1 = x1.norm(), m2 = x2.norm();
    Vec2 g(m1 * param_tangent.x(), m2 * param_tangent.y());
    double gn = g.norm();
    Vec2 a = field.components(w);
    double an = a.norm();
    if (!(gn > 0) || !(an > 0) || !std::isfinite(gn) || !std::isfinite(an))
      return Cx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    Cx gc(g.x() / gn, g.y() / gn), uc(a.x() / an, a.y() / an);
    if (director) {
      gc *= gc;
      uc *= uc;
    }
    return gc * std::conj(uc);  // arg = ang(gamma') - ang(u)
  }
};

}  // namespace

double relative_angle_integral(const TangentField& field, const Chart& chart,
                               const std::function<Vec2(double)>& curve,
                               const std::function<Vec2(double)>& tangent, double t0,
                               double t1) {
  RelAngle rel{field, chart, field.mode() == FieldMode::director};
  const int max_samples = 1 << 20;
  int m = 64;
  for (;;) {
    bool ok = true;
    double total = 0.0;
    Cx prev;
    for (int k = 0; k <= m; ++k) {
      double t = t0 + (t1 - t0) * k / m;
      Cx z = rel.relative(curve(t), tangent(t));
      if (std::isnan(z.real())) { ok = false; break; }
      if (k > 0) {
        double step = std::arg(z * std::conj(prev));
        if (std::fabs(step) > M_PI / 2) { ok = false; break; }
        total += step;
      }
      prev = z;
    }
    if (ok) return rel.director ? 0.5 * total : total;
    m *= 2;
    if (m > max_samples)
      fail(errc::unresolved_winding,
           "relative-angle step exceeds pi/2 after adaptive subdivision (field zero on the "
           "curve?)");
  }
}

double boundary_angle_integral(const TangentField& field, const Chart& chart,
                               const BoundaryComponent& component,
                               const std::vector<BoundarySplit>& splits) {
  const double inset = 1e-12;
  double total = 0.0;
  for (int i = 0; i < component.segment_count(); ++i) {
    std::vector<double> cuts = {0.0, 1.0};
    for (const auto& sp : splits)
      if (sp.segment == i && sp.t > 1e-12 && sp.t < 1.0 - 1e-12) cuts.push_back(sp.t);
    std::sort(cuts.begin(), cuts.end());
    const BoundarySegment& seg = component.segment(i);
    auto curve = [&seg](double t) { return seg.point(t); };
    auto tang = [&seg](double t) { return seg.tangent(t); };
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
      double a = cuts[c], b = cuts[c + 1];
      double span = b - a;
      total += relative_angle_integral(field, chart, curve, tang, a + inset * span,
                                       b - inset * span);
    }
  }
  return total;
}

namespace {

std::optional<BoundarySplit> find_on_component(const BoundaryComponent& comp, const Vec2& p,
                                               double tol) {
  for (int i = 0; i < comp.segment_count(); ++i) {
    const BoundarySegment& seg = comp.segment(i);
    const int n = 512;
    double best_t = 0, best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
      double t = static_cast<double>(k) / n;
      double d = (seg.point(t) - p).norm();
      if (d < best_d) { best_d = d; best_t = t; }
    }
    // local refinement
    double lo = std::max(0.0, best_t - 1.0 / n), hi = std::min(1.0, best_t + 1.0 / n);
    for (int it = 0; it < 80; ++it) {
      double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if ((seg.point(m1) - p).norm() < (seg.point(m2) - p).norm()) hi = m2; else lo = m1;
    }
    double t = 0.5 * (lo + hi);
    if ((seg.point(t) - p).norm() < tol) return BoundarySplit{i, t};
  }
  return std::nullopt;
}

}  // namespace

ConservationReport conservation_residual(const Chart& chart,
                                         const std::vector<BoundaryComponent>& components,
                                         const TangentField& field, double chi) {
  ConservationReport rep;
  rep.chi = chi;

  const Domain& dom = chart.domain();
  double diam = dom.diameter();

  // exterior angles
  rep.tau_sum = 0.0;
  for (const auto& comp : components)
    for (double t : comp.exterior_angles()) rep.tau_sum += t;

  // defect sites
  std::vector<FieldZero> zeros = locate_zeros(field, chart);
  // drop zeros sitting at declared degenerate points; those are handled by
  // the frame-corrected loops below
  std::erase_if(zeros, [&](const FieldZero& z) {
    return chart.distance_to_degenerate(z.point) < 1e-6 * diam;
  });
  double rsep = separation_radius(zeros, dom);
  for (const auto& s : chart.degenerate_sites())
    for (const auto& z : zeros)
      rsep = std::min(rsep, 0.5 * (z.point - s.point).norm());

  std::vector<std::vector<BoundarySplit>> splits(components.size());

  for (const auto& z : zeros) {
    if (!z.boundary) {
      double r = std::min(0.9 * rsep, 0.05 * diam);
      auto res = index_around(field, circle_loop(z.point, r));
      rep.interior.push_back({z.point, res.raw, res.snapped, res.snap_distance});
    } else {
      double r = std::min(0.9 * rsep, 0.05 * diam);
      BoundaryArc arc = boundary_arc(dom, z.point, r);
      auto res = winding_along(field, arc.curve, /*closed=*/false);
      rep.boundary.push_back({z.point, res.raw, arc.angle_out - arc.angle_in});
      for (size_t c = 0; c < components.size(); ++c)
        if (auto sp = find_on_component(components[c], z.point, 1e-6 * diam))
          splits[c].push_back(*sp);
    }
  }

  // collapsed-edge and interior degenerate chart points carry the frame index
  for (const auto& s : chart.degenerate_sites()) {
    Vec2 lo = dom.bbox_lo(), hi = dom.bbox_hi();
    std::function<Vec2(double)> loop;
    using E = DegenerateSite::Edge;
    double ex = 0.01;
    switch (s.collapsed_edge) {
      case E::none: {
        double r = std::min(0.9 * rsep, 0.05 * diam);
        loop = circle_loop(s.point, r);
        break;
      }
      case E::w1_min: {
        double w1 = lo.x() + ex * (hi.x() - lo.x());
        loop = [=](double t) { return Vec2(w1, lo.y() + (hi.y() - lo.y()) * t); };
        break;
      }
      case E::w1_max: {
        double w1 = hi.x() - ex * (hi.x() - lo.x());
        loop = [=](double t) { return Vec2(w1, hi.y() - (hi.y() - lo.y()) * t); };
        break;
      }
      case E::w2_min: {
        double w2 = lo.y() + ex * (hi.y() - lo.y());
        loop = [=](double t) { return Vec2(hi.x() - (hi.x() - lo.x()) * t, w2); };
        break;
      }
      case E::w2_max: {
        double w2 = hi.y() - ex * (hi.y() - lo.y());
        loop = [=](double t) { return Vec2(lo.x() + (hi.x() - lo.x()) * t, w2); };
        break;
      }
    }
    auto res = winding_along(field, loop, /*closed=*/true, /*frame_corrected=*/true, &chart);
    rep.degenerate.push_back({s.point, res.raw, res.snapped, res.snap_distance});
  }

  // theta integral over the boundary
  rep.theta_integral = 0.0;
  for (size_t c = 0; c < components.size(); ++c)
    rep.theta_integral += boundary_angle_integral(field, chart, components[c], splits[c]);

  double idx_raw = 0.0, idx_snapped = 0.0;
  for (const auto& s : rep.interior) { idx_raw += s.raw; idx_snapped += s.snapped.to_double(); }
  for (const auto& s : rep.degenerate) { idx_raw += s.raw; idx_snapped += s.snapped.to_double(); }
  for (const auto& s : rep.boundary) { idx_raw += s.arc_index; idx_snapped += s.arc_index; }

  double common = chi - rep.tau_sum / (2 * M_PI) - rep.theta_integral / (2 * M_PI);
  rep.residual_presnap = common - idx_raw;
  rep.residual = common - idx_snapped;
  return rep;
}

double simple_domain_residual(const Chart& chart, const TangentField& field,
                              const std::function<Vec2(double)>& loop) {
  auto tangent = [&loop](double t) {
    double h = 1e-6;
    return Vec2((loop(t + h) - loop(t - h)) / (2 * h));
  };
  double theta = relative_angle_integral(field, chart, loop, tangent, 0.0, 1.0);
  auto idx = index_around(field, loop);
  return 1.0 - theta / (2 * M_PI) - idx.raw;
}

}  // namespace defectscope

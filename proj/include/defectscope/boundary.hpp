#pragma once
#include <memory>
#include <utility>
#include <vector>

#include "defectscope/chart.hpp"
#include "defectscope/expression.hpp"
#include "defectscope/quadrature.hpp"

namespace defectscope {

// One piecewise-analytic piece of the parameter-domain boundary curve,
// parametrized over t in [0, 1].
class BoundarySegment {
public:
  static BoundarySegment line(const Vec2& from, const Vec2& to);
  static BoundarySegment arc(const Vec2& center, double radius, double angle_start,
                             double angle_end);
  static BoundarySegment expression(Expression x1, Expression x2);

  Vec2 point(double t) const;
  Vec2 tangent(double t) const;  // d beta / dt

private:
  enum class Kind { line, arc, expression } kind_ = Kind::line;
  Vec2 a_{0, 0}, b_{0, 0};
  double radius_ = 0, ang0_ = 0, ang1_ = 0;
  Expression e1_, e2_, de1_, de2_;
};

// A closed boundary component on the surface: gamma = x o beta, stored with
// its arclength tables.  Positive orientation (surface on the left of gamma'
// with respect to the normal) is the caller's responsibility and is what all
// signed quantities assume.
class BoundaryComponent {
public:
  BoundaryComponent(const Chart* chart, std::vector<BoundarySegment> segments);

  const Chart* chart() const { return chart_; }
  int segment_count() const { return static_cast<int>(segments_.size()); }
  const BoundarySegment& segment(int i) const { return segments_[i]; }

  double total_length() const { return total_length_; }
  double segment_length(int i) const { return seg_len_[i]; }
  double segment_start(int i) const { return seg_start_[i]; }

  // global arclength -> (segment, local t)
  std::pair<int, double> locate(double s) const;
  Vec2 beta(double s) const;
  Vec3 gamma(double s) const;
  Vec3 surface_tangent(double s) const;

  double speed_local(int seg, double t) const;           // |d gamma / dt|
  Vec3 surface_tangent_local(int seg, double t) const;   // unit

  struct Vertex {
    int junction;  // between segment junction-1 and segment junction (cyclic)
    double s;
    double tau;    // exterior angle in (-pi, pi)
  };
  // exterior angle at every segment junction (smooth junctions give ~0)
  const std::vector<Vertex>& vertices() const { return vertices_; }
  std::vector<double> exterior_angles() const;

  double geodesic_curvature(double s) const;
  // per-parameter kg without the arclength inversion; used by integrals
  double geodesic_curvature_local(int seg, double t) const;
  double kg_integral(int panels, int order) const;

private:
  void build_tables();
  void compute_vertices();

  const Chart* chart_;
  std::vector<BoundarySegment> segments_;
  std::vector<double> seg_len_, seg_start_;
  // per segment: cumulative length at uniform t-knots
  std::vector<std::vector<double>> knots_cum_;
  double total_length_ = 0;
  std::vector<Vertex> vertices_;
  static constexpr int kKnots = 64;
};

struct GaussBonnetReport {
  double chi;
  double kg_integral;
  double curvature_integral;
  double tau_sum;
  double residual;        // 2 pi chi - kg - K - tau
  double error_estimate;  // difference against a coarser quadrature level
};

// Surface measure is |x^1||x^2| d omega; the curvature integral uses the
// division-free density K |x^1||x^2|.
GaussBonnetReport gauss_bonnet_residual(const Chart& chart,
                                        const std::vector<BoundaryComponent>& components,
                                        double chi, const QuadratureLevel& level);

// bare curvature integral over the chart's domain
double total_curvature(const Chart& chart, int panels, int order);

}  // namespace defectscope

#pragma once
#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "defectscope/expression.hpp"
#include "defectscope/quadrature.hpp"

namespace defectscope {

// Parameter domain with inclusion test. Rectangle and polygon per the input
// schema; disk added so circular domains are represented exactly.
class Domain {
public:
  enum class Kind { rectangle, polygon, disk };

  static Domain rectangle(const Vec2& lo, const Vec2& hi);
  static Domain polygon(std::vector<Vec2> vertices);
  static Domain disk(const Vec2& center, double radius);

  Kind kind() const { return kind_; }
  bool contains(const Vec2& p, double tol = 0.0) const;
  const Vec2& bbox_lo() const { return lo_; }
  const Vec2& bbox_hi() const { return hi_; }
  double diameter() const { return (hi_ - lo_).norm(); }
  // distance from an inside point to the domain boundary (parameter units)
  double boundary_distance(const Vec2& p) const;
  const std::vector<Vec2>& vertices() const { return verts_; }
  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }

private:
  bool winding_inside(const Vec2& p) const;
  double signed_edge_distance(const Vec2& p) const;

  Kind kind_ = Kind::rectangle;
  Vec2 lo_{0, 0}, hi_{1, 1};
  std::vector<Vec2> verts_;  // polygon
  Vec2 center_{0, 0};        // disk
  double radius_ = 1.0;
};

struct Frame {
  Vec3 x;
  Vec3 x1, x2;      // chart partial derivatives
  Vec3 e1, e2;      // unit tangent frame
  Vec3 normal;      // e1 x e2
  double m1, m2;    // |x^1|, |x^2|
};

struct SecondFundamental {
  double L11, L12, L22;
};

struct DegenerateSite {
  Vec2 point;
  enum class Edge { none, w1_min, w1_max, w2_min, w2_max } collapsed_edge = Edge::none;
};

// Local Holder sandwich data around a (possibly degenerate) point:
//   m_i + h_minus r^alpha <= |x^i|(w) <= m_i + h_plus r^alpha  for r <= radius
struct HolderData {
  Vec2 center;
  double radius;
  double alpha;
  double h_minus, h_plus;
  double m1, m2;            // per-axis metric values at the center
  double m_minus, m_plus;   // min/max of the above
  double max_violation;     // worst held-out sandwich violation observed
};

class Chart {
public:
  explicit Chart(Domain domain) : domain_(std::move(domain)) {}
  virtual ~Chart() = default;

  virtual const char* family() const = 0;
  virtual Vec3 position(const Vec2& w) const = 0;
  // Defaults fall back to 4th-order central differences on position();
  // families override with closed forms.
  virtual void first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const;
  virtual void second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const;

  const Domain& domain() const { return domain_; }

  // natural trihedron; DegeneratePoint / OutsideDomain
  Frame frame(const Vec2& w) const;
  void metric(const Vec2& w, double& m1, double& m2) const;
  double area_element(const Vec2& w) const;

  // F = (-(1/|x^2|) d|x^1|/dw2, (1/|x^1|) d|x^2|/dw1), evaluated exactly from
  // first and mixed second derivatives
  Vec2 f_vector(const Vec2& w) const;
  // K from the orthogonal-chart formula: -(dF2/dw1 - dF1/dw2)/(|x^1||x^2|)
  double gaussian_curvature(const Vec2& w) const;
  // K * |x^1||x^2|, without the degenerate division (used by area integrals)
  double curvature_density(const Vec2& w) const;
  SecondFundamental second_fundamental(const Vec2& w) const;
  // independent route: det L / (|x^1|^2 |x^2|^2)
  double gaussian_curvature_from_shape(const Vec2& w) const;

  double fd_step() const { return 1e-5 * domain_.diameter(); }
  double metric_scale() const;
  double degeneracy_tol() const { return 1e-9 * metric_scale(); }

  void set_degenerate_sites(std::vector<DegenerateSite> s) { degenerate_ = std::move(s); }
  const std::vector<DegenerateSite>& degenerate_sites() const { return degenerate_; }
  double distance_to_degenerate(const Vec2& w) const;

  HolderData holder_fit(const Vec2& center, double radius) const;

  // rejects non-orthogonal parametrizations (sampled); ValidationError
  void validate_orthogonality(double tol, int samples, unsigned seed) const;

  // FD kernels kept callable for cross-checks against analytic derivatives
  void fd_first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const;
  void fd_second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const;

protected:
  Domain domain_;
  std::vector<DegenerateSite> degenerate_;

private:
  mutable std::once_flag scale_once_;
  mutable double scale_ = 0.0;
};

class PlaneChart final : public Chart {
public:
  explicit PlaneChart(Domain d) : Chart(std::move(d)) {}
  const char* family() const override { return "plane"; }
  Vec3 position(const Vec2& w) const override { return Vec3(w.x(), w.y(), 0.0); }
  void first_derivatives(const Vec2&, Vec3& x1, Vec3& x2) const override {
    x1 = Vec3(1, 0, 0);
    x2 = Vec3(0, 1, 0);
  }
  void second_derivatives(const Vec2&, Vec3& a, Vec3& b, Vec3& c) const override {
    a.setZero();
    b.setZero();
    c.setZero();
  }
};

// w1 = polar angle theta in [0, pi], w2 = azimuth phi
class SphereChart final : public Chart {
public:
  SphereChart(Domain d, double radius) : Chart(std::move(d)), r_(radius) {}
  const char* family() const override { return "sphere"; }
  double radius() const { return r_; }
  Vec3 position(const Vec2& w) const override;
  void first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const override;
  void second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const override;

private:
  double r_;
};

// x(t, phi) = (f(t) cos phi, f(t) sin phi, g(t)); w1 = t, w2 = phi
class RevolutionChart final : public Chart {
public:
  RevolutionChart(Domain d, Expression radius_profile, Expression height_profile);
  const char* family() const override { return "revolution"; }
  Vec3 position(const Vec2& w) const override;
  void first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const override;
  void second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const override;

private:
  Expression f_, g_, df_, dg_, ddf_, ddg_;
};

// Components given as expressions of (w1, w2); derivatives are symbolic.
class ExpressionChart final : public Chart {
public:
  ExpressionChart(Domain d, Expression x, Expression y, Expression z);
  const char* family() const override { return "expression"; }
  Vec3 position(const Vec2& w) const override;
  void first_derivatives(const Vec2& w, Vec3& x1, Vec3& x2) const override;
  void second_derivatives(const Vec2& w, Vec3& x11, Vec3& x12, Vec3& x22) const override;

private:
  Expression c_[3];
  Expression d1_[3][2];
  Expression d2_[3][3];  // [comp][11, 12, 22]
};

}  // namespace defectscope

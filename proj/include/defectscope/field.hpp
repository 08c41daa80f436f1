#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "defectscope/chart.hpp"
#include "defectscope/expression.hpp"
#include "defectscope/rational.hpp"

namespace defectscope {

enum class FieldMode { vector, director };

// Tangential field A = a1 e^1 + a2 e^2 given by frame components over the
// parameter domain; u = A/|A| away from the zero set.
class TangentField {
public:
  TangentField(Expression a1, Expression a2, FieldMode mode);

  FieldMode mode() const { return mode_; }
  Vec2 components(const Vec2& w) const;       // raw A
  Vec2 unit_components(const Vec2& w) const;  // u, NaN-free only where A != 0
  Eigen::Matrix2d jacobian(const Vec2& w) const;
  // d a_i / d w_j as expressions (symbolic)
  const Expression& component(int i) const { return i == 0 ? a1_ : a2_; }
  const Expression& component_derivative(int i, int j) const { return d_[i][j]; }

private:
  Expression a1_, a2_;
  Expression d_[2][2];
  FieldMode mode_;
};

struct FieldZero {
  Vec2 point;
  bool boundary = false;  // lies on (or within tolerance of) the domain boundary
};

struct ZeroLocateOptions {
  int grid_n = 96;
  int max_zeros = 64;
};

// Sign-change scan on a grid followed by Newton polish; classifies zeros as
// interior or boundary and enforces isolation.
std::vector<FieldZero> locate_zeros(const TangentField& field, const Chart& chart,
                                    const ZeroLocateOptions& opts = {});

// Smallest separation scale of a zero set: half the least of pairwise
// distances and interior-zero-to-boundary distances.
double separation_radius(const std::vector<FieldZero>& zeros, const Domain& domain);

struct WindingResult {
  double raw;             // accumulated angle / 2 pi
  Rational snapped;       // nearest admissible value (closed loops only)
  double snap_distance;
  int samples;
};

// Winding of the field components along a parameter-space curve, by angle
// unwrapping with adaptive subdivision.  Director mode tracks the doubled
// field and halves the result.  `frame_corrected` adds (1/2pi) * int F . dbeta,
// turning the component winding into the surface index; needed around
// degenerate chart points (collapsed edges), where the frame itself winds.
WindingResult winding_along(const TangentField& field,
                            const std::function<Vec2(double)>& curve, bool closed,
                            bool frame_corrected = false, const Chart* chart = nullptr);

// Convenience loops.
std::function<Vec2(double)> circle_loop(const Vec2& center, double radius);

// The arc of the circle of radius r about a boundary point that stays inside
// the domain, traversed counterclockwise.  Returns the angular window too.
struct BoundaryArc {
  std::function<Vec2(double)> curve;
  double angle_in, angle_out;  // window in (-pi, pi] representation, out > in
};
BoundaryArc boundary_arc(const Domain& domain, const Vec2& center, double radius);

// index of the field around a closed loop (snapped); the director/vector
// admissible set comes from the field mode
WindingResult index_around(const TangentField& field, const std::function<Vec2(double)>& loop,
                           bool frame_corrected = false, const Chart* chart = nullptr);

// Boundary defect strength decomposition str = m - tau/(2 pi); the paper's
// alternate sign (m + tau/(2 pi)) is reported by callers where needed.
double boundary_defect_strength(double tau, double m);
Rational boundary_defect_strength(const Rational& tau_over_pi, const Rational& m);

}  // namespace defectscope

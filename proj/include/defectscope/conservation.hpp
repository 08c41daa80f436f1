#pragma once
#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "defectscope/boundary.hpp"
#include "defectscope/field.hpp"

namespace defectscope {

struct TopologyDescriptor {
  int genus = 0;
  int boundary_components = 0;
  std::optional<std::array<long long, 3>> triangulation;  // faces, edges, vertices
};

// chi = F - E + V when a triangulation is given, else 2 - 2g - M; both must
// agree when both are present.
long long euler_characteristic(const TopologyDescriptor& topo);

// Unwrapped increment of the angle from u to the unit tangent gamma' along a
// parameter curve (director mode tracks the angle mod pi).  This is the
// theta of the conservation law; over a smooth closed curve with constant
// field it accumulates the full tangent turning.
double relative_angle_integral(const TangentField& field, const Chart& chart,
                               const std::function<Vec2(double)>& curve,
                               const std::function<Vec2(double)>& tangent, double t0, double t1);

struct BoundarySplit {
  int segment;
  double t;
};

// Sum of the relative-angle increments over the smooth segments of a closed
// boundary component.  Vertex jumps of gamma' are not included (they are
// accounted by the exterior angles), and the walk is split at boundary
// defect positions.
double boundary_angle_integral(const TangentField& field, const Chart& chart,
                               const BoundaryComponent& component,
                               const std::vector<BoundarySplit>& splits = {});

struct IndexedSite {
  Vec2 point;
  double raw;
  Rational snapped;
  double snap_distance;
};

struct ArcSite {
  Vec2 point;
  double arc_index;    // not snapped; generally not a half-integer
  double wedge_angle;  // angular opening of the loop arc at the site
};

struct ConservationReport {
  double chi;
  double tau_sum;
  double theta_integral;
  std::vector<IndexedSite> interior;
  std::vector<IndexedSite> degenerate;  // collapsed-edge / branch points, frame corrected
  std::vector<ArcSite> boundary;
  double residual_presnap;
  double residual;  // with snapped indices
};

// Verifies chi = sum tau/2pi + (1/2pi) int dtheta + sum indices.
ConservationReport conservation_residual(const Chart& chart,
                                         const std::vector<BoundaryComponent>& components,
                                         const TangentField& field, double chi);

// Simple-domain law on a smooth closed parameter loop:
//   2 pi = int dtheta + 2 pi Index  (no corners on the loop)
// returns the residual divided by 2 pi.
double simple_domain_residual(const Chart& chart, const TangentField& field,
                              const std::function<Vec2(double)>& loop);

}  // namespace defectscope

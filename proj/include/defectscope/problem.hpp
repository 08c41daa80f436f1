#pragma once
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "defectscope/boundary.hpp"
#include "defectscope/chart.hpp"
#include "defectscope/conservation.hpp"
#include "defectscope/field.hpp"
#include "defectscope/predictor.hpp"

namespace defectscope {

struct PredictorOptions {
  Rational bound = Rational(2);
  Rational interior_q = Rational(1);
  std::vector<Rational> vertex_q;  // optional, one per boundary vertex
  int max_interior = 8;
  int q_exponent = 2;
  bool mod_symmetry = false;
  int levels = 3;  // minimal level plus this many - 1 further levels
};

struct EnergyCliOptions {
  double eps_hi = 0.0;   // 0 = auto from the separation radius
  double eps_lo = 0.0;
  int count = 9;
  double patch_radius = 0.0;
};

// A validated problem instance: chart, topology, boundary, optional field
// and solver options.  The schema is JSON with "schema": 1.
class ProblemSpec {
public:
  static ProblemSpec load_file(const std::string& path);
  static ProblemSpec load_string(const std::string& text, const std::string& origin = "<string>");

  std::string name;
  std::unique_ptr<Chart> chart;
  TopologyDescriptor topology;
  std::vector<BoundaryComponent> boundary;
  std::optional<TangentField> field;
  PredictorOptions predictor;
  EnergyCliOptions energy;
  std::string quadrature = "Q2";

  long long chi() const { return euler_characteristic(topology); }
  const TangentField& require_field() const;

  // Boundary vertices with surface exterior angle and parameter wedge, in
  // component order, smooth junctions (tau ~ 0) skipped.
  struct VertexInfo {
    Vec2 point;
    double tau;     // surface exterior angle
    double wedge;   // parameter-domain interior angle
    int component;
  };
  std::vector<VertexInfo> boundary_vertices() const;

  // Exact prediction problem with angles snapped to rational multiples of pi.
  PredictionProblem build_prediction_problem() const;
};

}  // namespace defectscope

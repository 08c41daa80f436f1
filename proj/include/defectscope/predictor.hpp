#pragma once
#include <string>
#include <vector>

#include "defectscope/field.hpp"
#include "defectscope/rational.hpp"

namespace defectscope {

// Exact data for one boundary vertex: exterior angle and interior wedge as
// rational multiples of pi, and a rational rate weight.
struct PredictorVertex {
  Rational tau_over_pi;    // in (-1, 1)
  Rational wedge_over_pi;  // in (0, 2); pi - tau for planar wells
  Rational q = Rational(1);
};

struct PredictionProblem {
  Rational chi = Rational(1);
  std::vector<PredictorVertex> vertices;
  FieldMode mode = FieldMode::director;
  Rational interior_q = Rational(1);
  Rational bound = Rational(2);  // B: |m_j| <= B and |n_i| <= B
  int max_interior = 8;
  int q_exponent = 2;
};

// A labeled assignment: which vertex carries which m, plus the interior
// strength multiset (sorted descending).
struct Configuration {
  std::vector<Rational> m;
  std::vector<Rational> interior;
  Rational Q;
};

struct Level {
  Rational Q;
  std::vector<Configuration> configs;
  bool truncated = false;
};

struct PredictionResult {
  std::vector<Level> levels;  // ascending Q; levels[0] holds all global minimizers
  Rational min_Q;
};

// Exact Q of a configuration under the problem's weights.
Rational configuration_rate(const PredictionProblem& p, const std::vector<Rational>& m,
                            const std::vector<Rational>& interior);

// Exact enumeration: every m-vector on the bounded grid with its interior
// realizations, grouped into equal-Q levels; returns the minimal level plus
// `extra_levels` further levels.  Verifies that enlarging the bound by one
// half step leaves the minimum unchanged (BoundTooSmall otherwise).
PredictionResult enumerate_branches(const PredictionProblem& p, int extra_levels = 0);

// Independent exhaustive oracle for small instances (<= 8 vertices, B <= 2).
PredictionResult brute_force_oracle(const PredictionProblem& p, int extra_levels = 0);

// Collapse symmetry-equivalent labeled assignments (vertex relabelings that
// preserve (tau, wedge, q) around the cycle).
void deduplicate_by_symmetry(PredictionResult& result, const PredictionProblem& p);

// Snap a floating angle to a rational multiple of pi (denominator <= max_den).
Rational snap_angle_over_pi(double angle, int max_den = 48, double tol = 1e-9);

}  // namespace defectscope

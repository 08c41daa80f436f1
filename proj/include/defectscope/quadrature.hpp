#pragma once
#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

namespace defectscope {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_rule(int n);

// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
double integrate_1d(const std::function<double(double)>& f, double a, double b, int panels,
                    int order);

// Tensor-product rule on a rectangle.
double integrate_rect(const std::function<double(double, double)>& f, const Vec2& lo,
                      const Vec2& hi, int panels, int order);

// Integral over a triangle via the collapsed (Duffy-type) tensor map; exact
// quickly for smooth integrands.
double integrate_triangle(const std::function<double(double, double)>& f, const Vec2& a,
                          const Vec2& b, const Vec2& c, int panels, int order);

// Simple polygons; convex fans are fast, the general path ear-clips.
std::vector<std::array<Vec2, 3>> triangulate_polygon(const std::vector<Vec2>& poly);

double integrate_polygon(const std::function<double(double, double)>& f,
                         const std::vector<Vec2>& poly, int panels, int order);

// Named presets from the input schema.
struct QuadratureLevel {
  int area_panels;   // per direction for tensor / per triangle
  int area_order;
  int line_panels;   // per smooth segment
  int line_order;
};

QuadratureLevel quadrature_level(const std::string& name);  // "Q1" | "Q2" | "Q3"

}  // namespace defectscope

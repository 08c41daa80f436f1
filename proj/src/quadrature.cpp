#include "defectscope/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "defectscope/errors.hpp"

namespace defectscope {

namespace {

GaussRule compute_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton on Legendre polynomials, symmetric pairs.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b, int panels,
                    int order) {
  const GaussRule& g = gauss_rule(order);
  double total = 0.0;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    double mid = lo + 0.5 * h, half = 0.5 * h;
    double acc = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) acc += g.weights[i] * f(mid + half * g.nodes[i]);
    total += acc * half;
  }
  return total;
}

double integrate_rect(const std::function<double(double, double)>& f, const Vec2& lo,
                      const Vec2& hi, int panels, int order) {
  const GaussRule& g = gauss_rule(order);
  double hx = (hi.x() - lo.x()) / panels;
  double hy = (hi.y() - lo.y()) / panels;
  double total = 0.0;
  for (int px = 0; px < panels; ++px) {
    double mx = lo.x() + (px + 0.5) * hx;
    for (int py = 0; py < panels; ++py) {
      double my = lo.y() + (py + 0.5) * hy;
      double acc = 0.0;
      for (size_t i = 0; i < g.nodes.size(); ++i) {
        double x = mx + 0.5 * hx * g.nodes[i];
        double rowacc = 0.0;
        for (size_t j = 0; j < g.nodes.size(); ++j)
          rowacc += g.weights[j] * f(x, my + 0.5 * hy * g.nodes[j]);
        acc += g.weights[i] * rowacc;
      }
      total += acc * 0.25 * hx * hy;
    }
  }
  return total;
}

double integrate_triangle(const std::function<double(double, double)>& f, const Vec2& a,
                          const Vec2& b, const Vec2& c, int panels, int order) {
  // map the unit square: P(u,v) = a + u*(b-a) + u*v*(c-b), |J| = u * |2A|
  double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  auto g = [&](double u, double v) -> double {
    double px = a.x() + u * ((b.x() - a.x()) + v * (c.x() - b.x()));
    double py = a.y() + u * ((b.y() - a.y()) + v * (c.y() - b.y()));
    return f(px, py) * u;
  };
  double unit = integrate_rect(g, Vec2(0, 0), Vec2(1, 1), panels, order);
  return unit * std::fabs(det);
}

std::vector<std::array<Vec2, 3>> triangulate_polygon(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) fail(errc::validation, "polygon needs at least 3 vertices");
  std::vector<std::array<Vec2, 3>> tris;
  std::vector<Vec2> v = poly;
  double area2 = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    area2 += p.x() * q.y() - q.x() * p.y();
  }
  if (area2 < 0) std::reverse(v.begin(), v.end());

  auto cross = [](const Vec2& o, const Vec2& p, const Vec2& q) {
    return (p.x() - o.x()) * (q.y() - o.y()) - (p.y() - o.y()) * (q.x() - o.x());
  };
  auto inside_tri = [&](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    return cross(a, b, p) > 0 && cross(b, c, p) > 0 && cross(c, a, p) > 0;
  };

  int guard = 0;
  while (v.size() > 3) {
    bool clipped = false;
    for (size_t i = 0; i < v.size(); ++i) {
      const Vec2& a = v[(i + v.size() - 1) % v.size()];
      const Vec2& b = v[i];
      const Vec2& c = v[(i + 1) % v.size()];
      if (cross(a, b, c) <= 0) continue;  // reflex or degenerate ear
      bool ok = true;
      for (size_t j = 0; j < v.size() && ok; ++j) {
        if (j == i || j == (i + v.size() - 1) % v.size() || j == (i + 1) % v.size()) continue;
        if (inside_tri(a, b, c, v[j])) ok = false;
      }
      if (!ok) continue;
      tris.push_back({a, b, c});
      v.erase(v.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped || ++guard > 100000)
      fail(errc::validation, "polygon triangulation failed (self-intersecting boundary?)");
  }
  tris.push_back({v[0], v[1], v[2]});
  return tris;
}

double integrate_polygon(const std::function<double(double, double)>& f,
                         const std::vector<Vec2>& poly, int panels, int order) {
  double total = 0.0;
  for (const auto& t : triangulate_polygon(poly))
    total += integrate_triangle(f, t[0], t[1], t[2], panels, order);
  return total;
}

QuadratureLevel quadrature_level(const std::string& name) {
  if (name == "Q1") return {4, 8, 4, 8};
  if (name == "Q2") return {8, 16, 8, 16};
  if (name == "Q3") return {12, 24, 16, 24};
  fail(errc::validation, "unknown quadrature level '" + name + "' (expected Q1, Q2 or Q3)");
}

}  // namespace defectscope

#include "defectscope/problem.hpp"

#include <cmath>
#include <fstream>

#include "defectscope/errors.hpp"

namespace defectscope {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(errc::validation, where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing required key '") + key + "'");
  return *it;
}

double need_number(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) bad(where + "." + key, "expected a number");
  return v.get<double>();
}

std::string need_string(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) bad(where + "." + key, "expected a string");
  return v.get<std::string>();
}

Vec2 need_point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    bad(where, "expected a point [w1, w2]");
  return Vec2(v[0].get<double>(), v[1].get<double>());
}

Expression parse_expr(const json& j, const char* key, const std::string& where,
                      const std::vector<std::string>& vars) {
  std::string text = need_string(j, key, where);
  try {
    return Expression::parse(text, vars);
  } catch (const Error& e) {
    bad(where + "." + key, e.what());
  }
}

Rational parse_rational(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return rational_from_string(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number()) return rational_from_double(v.get<double>());
  } catch (const Error& e) {
    bad(where, e.what());
  }
  bad(where, "expected a rational (integer, decimal or \"p/q\")");
}

Domain load_domain(const json& j, const std::string& where) {
  std::string kind = need_string(j, "kind", where);
  if (kind == "rectangle") {
    Vec2 lo = need_point(need(j, "min", where), where + ".min");
    Vec2 hi = need_point(need(j, "max", where), where + ".max");
    if (!(lo.x() < hi.x() && lo.y() < hi.y())) bad(where, "rectangle min must be below max");
    return Domain::rectangle(lo, hi);
  }
  if (kind == "polygon") {
    const json& vj = need(j, "vertices", where);
    if (!vj.is_array() || vj.size() < 3) bad(where + ".vertices", "need at least 3 vertices");
    std::vector<Vec2> verts;
    for (size_t i = 0; i < vj.size(); ++i)
      verts.push_back(need_point(vj[i], where + ".vertices[" + std::to_string(i) + "]"));
    return Domain::polygon(std::move(verts));
  }
  if (kind == "disk") {
    Vec2 c = need_point(need(j, "center", where), where + ".center");
    double r = need_number(j, "radius", where);
    if (!(r > 0)) bad(where + ".radius", "disk radius must be positive");
    return Domain::disk(c, r);
  }
  bad(where + ".kind", "unknown domain kind '" + kind + "' (rectangle | polygon | disk)");
}

std::unique_ptr<Chart> load_chart(const json& j, const std::string& where) {
  std::string family = need_string(j, "family", where);
  Domain dom = load_domain(need(j, "domain", where), where + ".domain");
  std::unique_ptr<Chart> chart;
  std::vector<std::string> w12 = {"w1", "w2"};
  if (family == "plane") {
    chart = std::make_unique<PlaneChart>(std::move(dom));
  } else if (family == "sphere") {
    double radius = j.contains("radius") ? need_number(j, "radius", where) : 1.0;
    if (!(radius > 0)) bad(where + ".radius", "sphere radius must be positive");
    chart = std::make_unique<SphereChart>(std::move(dom), radius);
  } else if (family == "revolution") {
    Expression f = parse_expr(j, "radius_profile", where, {"t"});
    Expression g = parse_expr(j, "height_profile", where, {"t"});
    chart = std::make_unique<RevolutionChart>(std::move(dom), std::move(f), std::move(g));
  } else if (family == "expression") {
    Expression x = parse_expr(j, "x", where, w12);
    Expression y = parse_expr(j, "y", where, w12);
    Expression z = parse_expr(j, "z", where, w12);
    chart = std::make_unique<ExpressionChart>(std::move(dom), std::move(x), std::move(y),
                                              std::move(z));
  } else {
    bad(where + ".family",
        "unknown chart family '" + family + "' (plane | sphere | revolution | expression)");
  }

  if (j.contains("degenerate_points")) {
    const json& dj = j.at("degenerate_points");
    if (!dj.is_array()) bad(where + ".degenerate_points", "expected an array");
    std::vector<DegenerateSite> sites;
    for (size_t i = 0; i < dj.size(); ++i) {
      std::string dw = where + ".degenerate_points[" + std::to_string(i) + "]";
      DegenerateSite s;
      s.point = need_point(need(dj[i], "point", dw), dw + ".point");
      if (!chart->domain().contains(s.point, 1e-9 * chart->domain().diameter()))
        bad(dw + ".point", "degenerate point lies outside the domain");
      std::string edge = dj[i].contains("collapsed_edge")
                             ? dj[i].at("collapsed_edge").get<std::string>()
                             : "none";
      using E = DegenerateSite::Edge;
      if (edge == "none") s.collapsed_edge = E::none;
      else if (edge == "w1_min") s.collapsed_edge = E::w1_min;
      else if (edge == "w1_max") s.collapsed_edge = E::w1_max;
      else if (edge == "w2_min") s.collapsed_edge = E::w2_min;
      else if (edge == "w2_max") s.collapsed_edge = E::w2_max;
      else bad(dw + ".collapsed_edge", "unknown edge tag '" + edge + "'");
      sites.push_back(s);
    }
    chart->set_degenerate_sites(std::move(sites));
  }

  // orthogonality is assumed by every downstream formula; reject violations
  try {
    chart->validate_orthogonality(1e-8, 500, 20240801);
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return chart;
}

BoundarySegment load_segment(const json& j, const std::string& where) {
  std::string kind = need_string(j, "kind", where);
  if (kind == "line")
    return BoundarySegment::line(need_point(need(j, "from", where), where + ".from"),
                                 need_point(need(j, "to", where), where + ".to"));
  if (kind == "arc") {
    Vec2 c = need_point(need(j, "center", where), where + ".center");
    double r = need_number(j, "radius", where);
    if (!(r > 0)) bad(where + ".radius", "arc radius must be positive");
    return BoundarySegment::arc(c, r, need_number(j, "angle_start", where),
                                need_number(j, "angle_end", where));
  }
  if (kind == "expression")
    return BoundarySegment::expression(parse_expr(j, "x1", where, {"t"}),
                                       parse_expr(j, "x2", where, {"t"}));
  bad(where + ".kind", "unknown segment kind '" + kind + "' (line | arc | expression)");
}

}  // namespace

const TangentField& ProblemSpec::require_field() const {
  if (!field) fail(errc::validation, "this operation needs a \"field\" block in the spec");
  return *field;
}

ProblemSpec ProblemSpec::load_string(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::validation, origin + ": JSON parse error: " + e.what());
  }
  if (!j.is_object()) fail(errc::validation, origin + ": top level must be an object");
  if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
      j.at("schema").get<int>() != 1)
    fail(errc::validation, origin + ": missing or unsupported \"schema\" (expected 1)");

  ProblemSpec spec;
  spec.name = j.contains("name") ? j.at("name").get<std::string>() : origin;

  spec.chart = load_chart(need(j, "chart", "chart"), "chart");

  const json& tj = need(j, "topology", "topology");
  spec.topology.genus = static_cast<int>(need_number(tj, "genus", "topology"));
  spec.topology.boundary_components =
      static_cast<int>(need_number(tj, "boundary_components", "topology"));
  if (spec.topology.genus < 0 || spec.topology.boundary_components < 0)
    fail(errc::validation, "topology: genus and boundary_components must be >= 0");
  if (tj.contains("triangulation")) {
    const json& tri = tj.at("triangulation");
    spec.topology.triangulation = std::array<long long, 3>{
        static_cast<long long>(need_number(tri, "faces", "topology.triangulation")),
        static_cast<long long>(need_number(tri, "edges", "topology.triangulation")),
        static_cast<long long>(need_number(tri, "vertices", "topology.triangulation"))};
  }
  euler_characteristic(spec.topology);  // consistency check

  if (j.contains("boundary")) {
    const json& bj = j.at("boundary");
    if (!bj.is_array()) fail(errc::validation, "boundary: expected an array of components");
    for (size_t c = 0; c < bj.size(); ++c) {
      std::string where = "boundary[" + std::to_string(c) + "]";
      const json& segs = need(bj[c], "segments", where);
      if (!segs.is_array() || segs.empty()) bad(where + ".segments", "expected segments");
      std::vector<BoundarySegment> list;
      for (size_t s = 0; s < segs.size(); ++s)
        list.push_back(load_segment(segs[s], where + ".segments[" + std::to_string(s) + "]"));
      try {
        spec.boundary.emplace_back(spec.chart.get(), std::move(list));
      } catch (const Error& e) {
        if (e.code() == errc::validation || e.code() == errc::degenerate_curve ||
            e.code() == errc::cusp_vertex)
          bad(where, e.what());
        throw;
      }
    }
  }
  if (static_cast<int>(spec.boundary.size()) != spec.topology.boundary_components)
    fail(errc::validation,
         "boundary: " + std::to_string(spec.boundary.size()) +
             " component(s) given but topology declares " +
             std::to_string(spec.topology.boundary_components));

  if (j.contains("field")) {
    const json& fj = j.at("field");
    std::string mode = need_string(fj, "mode", "field");
    FieldMode fm;
    if (mode == "vector") fm = FieldMode::vector;
    else if (mode == "director") fm = FieldMode::director;
    else bad("field.mode", "unknown mode '" + mode + "' (vector | director)");
    std::vector<std::string> w12 = {"w1", "w2"};
    spec.field.emplace(parse_expr(fj, "a1", "field", w12), parse_expr(fj, "a2", "field", w12),
                       fm);
  }

  if (j.contains("predictor")) {
    const json& pj = j.at("predictor");
    auto& p = spec.predictor;
    if (pj.contains("bound")) p.bound = parse_rational(pj.at("bound"), "predictor.bound");
    if (!(p.bound > Rational(0))) bad("predictor.bound", "bound must be positive");
    if (pj.contains("interior_q"))
      p.interior_q = parse_rational(pj.at("interior_q"), "predictor.interior_q");
    if (pj.contains("vertex_q")) {
      for (size_t i = 0; i < pj.at("vertex_q").size(); ++i)
        p.vertex_q.push_back(parse_rational(pj.at("vertex_q")[i],
                                            "predictor.vertex_q[" + std::to_string(i) + "]"));
    }
    if (pj.contains("max_interior")) p.max_interior = pj.at("max_interior").get<int>();
    if (p.max_interior < 0 || p.max_interior > 16)
      bad("predictor.max_interior", "cap must be between 0 and 16");
    if (pj.contains("q_exponent")) p.q_exponent = pj.at("q_exponent").get<int>();
    if (p.q_exponent != 1 && p.q_exponent != 2) bad("predictor.q_exponent", "must be 1 or 2");
    if (pj.contains("mod_symmetry")) p.mod_symmetry = pj.at("mod_symmetry").get<bool>();
    if (pj.contains("levels")) p.levels = pj.at("levels").get<int>();
    if (p.levels < 1 || p.levels > 16) bad("predictor.levels", "levels must be in 1..16");
  }

  if (j.contains("energy")) {
    const json& ej = j.at("energy");
    auto& e = spec.energy;
    if (ej.contains("eps_hi")) e.eps_hi = ej.at("eps_hi").get<double>();
    if (ej.contains("eps_lo")) e.eps_lo = ej.at("eps_lo").get<double>();
    if (ej.contains("count")) e.count = ej.at("count").get<int>();
    if (ej.contains("patch_radius")) e.patch_radius = ej.at("patch_radius").get<double>();
  }

  if (j.contains("quadrature")) {
    spec.quadrature = j.at("quadrature").get<std::string>();
    quadrature_level(spec.quadrature);  // validates the name
  }
  return spec;
}

ProblemSpec ProblemSpec::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::validation, "cannot open spec file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_string(text, path);
}

std::vector<ProblemSpec::VertexInfo> ProblemSpec::boundary_vertices() const {
  std::vector<VertexInfo> out;
  for (size_t c = 0; c < boundary.size(); ++c) {
    const auto& comp = boundary[c];
    for (const auto& v : comp.vertices()) {
      if (std::fabs(v.tau) < 1e-9) continue;  // smooth junction (parametrization seam)
      VertexInfo info;
      info.component = static_cast<int>(c);
      info.tau = v.tau;
      int seg = v.junction;
      info.point = comp.segment(seg).point(0.0);
      // parameter-domain wedge: pi minus the parameter exterior angle
      Vec2 tm = comp.segment((seg + comp.segment_count() - 1) % comp.segment_count()).tangent(1.0);
      Vec2 tp = comp.segment(seg).tangent(0.0);
      tm.normalize();
      tp.normalize();
      double cosang = std::clamp(tm.dot(tp), -1.0, 1.0);
      double phi = std::acos(cosang);
      if (tm.x() * tp.y() - tm.y() * tp.x() < 0) phi = -phi;
      info.wedge = M_PI - phi;
      out.push_back(info);
    }
  }
  return out;
}

PredictionProblem ProblemSpec::build_prediction_problem() const {
  PredictionProblem p;
  p.chi = Rational(chi());
  p.mode = field ? field->mode() : FieldMode::director;
  p.bound = predictor.bound;
  p.interior_q = predictor.interior_q;
  p.max_interior = predictor.max_interior;
  p.q_exponent = predictor.q_exponent;
  auto verts = boundary_vertices();
  if (!predictor.vertex_q.empty() && predictor.vertex_q.size() != verts.size())
    fail(errc::validation, "predictor.vertex_q size does not match the vertex count (" +
                               std::to_string(verts.size()) + ")");
  for (size_t i = 0; i < verts.size(); ++i) {
    PredictorVertex pv;
    pv.tau_over_pi = snap_angle_over_pi(verts[i].tau);
    pv.wedge_over_pi = snap_angle_over_pi(verts[i].wedge);
    pv.q = predictor.vertex_q.empty() ? Rational(1) : predictor.vertex_q[i];
    p.vertices.push_back(pv);
  }
  return p;
}

}  // namespace defectscope

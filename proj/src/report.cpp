#include "defectscope/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "defectscope/energy.hpp"
#include "defectscope/errors.hpp"
#include "defectscope/rates.hpp"

namespace defectscope {

using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

ordered_json point_json(const Vec2& p) { return ordered_json::array({p.x(), p.y()}); }

ordered_json rational_json(const Rational& r) {
  return ordered_json{{"rational", r.str()}, {"value", r.to_double()}};
}

double auto_holder_radius(const ProblemSpec& spec, const Vec2& site) {
  const Chart& chart = *spec.chart;
  double r = 0.05 * chart.domain().diameter();
  for (const auto& s : chart.degenerate_sites()) {
    double d = (s.point - site).norm();
    if (d > 1e-12) r = std::min(r, 0.45 * d);
  }
  return r;
}

struct SiteTable {
  struct Row {
    std::string kind;  // interior | boundary | degenerate
    Vec2 point;
    double strength;
    std::string strength_exact;  // snapped rational when available
    double q;
    std::string q_source;
    double factor;  // 2 pi / wedge for boundary rows, 1 otherwise
    double wedge;   // boundary rows
    double contribution;
    double contribution_raw;
  };
  std::vector<Row> rows;
  double total = 0, total_raw = 0;
};

SiteTable build_site_table(const ProblemSpec& spec) {
  const Chart& chart = *spec.chart;
  const TangentField& field = spec.require_field();
  const Domain& dom = chart.domain();
  int qe = spec.predictor.q_exponent;

  SiteTable table;
  auto zeros = locate_zeros(field, chart);
  std::erase_if(zeros, [&](const FieldZero& z) {
    return chart.distance_to_degenerate(z.point) < 1e-6 * dom.diameter();
  });
  double rsep = separation_radius(zeros, dom);
  for (const auto& s : chart.degenerate_sites())
    for (const auto& z : zeros) rsep = std::min(rsep, 0.5 * (z.point - s.point).norm());

  for (const auto& z : zeros) {
    SiteTable::Row row;
    row.point = z.point;
    double r = std::min(0.9 * rsep, 0.05 * dom.diameter());
    auto w = rate_weight_at(chart, z.point, auto_holder_radius(spec, z.point));
    row.q = *w.q;
    row.q_source = w.source == RateWeight::Source::metric_ratio ? "metric-ratio" : "holder-ratio";
    if (!z.boundary) {
      auto idx = index_around(field, circle_loop(z.point, r));
      row.kind = "interior";
      row.strength = idx.snapped.to_double();
      row.strength_exact = idx.snapped.str();
      row.factor = 1.0;
      row.wedge = 0.0;
      row.contribution = interior_rate(row.q, row.strength, qe);
      row.contribution_raw = interior_rate_raw(row.q, row.strength, qe);
    } else {
      BoundaryArc arc = boundary_arc(dom, z.point, r);
      auto res = winding_along(field, arc.curve, /*closed=*/false);
      row.kind = "boundary";
      row.strength = res.raw;
      row.strength_exact = "";
      row.wedge = arc.angle_out - arc.angle_in;
      row.factor = 2 * M_PI / row.wedge;
      row.contribution = boundary_rate(row.q, row.strength, row.wedge, qe);
      row.contribution_raw = boundary_rate_raw(row.q, row.strength, row.wedge, qe);
    }
    table.rows.push_back(row);
  }

  for (const auto& s : chart.degenerate_sites()) {
    // frame-corrected loop around the degenerate point
    ConservationReport rep;  // reuse the conservation machinery for one site
    SiteTable::Row row;
    row.kind = "degenerate";
    row.point = s.point;
    auto w = rate_weight_at(chart, s.point, auto_holder_radius(spec, s.point));
    row.q = *w.q;
    row.q_source = w.source == RateWeight::Source::metric_ratio ? "metric-ratio" : "holder-ratio";
    std::function<Vec2(double)> loop;
    Vec2 lo = dom.bbox_lo(), hi = dom.bbox_hi();
    using E = DegenerateSite::Edge;
    switch (s.collapsed_edge) {
      case E::none: loop = circle_loop(s.point, std::min(0.9 * rsep, 0.05 * dom.diameter())); break;
      case E::w1_min: loop = [=](double t) { return Vec2(lo.x() + 0.01 * (hi.x() - lo.x()), lo.y() + (hi.y() - lo.y()) * t); }; break;
      case E::w1_max: loop = [=](double t) { return Vec2(hi.x() - 0.01 * (hi.x() - lo.x()), hi.y() - (hi.y() - lo.y()) * t); }; break;
      case E::w2_min: loop = [=](double t) { return Vec2(hi.x() - (hi.x() - lo.x()) * t, lo.y() + 0.01 * (hi.y() - lo.y())); }; break;
      case E::w2_max: loop = [=](double t) { return Vec2(lo.x() + (hi.x() - lo.x()) * t, hi.y() - 0.01 * (hi.y() - lo.y())); }; break;
    }
    auto res = winding_along(field, loop, /*closed=*/true, /*frame_corrected=*/true, &chart);
    row.strength = res.snapped.to_double();
    row.strength_exact = res.snapped.str();
    row.factor = 1.0;
    row.wedge = 0.0;
    row.contribution = interior_rate(row.q, row.strength, qe);
    row.contribution_raw = interior_rate_raw(row.q, row.strength, qe);
    table.rows.push_back(row);
    (void)rep;
  }

  for (const auto& r : table.rows) {
    table.total += r.contribution;
    table.total_raw += r.contribution_raw;
  }
  return table;
}

ordered_json site_rows_json(const SiteTable& table) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : table.rows) {
    ordered_json row{{"kind", r.kind},
                     {"site", point_json(r.point)},
                     {"q", r.q},
                     {"q_source", r.q_source},
                     {"factor", r.factor},
                     {"strength", r.strength},
                     {"contribution", r.contribution},
                     {"contribution_raw", r.contribution_raw}};
    if (!r.strength_exact.empty()) row["strength_exact"] = r.strength_exact;
    if (r.kind == "boundary") row["wedge_angle"] = r.wedge;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

RunOutput run_analyze(const ProblemSpec& spec) {
  const Chart& chart = *spec.chart;
  QuadratureLevel level = quadrature_level(spec.quadrature);
  RunOutput out;
  std::ostringstream text;

  ordered_json j;
  j["schema"] = 1;
  j["command"] = "analyze";
  j["name"] = spec.name;
  j["chart"] = ordered_json{{"family", chart.family()},
                            {"metric_scale", chart.metric_scale()},
                            {"degeneracy_tol", chart.degeneracy_tol()}};
  j["chi"] = spec.chi();

  ordered_json comps = ordered_json::array();
  for (size_t c = 0; c < spec.boundary.size(); ++c) {
    const auto& comp = spec.boundary[c];
    ordered_json cj;
    cj["length"] = comp.total_length();
    ordered_json taus = ordered_json::array();
    for (double t : comp.exterior_angles())
      if (std::fabs(t) > 1e-9) taus.push_back(t);
    cj["exterior_angles"] = taus;
    comps.push_back(cj);
  }
  j["boundary_components"] = comps;

  auto gb = gauss_bonnet_residual(chart, spec.boundary, static_cast<double>(spec.chi()), level);
  j["gauss_bonnet"] = ordered_json{{"two_pi_chi", 2 * M_PI * gb.chi},
                                   {"kg_integral", gb.kg_integral},
                                   {"curvature_integral", gb.curvature_integral},
                                   {"tau_sum", gb.tau_sum},
                                   {"residual", gb.residual},
                                   {"error_estimate", gb.error_estimate}};

  ordered_json holders = ordered_json::array();
  for (const auto& s : chart.degenerate_sites()) {
    HolderData h = chart.holder_fit(s.point, auto_holder_radius(spec, s.point));
    holders.push_back(ordered_json{{"point", point_json(s.point)},
                                   {"radius", h.radius},
                                   {"alpha", h.alpha},
                                   {"h_minus", h.h_minus},
                                   {"h_plus", h.h_plus},
                                   {"m_minus", h.m_minus},
                                   {"m_plus", h.m_plus},
                                   {"max_violation", h.max_violation}});
  }
  j["holder_fits"] = holders;

  text << "analyze: " << spec.name << "\n";
  text << "  chart family: " << chart.family() << ", chi = " << spec.chi() << "\n";
  for (size_t c = 0; c < spec.boundary.size(); ++c)
    text << "  boundary[" << c << "]: length " << fmt(spec.boundary[c].total_length()) << "\n";
  text << "  Gauss-Bonnet: kg " << fmt(gb.kg_integral) << " + K " << fmt(gb.curvature_integral)
       << " + tau " << fmt(gb.tau_sum) << " vs 2 pi chi " << fmt(2 * M_PI * gb.chi) << "\n";
  text << "  residual = " << fmt(gb.residual) << " (quadrature error ~ "
       << fmt(gb.error_estimate) << ")\n";
  for (const auto& h : holders)
    text << "  holder fit at (" << fmt(h["point"][0].get<double>()) << ", "
         << fmt(h["point"][1].get<double>()) << "): alpha = " << fmt(h["alpha"].get<double>())
         << ", h in [" << fmt(h["h_minus"].get<double>()) << ", "
         << fmt(h["h_plus"].get<double>()) << "]\n";

  out.json = std::move(j);
  out.text = text.str();
  return out;
}

RunOutput run_check(const ProblemSpec& spec) {
  const Chart& chart = *spec.chart;
  const TangentField& field = spec.require_field();
  auto rep = conservation_residual(chart, spec.boundary, field, static_cast<double>(spec.chi()));

  RunOutput out;
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "check";
  j["name"] = spec.name;
  j["chi"] = rep.chi;
  j["tau_sum_over_2pi"] = rep.tau_sum / (2 * M_PI);
  j["theta_integral_over_2pi"] = rep.theta_integral / (2 * M_PI);

  auto verts = spec.boundary_vertices();
  ordered_json interior = ordered_json::array();
  for (const auto& s : rep.interior)
    interior.push_back(ordered_json{{"site", point_json(s.point)},
                                    {"index_raw", s.raw},
                                    {"index", rational_json(s.snapped)},
                                    {"snap_distance", s.snap_distance}});
  j["interior_sites"] = interior;

  ordered_json degen = ordered_json::array();
  for (const auto& s : rep.degenerate)
    degen.push_back(ordered_json{{"site", point_json(s.point)},
                                 {"index_raw", s.raw},
                                 {"index", rational_json(s.snapped)},
                                 {"snap_distance", s.snap_distance}});
  j["degenerate_sites"] = degen;

  ordered_json bnd = ordered_json::array();
  for (const auto& s : rep.boundary) {
    double tau = 0.0;
    for (const auto& v : verts)
      if ((v.point - s.point).norm() < 1e-6 * chart.domain().diameter()) tau = v.tau;
    // both decompositions of the measured strength
    bnd.push_back(ordered_json{{"site", point_json(s.point)},
                               {"arc_index", s.arc_index},
                               {"wedge_angle", s.wedge_angle},
                               {"tau", tau},
                               {"m_minus_convention", s.arc_index + tau / (2 * M_PI)},
                               {"m_plus_convention", s.arc_index - tau / (2 * M_PI)}});
  }
  j["boundary_sites"] = bnd;
  j["residual_presnap"] = rep.residual_presnap;
  j["residual"] = rep.residual;

  std::ostringstream text;
  text << "check: " << spec.name << "\n";
  text << "  chi = " << fmt(rep.chi) << "\n";
  text << "  sum tau / 2pi        = " << fmt(rep.tau_sum / (2 * M_PI)) << "\n";
  text << "  (1/2pi) int dtheta   = " << fmt(rep.theta_integral / (2 * M_PI)) << "\n";
  for (const auto& s : rep.interior)
    text << "  interior index at (" << fmt(s.point.x()) << ", " << fmt(s.point.y())
         << ") = " << s.snapped.str() << " (raw " << fmt(s.raw) << ")\n";
  for (const auto& s : rep.degenerate)
    text << "  degenerate-point index at (" << fmt(s.point.x()) << ", " << fmt(s.point.y())
         << ") = " << s.snapped.str() << " (raw " << fmt(s.raw) << ")\n";
  for (const auto& s : rep.boundary)
    text << "  boundary arc index at (" << fmt(s.point.x()) << ", " << fmt(s.point.y())
         << ") = " << fmt(s.arc_index) << " (wedge " << fmt(s.wedge_angle) << ")\n";
  text << "  residual (pre-snap)  = " << fmt(rep.residual_presnap) << "\n";
  text << "  residual (snapped)   = " << fmt(rep.residual) << "\n";

  out.json = std::move(j);
  out.text = text.str();
  return out;
}

RunOutput run_rates(const ProblemSpec& spec) {
  SiteTable table = build_site_table(spec);
  RunOutput out;
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "rates";
  j["name"] = spec.name;
  j["q_exponent"] = spec.predictor.q_exponent;
  j["sites"] = site_rows_json(table);
  j["Q"] = table.total;
  j["Q_raw"] = table.total_raw;

  std::ostringstream csv;
  csv << "site_w1,site_w2,kind,q,factor,strength,contribution\n";
  for (const auto& r : table.rows)
    csv << fmt(r.point.x()) << "," << fmt(r.point.y()) << "," << r.kind << "," << fmt(r.q) << ","
        << fmt(r.factor) << "," << fmt(r.strength) << "," << fmt(r.contribution) << "\n";

  std::ostringstream text;
  text << "rates: " << spec.name << "\n";
  for (const auto& r : table.rows)
    text << "  " << r.kind << " site (" << fmt(r.point.x()) << ", " << fmt(r.point.y())
         << "): q = " << fmt(r.q) << " [" << r.q_source << "], strength " << fmt(r.strength)
         << ", contribution " << fmt(r.contribution) << "\n";
  text << "  Q = " << fmt(table.total) << " (raw " << fmt(table.total_raw) << ")\n";

  out.json = std::move(j);
  out.text = text.str();
  out.csv = csv.str();
  return out;
}

RunOutput run_predict(const ProblemSpec& spec) {
  PredictionProblem prob = spec.build_prediction_problem();
  auto result = enumerate_branches(prob, spec.predictor.levels - 1);
  if (spec.predictor.mod_symmetry) deduplicate_by_symmetry(result, prob);

  RunOutput out;
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "predict";
  j["name"] = spec.name;
  j["mode"] = prob.mode == FieldMode::director ? "director" : "vector";
  j["chi"] = rational_json(prob.chi);
  ordered_json vj = ordered_json::array();
  for (const auto& v : prob.vertices)
    vj.push_back(ordered_json{{"tau_over_pi", v.tau_over_pi.str()},
                              {"wedge_over_pi", v.wedge_over_pi.str()},
                              {"q", v.q.str()}});
  j["vertices"] = vj;
  j["bound"] = prob.bound.str();
  j["mod_symmetry"] = spec.predictor.mod_symmetry;

  ordered_json levels = ordered_json::array();
  for (const auto& lvl : result.levels) {
    ordered_json lj;
    lj["Q"] = rational_json(lvl.Q);
    lj["count"] = lvl.configs.size();
    if (lvl.truncated) lj["truncated"] = true;
    ordered_json cfgs = ordered_json::array();
    for (const auto& cfg : lvl.configs) {
      ordered_json cj;
      ordered_json mj = ordered_json::array();
      ordered_json str_minus = ordered_json::array();
      ordered_json str_plus = ordered_json::array();
      for (size_t k = 0; k < cfg.m.size(); ++k) {
        mj.push_back(cfg.m[k].str());
        str_minus.push_back((cfg.m[k] - prob.vertices[k].tau_over_pi / Rational(2)).str());
        str_plus.push_back((cfg.m[k] + prob.vertices[k].tau_over_pi / Rational(2)).str());
      }
      cj["m"] = mj;
      cj["corner_strengths"] = str_minus;        // str = m - tau/(2 pi)
      cj["corner_strengths_plus"] = str_plus;    // the alternate sign convention
      ordered_json ij = ordered_json::array();
      for (const auto& n : cfg.interior) ij.push_back(n.str());
      cj["interior"] = ij;
      cfgs.push_back(cj);
    }
    lj["configurations"] = cfgs;
    levels.push_back(lj);
  }
  j["levels"] = levels;
  j["min_Q"] = rational_json(result.min_Q);

  std::ostringstream text;
  text << "predict: " << spec.name << " (chi = " << prob.chi.str() << ", "
       << prob.vertices.size() << " vertices)\n";
  for (const auto& lvl : result.levels) {
    text << "  Q = " << lvl.Q.str() << " (" << fmt(lvl.Q.to_double()) << "): "
         << lvl.configs.size() << " configuration(s)\n";
    size_t shown = 0;
    for (const auto& cfg : lvl.configs) {
      if (shown++ >= 8) { text << "    ...\n"; break; }
      text << "    m = [";
      for (size_t k = 0; k < cfg.m.size(); ++k)
        text << (k ? ", " : "") << cfg.m[k].str();
      text << "], interior = [";
      for (size_t k = 0; k < cfg.interior.size(); ++k)
        text << (k ? ", " : "") << cfg.interior[k].str();
      text << "]\n";
    }
  }

  out.json = std::move(j);
  out.text = text.str();
  return out;
}

RunOutput run_energy(const ProblemSpec& spec) {
  const Chart& chart = *spec.chart;
  const TangentField& field = spec.require_field();
  const Domain& dom = chart.domain();
  int qe = spec.predictor.q_exponent;

  auto zeros = locate_zeros(field, chart);
  std::erase_if(zeros, [&](const FieldZero& z) {
    return chart.distance_to_degenerate(z.point) < 1e-6 * dom.diameter();
  });
  double rsep = separation_radius(zeros, dom);

  RunOutput out;
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "energy";
  j["name"] = spec.name;
  ordered_json sites = ordered_json::array();
  std::ostringstream csv, text;
  csv << "site_index,eps,energy,running_slope\n";
  text << "energy: " << spec.name << "\n";

  int site_idx = 0;
  for (const auto& z : zeros) {
    double patch = spec.energy.patch_radius > 0
                       ? spec.energy.patch_radius
                       : std::min(0.9 * rsep, 0.2 * dom.diameter());
    double eps_hi = spec.energy.eps_hi > 0 ? spec.energy.eps_hi : patch / 10.0;
    double eps_lo = spec.energy.eps_lo > 0 ? spec.energy.eps_lo : patch / 2000.0;
    SweepSchedule sched{eps_hi, eps_lo, spec.energy.count, patch};

    auto w = rate_weight_at(chart, z.point, auto_holder_radius(spec, z.point));
    double lemma, strength, wedge = 0.0;
    if (!z.boundary) {
      auto idx = index_around(field, circle_loop(z.point, 0.5 * patch));
      strength = idx.snapped.to_double();
      lemma = interior_rate_raw(*w.q, strength, qe);
    } else {
      BoundaryArc arc = boundary_arc(dom, z.point, 0.5 * patch);
      auto res = winding_along(field, arc.curve, /*closed=*/false);
      strength = res.raw;
      wedge = arc.angle_out - arc.angle_in;
      lemma = boundary_rate_raw(*w.q, strength, wedge, qe);
    }
    auto sweep = divergence_slope(field, chart, z.point, sched, lemma);

    ordered_json sj;
    sj["site"] = point_json(z.point);
    sj["kind"] = z.boundary ? "boundary" : "interior";
    sj["strength"] = strength;
    if (z.boundary) sj["wedge_angle"] = wedge;
    sj["q"] = *w.q;
    sj["lemma_rate"] = lemma;
    sj["slope"] = sweep.slope;
    sj["slope_ci95"] = sweep.ci95;
    sj["meets_lower_bound"] = sweep.meets_lower_bound;
    sj["eps"] = sweep.eps;
    sj["energy"] = sweep.energy;
    sites.push_back(sj);

    for (size_t k = 0; k < sweep.eps.size(); ++k) {
      double rs = 0.0;
      if (k > 0)
        rs = (sweep.energy[k] - sweep.energy[k - 1]) /
             (std::log(1.0 / sweep.eps[k]) - std::log(1.0 / sweep.eps[k - 1]));
      csv << site_idx << "," << fmt(sweep.eps[k]) << "," << fmt(sweep.energy[k]) << ","
          << fmt(rs) << "\n";
    }
    text << "  site (" << fmt(z.point.x()) << ", " << fmt(z.point.y()) << "): slope "
         << fmt(sweep.slope) << " vs lemma " << fmt(lemma)
         << (sweep.meets_lower_bound ? " (ok)" : " (below bound!)") << "\n";
    ++site_idx;
  }
  j["sites"] = sites;

  out.json = std::move(j);
  out.text = text.str();
  out.csv = csv.str();
  return out;
}

}  // namespace defectscope

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "defectscope/errors.hpp"
#include "defectscope/rates.hpp"

using namespace defectscope;

TEST_CASE("interior rate") {
  CHECK(interior_rate(1.0, 0.5) == doctest::Approx(0.25));
  CHECK(interior_rate(1.0, 1.0) == doctest::Approx(1.0));
  // splitting a +1 into two halves halves the rate
  CHECK(2 * interior_rate(1.0, 0.5) == doctest::Approx(0.5));
  CHECK(interior_rate(0.0, 0.5) == doctest::Approx(0.0));
  CHECK(interior_rate_raw(1.0, 1.0) == doctest::Approx(2 * M_PI));
  // q exponent switch
  CHECK(interior_rate(0.5, 1.0, 2) == doctest::Approx(0.25));
  CHECK(interior_rate(0.5, 1.0, 1) == doctest::Approx(0.5));
}

TEST_CASE("boundary rate") {
  // hexagon corner: tau = pi/3, wedge 2 pi/3, factor 3
  CHECK(boundary_rate(1.0, -1.0 / 6, 2 * M_PI / 3) == doctest::Approx(3.0 / 36));
  // triangle corner: tau = 2 pi/3, wedge pi/3, factor 6
  CHECK(boundary_rate(1.0, 1.0 / 6, M_PI / 3) == doctest::Approx(6.0 / 36));
  // flat boundary point: wedge pi, factor 2
  CHECK(boundary_rate(1.0, 0.5, M_PI) == doctest::Approx(0.5));
  CHECK(boundary_rate_raw(1.0, 0.5, M_PI) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(boundary_rate(1.0, 0.5, 0.0), Error);
}

TEST_CASE("total rate on the worked configurations") {
  // triangle: three corners m = 1/2 (strength 1/6) plus interior -1/2
  std::vector<RateSite> tri = {
      {true, 1.0, 1.0 / 6, M_PI / 3},
      {true, 1.0, 1.0 / 6, M_PI / 3},
      {true, 1.0, 1.0 / 6, M_PI / 3},
      {false, 1.0, -0.5, 0.0},
  };
  CHECK(total_rate(tri).normalized == doctest::Approx(0.75));

  // hexagon Ortho: two corners strength 1/3, four corners strength -1/6
  std::vector<RateSite> hex;
  for (int i = 0; i < 2; ++i) hex.push_back({true, 1.0, 1.0 / 3, 2 * M_PI / 3});
  for (int i = 0; i < 4; ++i) hex.push_back({true, 1.0, -1.0 / 6, 2 * M_PI / 3});
  CHECK(total_rate(hex).normalized == doctest::Approx(1.0));

  // hexagon Ring: six corners -1/6 plus interior +1
  std::vector<RateSite> ring;
  for (int i = 0; i < 6; ++i) ring.push_back({true, 1.0, -1.0 / 6, 2 * M_PI / 3});
  ring.push_back({false, 1.0, 1.0, 0.0});
  CHECK(total_rate(ring).normalized == doctest::Approx(1.5));

  // raw carries the 2 pi
  CHECK(total_rate(tri).raw == doctest::Approx(2 * M_PI * 0.75));
}

TEST_CASE("quadratic scaling and permutation invariance") {
  std::vector<RateSite> sites = {
      {true, 0.8, 0.25, M_PI / 2},
      {false, 0.9, 0.5, 0.0},
      {true, 0.8, -0.5, M_PI / 2},
  };
  double q1 = total_rate(sites).normalized;
  for (auto& s : sites) s.strength *= 2;
  CHECK(total_rate(sites).normalized == doctest::Approx(4 * q1));

  std::vector<RateSite> a = {{true, 0.7, 0.5, M_PI / 3}, {true, 0.7, -0.5, M_PI / 3}};
  std::vector<RateSite> b = {{true, 0.7, -0.5, M_PI / 3}, {true, 0.7, 0.5, M_PI / 3}};
  CHECK(total_rate(a).normalized == doctest::Approx(total_rate(b).normalized));
}

TEST_CASE("minimal interior cost uses only half strengths (exhaustive check)") {
  // for uniform q and target sum s, cost q^2 |s| / 2 beats every multiset
  auto enumerate_cost = [](double target, int maxcount) {
    double best = 1e100;
    // strengths in halves from -2 to 2
    std::vector<double> vals = {-2, -1.5, -1, -0.5, 0.5, 1, 1.5, 2};
    std::vector<int> idx(maxcount, 0);
    std::function<void(int, double, double)> rec = [&](int k, double sum, double cost) {
      if (std::fabs(sum - target) < 1e-12) best = std::min(best, cost);
      if (k == maxcount) return;
      for (double v : vals) rec(k + 1, sum + v, cost + v * v);
    };
    rec(0, 0.0, 0.0);
    return best;
  };
  for (double s : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    double expect = s / 2.0;  // q = 1
    CHECK(enumerate_cost(s, 8) == doctest::Approx(expect));
  }
}

TEST_CASE("missing weight is reported") {
  std::vector<RateSite> sites = {{false, std::nullopt, 0.5, 0.0}};
  CHECK_THROWS_AS(total_rate(sites), Error);
}

TEST_CASE("rate weight from chart metric and holder branches") {
  // plane: q = 1 everywhere
  PlaneChart plane(Domain::rectangle(Vec2(-1, -1), Vec2(1, 1)));
  auto w = rate_weight_at(plane, Vec2(0.2, 0.3), 0.2);
  CHECK(*w.q == doctest::Approx(1.0));
  CHECK(w.source == RateWeight::Source::metric_ratio);

  // branched cone apex: m+ = 0, so q comes from the holder ratio
  std::vector<std::string> wn = {"w1", "w2"};
  ExpressionChart cone(Domain::rectangle(Vec2(-1, -1), Vec2(1, 1)),
                       Expression::parse("(w1^2 - w2^2)/2", wn), Expression::parse("w1*w2", wn),
                       Expression::parse("0", wn));
  cone.set_degenerate_sites({DegenerateSite{Vec2(0, 0), DegenerateSite::Edge::none}});
  auto wc = rate_weight_at(cone, Vec2(0, 0), 0.5);
  CHECK(wc.source == RateWeight::Source::holder_ratio);
  CHECK(*wc.q == doctest::Approx(1.0).epsilon(1e-9));

  // sphere pole in the standard chart: q -> 0 via the metric branch
  SphereChart sph(Domain::rectangle(Vec2(0, 0), Vec2(M_PI, 2 * M_PI)), 1.0);
  auto ws = rate_weight_at(sph, Vec2(1e-4, 1.0), 0.05);
  CHECK(ws.source == RateWeight::Source::metric_ratio);
  CHECK(*ws.q == doctest::Approx(1e-4).epsilon(1e-2));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "defectscope/energy.hpp"
#include "defectscope/errors.hpp"
#include "defectscope/quadrature.hpp"

using namespace defectscope;

namespace {

const std::vector<std::string> kW = {"w1", "w2"};

TangentField make_field(const std::string& a1, const std::string& a2,
                        FieldMode mode = FieldMode::vector) {
  return TangentField(Expression::parse(a1, kW), Expression::parse(a2, kW), mode);
}

}  // namespace

TEST_CASE("plane annulus, degree-1 defect: E = 2 pi log(R/eps)") {
  PlaneChart disk(Domain::disk(Vec2(0, 0), 1.0));
  auto radial = make_field("w1", "w2");
  for (double eps : {1e-2, 1e-3}) {
    double e = dirichlet_energy(radial, disk, {{Vec2(0, 0), eps, 1.5}});
    CHECK(e == doctest::Approx(2 * M_PI * std::log(1.0 / eps)).epsilon(0.01));
  }
}

TEST_CASE("constant field has zero energy") {
  PlaneChart sq(Domain::rectangle(Vec2(-1, -1), Vec2(1, 1)));
  auto constant = make_field("1", "0");
  CHECK(dirichlet_energy(constant, sq, {}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("patch plus background equals the closed form") {
  // small patch forces the masked background grid to carry the outer annulus
  PlaneChart disk(Domain::disk(Vec2(0, 0), 1.0));
  auto radial = make_field("w1", "w2");
  double eps = 1e-2;
  double e = dirichlet_energy(radial, disk, {{Vec2(0, 0), eps, 0.4}});
  CHECK(e == doctest::Approx(2 * M_PI * std::log(1.0 / eps)).epsilon(0.01));
}

TEST_CASE("sphere band cross-check against an independent 1D quadrature") {
  double th1 = 0.5, th2 = 2.0;
  SphereChart band(Domain::rectangle(Vec2(th1, 0), Vec2(th2, 2 * M_PI)), 1.0);
  auto meridian = make_field("1", "0");
  double e2d = dirichlet_energy(meridian, band, {});
  double e1d = 2 * M_PI *
               integrate_1d(
                   [](double th) {
                     double c = std::cos(th) / std::sin(th);
                     return (c * c + 1.0) * std::sin(th);
                   },
                   th1, th2, 32, 16);
  CHECK(e2d == doctest::Approx(e1d).epsilon(1e-6));
}

TEST_CASE("dropping the shape term can only decrease the energy") {
  double th1 = 0.5, th2 = 2.0;
  SphereChart band(Domain::rectangle(Vec2(th1, 0), Vec2(th2, 2 * M_PI)), 1.0);
  auto meridian = make_field("1", "0");
  EnergyOptions with, without;
  without.include_shape = false;
  double ew = dirichlet_energy(meridian, band, {}, with);
  double eo = dirichlet_energy(meridian, band, {}, without);
  CHECK(eo < ew);
  // for this field the shape term is exactly the band area
  CHECK(ew - eo == doctest::Approx(2 * M_PI * (std::cos(th1) - std::cos(th2))).epsilon(1e-6));
}

TEST_CASE("slope of the planar n = 1 defect") {
  PlaneChart disk(Domain::disk(Vec2(0, 0), 1.0));
  auto radial = make_field("w1", "w2");
  SweepSchedule sched{1e-2, 1e-4, 9, 1.5};
  auto sweep = divergence_slope(radial, disk, Vec2(0, 0), sched, 2 * M_PI);
  CHECK(sweep.slope == doctest::Approx(2 * M_PI).epsilon(0.02));
  CHECK(sweep.meets_lower_bound);
  // monotone nonincreasing in eps
  for (size_t k = 1; k < sweep.energy.size(); ++k) CHECK(sweep.energy[k] >= sweep.energy[k - 1]);
}

TEST_CASE("slope of the planar director n = 1/2 defect") {
  PlaneChart disk(Domain::disk(Vec2(0, 0), 1.0));
  auto half = TangentField(Expression::parse("cos(atan2(w2, w1)/2)", kW),
                           Expression::parse("sin(atan2(w2, w1)/2)", kW), FieldMode::director);
  SweepSchedule sched{1e-2, 1e-4, 9, 1.5};
  auto sweep = divergence_slope(half, disk, Vec2(0, 0), sched, M_PI / 2);
  CHECK(sweep.slope == doctest::Approx(M_PI / 2).epsilon(0.02));
  CHECK(sweep.meets_lower_bound);
}

TEST_CASE("boundary defect on a wedge of angle pi") {
  // conic director data along the straight edge: angle = polar angle,
  // boundary strength 1/2; lemma rate 4 pi^2 n^2 / wedge = pi
  PlaneChart half(Domain::rectangle(Vec2(-1, 0), Vec2(1, 1)));
  auto field = make_field("w1", "w2");
  SweepSchedule sched{1e-2, 1e-4, 9, 0.9};
  double lemma = 4 * M_PI * M_PI * 0.25 / M_PI;  // = pi
  auto sweep = divergence_slope(field, half, Vec2(0, 0), sched, lemma);
  CHECK(sweep.slope == doctest::Approx(M_PI).epsilon(0.05));
  CHECK(sweep.meets_lower_bound);
}

TEST_CASE("quadrature failure is reported") {
  PlaneChart disk(Domain::disk(Vec2(0, 0), 1.0));
  auto radial = make_field("w1", "w2");
  EnergyOptions bad;
  bad.radial_per_decade = 1;
  bad.radial_order = 2;
  bad.angular_panels = 1;
  bad.angular_order = 2;
  bad.background_cells = 2;
  bad.background_depth = 0;
  CHECK_THROWS_AS(dirichlet_energy(radial, disk, {{Vec2(0, 0), 1e-4, 1.5}}, bad), Error);
}

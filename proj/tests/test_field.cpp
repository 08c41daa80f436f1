#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "defectscope/errors.hpp"
#include "defectscope/field.hpp"

using namespace defectscope;

namespace {

const std::vector<std::string> kW = {"w1", "w2"};

TangentField make_field(const std::string& a1, const std::string& a2,
                        FieldMode mode = FieldMode::vector) {
  return TangentField(Expression::parse(a1, kW), Expression::parse(a2, kW), mode);
}

std::unique_ptr<PlaneChart> square_chart() {
  return std::make_unique<PlaneChart>(Domain::rectangle(Vec2(-1, -1), Vec2(1, 1)));
}

}  // namespace

TEST_CASE("locate zeros: identity field") {
  auto chart = square_chart();
  auto zs = locate_zeros(make_field("w1", "w2"), *chart);
  REQUIRE(zs.size() == 1);
  CHECK(zs[0].point.norm() < 1e-10);
  CHECK_FALSE(zs[0].boundary);
}

TEST_CASE("locate zeros: constant field has none") {
  auto chart = square_chart();
  CHECK(locate_zeros(make_field("1", "0"), *chart).empty());
}

TEST_CASE("locate zeros: double zero of z^2") {
  auto chart = square_chart();
  auto zs = locate_zeros(make_field("w1^2 - w2^2", "2*w1*w2"), *chart);
  REQUIRE(zs.size() == 1);
  CHECK(zs[0].point.norm() < 1e-7);
}

TEST_CASE("locate zeros: three zeros of a cubic") {
  auto chart = square_chart();
  // (z - 0.5)(z + 0.5)(z - 0.4i): zeros at +-0.5 and 0.4i
  // p(z) = z^3 - 0.4i z^2 - 0.25 z + 0.1 i
  auto zs = locate_zeros(make_field("w1^3 - 3*w1*w2^2 + 0.8*w1*w2 - 0.25*w1",
                                    "3*w1^2*w2 - w2^3 - 0.4*(w1^2 - w2^2) - 0.25*w2 + 0.1"),
                         *chart);
  REQUIRE(zs.size() == 3);
}

TEST_CASE("locate zeros: boundary zero classified") {
  auto chart = square_chart();
  auto zs = locate_zeros(make_field("w1 - 1", "w2"), *chart);
  REQUIRE(zs.size() == 1);
  CHECK(zs[0].boundary);
}

TEST_CASE("zero separation errors") {
  auto chart = square_chart();
  CHECK_THROWS_AS(locate_zeros(make_field("w1^2 - 0.000001", "w2"), *chart), Error);
  // a1 = w1, a2 = 0 vanishes along the whole line w1 = 0
  CHECK_THROWS_AS(locate_zeros(make_field("w1", "0"), *chart), Error);
}

TEST_CASE("index around simple zeros") {
  auto f1 = make_field("w1", "w2");
  auto r = index_around(f1, circle_loop(Vec2(0, 0), 1.0));
  CHECK(r.snapped == Rational(1));
  CHECK(r.snap_distance < 1e-9);

  auto f2 = make_field("w1^2 - w2^2", "2*w1*w2");
  auto r2 = index_around(f2, circle_loop(Vec2(0, 0), 1.0));
  CHECK(r2.snapped == Rational(2));
  CHECK(r2.snap_distance < 1e-9);

  // no zero enclosed
  auto r0 = index_around(f1, circle_loop(Vec2(0.7, 0.7), 0.1));
  CHECK(r0.snapped == Rational(0));
}

TEST_CASE("director half winding") {
  // director with planar angle theta/2
  auto f = TangentField(Expression::parse("cos(atan2(w2, w1)/2)", kW),
                        Expression::parse("sin(atan2(w2, w1)/2)", kW), FieldMode::director);
  auto r = index_around(f, circle_loop(Vec2(0, 0), 1.0));
  CHECK(r.snapped == Rational(1, 2));
  CHECK(r.snap_distance < 1e-9);
}

TEST_CASE("vector-mode snapping is exact to 1e-3 and loop-radius invariant") {
  auto f = make_field("w1^2 - w2^2", "2*w1*w2");
  auto big = index_around(f, circle_loop(Vec2(0, 0), 0.9));
  auto small = index_around(f, circle_loop(Vec2(0, 0), 0.9 / 50.0));
  CHECK(big.snapped == small.snapped);
  CHECK(big.snap_distance < 1e-3);
  CHECK(small.snap_distance < 1e-3);
}

TEST_CASE("index additivity over multiple zeros") {
  // zeros at -0.5, +0.5, 0.4i each of index +1
  auto f = make_field("w1^3 - 3*w1*w2^2 + 0.8*w1*w2 - 0.25*w1",
                      "3*w1^2*w2 - w2^3 - 0.4*(w1^2 - w2^2) - 0.25*w2 + 0.1");
  auto all = index_around(f, circle_loop(Vec2(0, 0), 0.95));
  CHECK(all.snapped == Rational(3));
  auto one = index_around(f, circle_loop(Vec2(0.5, 0), 0.15));
  CHECK(one.snapped == Rational(1));
  auto two = index_around(f, circle_loop(Vec2(-0.5, 0), 0.15));
  auto three = index_around(f, circle_loop(Vec2(0, 0.4), 0.15));
  CHECK(one.raw + two.raw + three.raw == doctest::Approx(all.raw).epsilon(1e-8));
}

TEST_CASE("reversed loop negates the index") {
  auto f = make_field("w1", "w2");
  auto fwd = circle_loop(Vec2(0, 0), 0.5);
  auto rev = [&](double t) { return fwd(1.0 - t); };
  CHECK(index_around(f, rev).snapped == Rational(-1));
}

TEST_CASE("unresolved winding through a zero") {
  auto f = make_field("w1", "w2");
  // circle passing exactly through the origin zero
  CHECK_THROWS_AS(index_around(f, circle_loop(Vec2(0.5, 0), 0.5)), Error);
}

TEST_CASE("boundary arc winding (no snapping)") {
  Domain dom = Domain::rectangle(Vec2(0, -1), Vec2(1, 1));
  // half-plane edge point: wedge pi at (0,0)
  BoundaryArc arc = boundary_arc(dom, Vec2(0, 0), 0.3);
  CHECK(arc.angle_out - arc.angle_in == doctest::Approx(M_PI).epsilon(1e-6));
  // field with angle = polar angle: along the half-circle the angle advances pi
  auto f = make_field("w1", "w2");
  auto r = winding_along(f, arc.curve, /*closed=*/false);
  CHECK(r.raw == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("boundary defect strength convention") {
  CHECK(boundary_defect_strength(2 * M_PI / 3, 0.5) == doctest::Approx(1.0 / 6));
  CHECK(boundary_defect_strength(M_PI / 3, 0.0) == doctest::Approx(-1.0 / 6));
  CHECK(boundary_defect_strength(0.0, 0.5) == doctest::Approx(0.5));
  CHECK(boundary_defect_strength(Rational(2, 3), Rational(1, 2)) == Rational(1, 6));
  CHECK(boundary_defect_strength(Rational(1, 3), Rational(0)) == Rational(-1, 6));
}

TEST_CASE("frame-corrected index at a sphere pole") {
  SphereChart sph(Domain::rectangle(Vec2(0, 0), Vec2(M_PI, 2 * M_PI)), 1.0);
  // meridian field: components constant, all winding comes from the frame
  auto f = make_field("1", "0");
  double eps = 1e-2;
  // positively oriented loop around the north-pole cap region {w1 < eps}
  auto north = [&](double t) { return Vec2(eps, 2 * M_PI * t); };
  auto rn = winding_along(f, north, /*closed=*/true, /*frame_corrected=*/true, &sph);
  CHECK(rn.snapped == Rational(1));
  CHECK(rn.snap_distance < 1e-3);
  // south-pole cap {w1 > pi - eps}: boundary traversed with the region on the left
  auto south = [&](double t) { return Vec2(M_PI - eps, 2 * M_PI * (1.0 - t)); };
  auto rs = winding_along(f, south, /*closed=*/true, /*frame_corrected=*/true, &sph);
  CHECK(rs.snapped == Rational(1));
}

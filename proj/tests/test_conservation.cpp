#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "defectscope/conservation.hpp"
#include "defectscope/errors.hpp"

using namespace defectscope;

namespace {

const std::vector<std::string> kW = {"w1", "w2"};

TangentField make_field(const std::string& a1, const std::string& a2,
                        FieldMode mode = FieldMode::vector) {
  return TangentField(Expression::parse(a1, kW), Expression::parse(a2, kW), mode);
}

std::vector<BoundarySegment> polygon_segments(const std::vector<Vec2>& verts) {
  std::vector<BoundarySegment> segs;
  for (size_t i = 0; i < verts.size(); ++i)
    segs.push_back(BoundarySegment::line(verts[i], verts[(i + 1) % verts.size()]));
  return segs;
}

}  // namespace

TEST_CASE("euler characteristic") {
  CHECK(euler_characteristic({0, 1, std::nullopt}) == 1);   // disk
  CHECK(euler_characteristic({0, 0, std::nullopt}) == 2);   // sphere
  CHECK(euler_characteristic({0, 2, std::nullopt}) == 0);   // annulus
  CHECK(euler_characteristic({1, 0, std::nullopt}) == 0);   // torus
  TopologyDescriptor tet{0, 0, std::array<long long, 3>{4, 6, 4}};
  CHECK(euler_characteristic(tet) == 2);
  TopologyDescriptor bad{0, 1, std::array<long long, 3>{4, 6, 4}};
  CHECK_THROWS_AS(euler_characteristic(bad), Error);
}

TEST_CASE("boundary angle integral on the unit circle") {
  PlaneChart chart(Domain::disk(Vec2(0, 0), 1.0));
  BoundaryComponent circle(&chart, {BoundarySegment::arc(Vec2(0, 0), 1.0, 0.0, 2 * M_PI)});

  // theta is the angle from u to gamma'. For constant u the tangent turns 2 pi.
  auto constant = make_field("1", "0");
  CHECK(boundary_angle_integral(constant, chart, circle) ==
        doctest::Approx(2 * M_PI).epsilon(1e-9));

  // radial field keeps a constant angle to the tangent
  auto radial = make_field("w1", "w2");
  CHECK(boundary_angle_integral(radial, chart, circle) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("conservation on the disk") {
  PlaneChart chart(Domain::disk(Vec2(0, 0), 1.0));
  std::vector<BoundaryComponent> comps;
  comps.emplace_back(&chart, std::vector<BoundarySegment>{
                                 BoundarySegment::arc(Vec2(0, 0), 1.0, 0.0, 2 * M_PI)});

  auto radial = make_field("w1", "w2");
  auto rep = conservation_residual(chart, comps, radial, 1.0);
  REQUIRE(rep.interior.size() == 1);
  CHECK(rep.interior[0].snapped == Rational(1));
  CHECK(std::fabs(rep.residual_presnap) < 1e-3);
  CHECK(std::fabs(rep.residual) < 1e-9);

  auto dbl = make_field("w1^2 - w2^2", "2*w1*w2");
  auto rep2 = conservation_residual(chart, comps, dbl, 1.0);
  REQUIRE(rep2.interior.size() == 1);
  CHECK(rep2.interior[0].snapped == Rational(2));
  CHECK(std::fabs(rep2.residual) < 1e-9);
}

TEST_CASE("conservation on polygons with a constant field") {
  for (int n : {3, 4, 6}) {
    std::vector<Vec2> verts;
    for (int k = 0; k < n; ++k) {
      double a = 2 * M_PI * k / n;
      verts.push_back(Vec2(std::cos(a), std::sin(a)));
    }
    PlaneChart chart(Domain::polygon(verts));
    std::vector<BoundaryComponent> comps;
    comps.emplace_back(&chart, polygon_segments(verts));
    auto field = make_field("1", "0");
    auto rep = conservation_residual(chart, comps, field, 1.0);
    CHECK(rep.interior.empty());
    CHECK(rep.tau_sum == doctest::Approx(2 * M_PI).epsilon(1e-12));
    CHECK(std::fabs(rep.residual) < 1e-9);
    // per-edge angle integrals sum to -(2 pi - sum tau) for constant fields
    CHECK(rep.theta_integral == doctest::Approx(-(2 * M_PI - rep.tau_sum)).epsilon(1e-9));
  }
}

TEST_CASE("conservation on the annulus (chi = 0)") {
  // polar chart of the plane annulus 1 <= rho <= 2
  ExpressionChart chart(Domain::rectangle(Vec2(1, 0), Vec2(2, 2 * M_PI)),
                        Expression::parse("w1*cos(w2)", kW), Expression::parse("w1*sin(w2)", kW),
                        Expression::parse("0", kW));
  std::vector<BoundaryComponent> comps;
  comps.emplace_back(&chart, std::vector<BoundarySegment>{
                                 BoundarySegment::line(Vec2(2, 0), Vec2(2, 2 * M_PI))});
  comps.emplace_back(&chart, std::vector<BoundarySegment>{
                                 BoundarySegment::line(Vec2(1, 2 * M_PI), Vec2(1, 0))});
  auto field = make_field("0", "1");  // e_phi, no zeros, matching windings
  auto rep = conservation_residual(chart, comps, field, 0.0);
  CHECK(rep.interior.empty());
  CHECK(rep.boundary.empty());
  CHECK(std::fabs(rep.residual) < 1e-9);
}

TEST_CASE("conservation on the sphere with two +1 poles") {
  SphereChart sphere(Domain::rectangle(Vec2(0, 0), Vec2(M_PI, 2 * M_PI)), 1.0);
  sphere.set_degenerate_sites({DegenerateSite{Vec2(0, M_PI), DegenerateSite::Edge::w1_min},
                               DegenerateSite{Vec2(M_PI, M_PI), DegenerateSite::Edge::w1_max}});
  for (const char* comp1 : {"1", "0"}) {
    auto field = comp1 == std::string("1") ? make_field("1", "0") : make_field("0", "1");
    auto rep = conservation_residual(sphere, {}, field, 2.0);
    REQUIRE(rep.degenerate.size() == 2);
    CHECK(rep.degenerate[0].snapped == Rational(1));
    CHECK(rep.degenerate[1].snapped == Rational(1));
    CHECK(std::fabs(rep.residual) < 1e-9);
    CHECK(std::fabs(rep.residual_presnap) < 1e-3);
  }
}

TEST_CASE("conservation on the spherical cap with a pole defect") {
  double th0 = 1.0;
  SphereChart cap(Domain::rectangle(Vec2(0, 0), Vec2(th0, 2 * M_PI)), 1.0);
  cap.set_degenerate_sites({DegenerateSite{Vec2(0, M_PI), DegenerateSite::Edge::w1_min}});
  std::vector<BoundaryComponent> comps;
  comps.emplace_back(&cap, std::vector<BoundarySegment>{
                               BoundarySegment::line(Vec2(th0, 0), Vec2(th0, 2 * M_PI))});
  auto field = make_field("1", "0");
  auto rep = conservation_residual(cap, comps, field, 1.0);
  REQUIRE(rep.degenerate.size() == 1);
  CHECK(rep.degenerate[0].snapped == Rational(1));
  CHECK(std::fabs(rep.residual) < 1e-9);
}

TEST_CASE("conservation with a boundary defect (wedge pi)") {
  // square with a radial half-defect at the middle of the bottom edge
  PlaneChart chart(Domain::polygon({{-1, 0}, {1, 0}, {1, 2}, {-1, 2}}));
  std::vector<BoundaryComponent> comps;
  comps.emplace_back(&chart, polygon_segments({{-1, 0}, {1, 0}, {1, 2}, {-1, 2}}));
  auto field = make_field("w1", "w2");
  auto rep = conservation_residual(chart, comps, field, 1.0);
  CHECK(rep.interior.empty());
  REQUIRE(rep.boundary.size() == 1);
  CHECK(rep.boundary[0].arc_index == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(rep.boundary[0].wedge_angle == doctest::Approx(M_PI).epsilon(1e-5));
  CHECK(std::fabs(rep.residual) < 1e-6);
}

TEST_CASE("simple domain law on subdomains") {
  PlaneChart chart(Domain::rectangle(Vec2(-2, -2), Vec2(2, 2)));
  auto field = make_field("w1", "w2");
  // loop enclosing the zero
  CHECK(std::fabs(simple_domain_residual(chart, field, circle_loop(Vec2(0, 0), 1.0))) < 1e-3);
  // loop not enclosing it
  CHECK(std::fabs(simple_domain_residual(chart, field, circle_loop(Vec2(1.2, 0.9), 0.5))) < 1e-3);

  // curved chart: spherical patch with a constant-component field
  SphereChart sphere(Domain::rectangle(Vec2(0.2, 0), Vec2(2.8, 2 * M_PI)), 1.0);
  auto cf = make_field("1", "0");
  CHECK(std::fabs(simple_domain_residual(sphere, cf, circle_loop(Vec2(1.2, 3.0), 0.5))) < 1e-3);
}

TEST_CASE("inconsistent chi is reported") {
  PlaneChart chart(Domain::disk(Vec2(0, 0), 1.0));
  std::vector<BoundaryComponent> comps;
  comps.emplace_back(&chart, std::vector<BoundarySegment>{
                                 BoundarySegment::arc(Vec2(0, 0), 1.0, 0.0, 2 * M_PI)});
  auto radial = make_field("w1", "w2");
  auto rep = conservation_residual(chart, comps, radial, 2.0);  // wrong chi
  CHECK(std::fabs(rep.residual - 1.0) < 1e-9);
}

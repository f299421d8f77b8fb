#include <catch2/catch_amalgamated.hpp>

#include "ck/cylinder.hpp"
#include "testutil.hpp"

using namespace ck;
using cktest::Rng;

namespace {

CylinderPoint random_cyl(Rng& rng, double mindist = 0.05) {
  for (;;) {
    CirclePoint x = cktest::random_point(rng), y = cktest::random_point(rng);
    if (circle_dist(x, y) > mindist) return {x, y};
  }
}

struct ConstField final : ScalarField2 {
  double c;
  explicit ConstField(double v) : c(v) {}
  LogJet2 eval(double, double) const override { return {c, 0, 0, 0, 0, 0}; }
};

// smooth closed-form test field with exact jets
struct WaveField final : ScalarField2 {
  double amp;
  explicit WaveField(double a) : amp(a) {}
  LogJet2 eval(double x, double y) const override {
    double cx = std::cos(2 * kPi * x), sx = std::sin(2 * kPi * x);
    double cy = std::cos(2 * kPi * y), sy = std::sin(2 * kPi * y);
    LogJet2 j;
    double w = 2 * kPi;
    j.L = amp * sx * cy;
    j.Lx = amp * w * cx * cy;
    j.Ly = -amp * w * sx * sy;
    j.Lxx = -amp * w * w * sx * cy;
    j.Lyy = -amp * w * w * sx * cy;
    j.Lxy = -amp * w * w * cx * sy;
    return j;
  }
};

}  // namespace

TEST_CASE("standard form: Moebius invariance") {
  auto w0 = make_standard_form();
  Rng rng(101);
  for (int i = 0; i < 200; ++i) {
    MoebiusMap g = cktest::random_moebius(rng);
    CylinderPoint p = random_cyl(rng);
    double r = invariance_residual(*w0, make_moebius(g), p);
    CHECK(std::fabs(r) <= 1e-10);
  }
  double r = invariance_residual(*w0, make_rotation(0.3), random_cyl(rng));
  CHECK(std::fabs(r) <= 1e-10);
}

TEST_CASE("parabolic family preserves its form") {
  for (int n : {1, 3, 5}) {
    auto wn = make_parabolic_form(n);
    DiffeoExpr f = make_parabolic_family(n);
    Rng rng(200 + n);
    int done = 0;
    while (done < 100) {
      CylinderPoint p = random_cyl(rng);
      if (std::fabs(p.x.t - 0.5) < 0.05 || std::fabs(p.y.t - 0.5) < 0.05) continue;
      if (circle_dist(p.x, CirclePoint(0.75)) < 0.05 ||
          circle_dist(p.y, CirclePoint(0.75)) < 0.05)
        continue;
      CirclePoint fx = diffeo_point(f, p.x), fy = diffeo_point(f, p.y);
      if (std::fabs(fx.t - 0.5) < 0.05 || std::fabs(fy.t - 0.5) < 0.05) continue;
      double r = invariance_residual(*wn, f, p);
      CHECK(std::fabs(r) <= 1e-9);
      ++done;
    }
  }
  DiffeoExpr f1 = make_parabolic_family(1);
  MoebiusMap m(1, 0, 1, 1);
  for (int i = 0; i < 64; ++i) {
    double t = (i + 0.5) / 64.0;
    CHECK(circle_dist(CirclePoint(diffeo_apply(f1, t)),
                      moebius_apply(m, CirclePoint(t))) <= 1e-10);
  }
}

TEST_CASE("pullback identity is definitional") {
  auto w0 = make_standard_form();
  Rng rng(321);
  DiffeoExpr f = make_compose(make_bump(Arc(CirclePoint(0.2), CirclePoint(0.4)), 0.02),
                              make_moebius(cktest::random_moebius(rng)));
  auto pb = make_pullback_form(w0, f);
  for (int i = 0; i < 50; ++i) {
    CylinderPoint p = random_cyl(rng);
    Jet3 jx = diffeo_jet3_raw(f, p.x.t), jy = diffeo_jet3_raw(f, p.y.t);
    if (circle_dist(CirclePoint(jx.f), CirclePoint(jy.f)) < 0.02) continue;
    double lhs = pb->log_density(p.x.t, p.y.t);
    double rhs = w0->log_density(jx.f, jy.f) + std::log(jx.d1) + std::log(jy.d1);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
  }
}

TEST_CASE("curvature of the standard form is constant -1") {
  auto w0 = make_standard_form();
  Rng rng(7);
  double mn = 1e9, mx = -1e9;
  for (int i = 0; i < 100; ++i) {
    double k = curvature(*w0, random_cyl(rng));
    mn = std::min(mn, k);
    mx = std::max(mx, k);
  }
  CHECK(std::fabs(std::fabs(0.5 * (mn + mx)) - 1.0) <= 1e-8);
  CHECK(mx - mn <= 1e-8);
  CHECK(mn < 0.0);  // recorded sign of the convention
}

TEST_CASE("curvature scaling and isometry invariance") {
  auto w0 = make_standard_form();
  double c = 0.7;
  auto scaled = make_scaled_form(w0, std::make_shared<ConstField>(c));
  Rng rng(8);
  CylinderPoint p = random_cyl(rng);
  CHECK(curvature(*scaled, p) == Catch::Approx(curvature(*w0, p) / std::exp(c)));
  MoebiusMap g = cktest::random_moebius(rng);
  auto pb = make_pullback_form(w0, make_moebius(g));
  for (int i = 0; i < 20; ++i) {
    CylinderPoint q = random_cyl(rng);
    CHECK(curvature(*pb, q) == Catch::Approx(-1.0).margin(1e-9));
  }
  DiffeoExpr f = make_compose(make_bump(Arc(CirclePoint(0.3), CirclePoint(0.5)), 0.02),
                              make_moebius(g));
  auto wave = make_scaled_form(w0, std::make_shared<WaveField>(0.15));
  auto pb2 = make_pullback_form(wave, f);
  for (int i = 0; i < 20; ++i) {
    CylinderPoint q = random_cyl(rng);
    CirclePoint fx = diffeo_point(f, q.x), fy = diffeo_point(f, q.y);
    if (circle_dist(fx, fy) < 0.03) continue;
    double lhs = curvature(*pb2, q);
    double rhs = curvature(*wave, CylinderPoint(fx, fy));
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-6));
  }
}

TEST_CASE("horizontal geodesic of the standard form is projective") {
  auto w0 = make_standard_form();
  ChartValue out = geodesic_horizontal(*w0, CirclePoint(0.0), ChartValue(1.0), 1.0, 0.5);
  REQUIRE(!out.inf);
  CHECK(out.v == Catch::Approx(2.0).margin(1e-8));
  for (double t : {0.1, 0.3, 0.7, 0.9, 0.99}) {
    ChartValue x = geodesic_horizontal(*w0, CirclePoint(0.0), ChartValue(1.0), 1.0, t);
    double expect = 1.0 / (1.0 - t);
    REQUIRE(!x.inf);
    CHECK(x.v == Catch::Approx(expect).epsilon(1e-8));
  }
  // past the chart blowup the trajectory re-enters from the other end
  ChartValue far = geodesic_horizontal(*w0, CirclePoint(0.0), ChartValue(1.0), 1.0, 1.5);
  CHECK(far.v == Catch::Approx(1.0 / (1.0 - 1.5)).epsilon(1e-7));
  ChartValue zero = geodesic_horizontal(*w0, CirclePoint(0.0), ChartValue(1.0), 1.0, 0.0);
  CHECK(zero.v == Catch::Approx(1.0));
  ChartValue fwd = geodesic_horizontal(*w0, CirclePoint(0.3), ChartValue(0.5), -0.8, 0.4);
  ChartValue bwd = geodesic_horizontal(*w0, CirclePoint(0.3), ChartValue(0.5), 0.8, -0.4);
  CHECK(fwd.v == Catch::Approx(bwd.v).margin(1e-9));
}

TEST_CASE("holonomy Schwarzian vanishes for the standard form") {
  auto w0 = make_standard_form();
  Rng rng(31);
  for (int i = 0; i < 10; ++i) {
    CylinderPoint p = random_cyl(rng, 0.15);
    double s = holonomy_schwarzian(*w0, p, 0.3);
    CHECK(std::fabs(s) <= 1e-5);
    CHECK(holonomy_schwarzian(*w0, p, 0.0) == 0.0);
  }
}

TEST_CASE("holonomy Schwarzian stencil agrees with the closed-form route") {
  auto w0 = make_standard_form();
  auto wave = make_scaled_form(w0, std::make_shared<WaveField>(0.2));
  Rng rng(33);
  for (int i = 0; i < 8; ++i) {
    CylinderPoint p = random_cyl(rng, 0.2);
    double t = 0.25;
    double a = holonomy_schwarzian(*wave, p, t);
    double b = holonomy_schwarzian_closed(*wave, p, t);
    CHECK(a == Catch::Approx(b).margin(2e-3));
  }
  // non-constant curvature shows up as a nonzero holonomy Schwarzian,
  // stable under stencil refinement to two digits
  CylinderPoint q(0.1, 0.62);
  double s1 = holonomy_schwarzian(*wave, q, 0.25, 0.02);
  double s2 = holonomy_schwarzian(*wave, q, 0.25, 0.01);
  CHECK(std::fabs(s1) > 1e-3);
  CHECK(s1 == Catch::Approx(s2).epsilon(0.02));
}

TEST_CASE("triple metric values and symmetry") {
  auto w0 = make_standard_form();
  TripleMetric h = triple_metric(*w0, unchart(0.0), unchart(1.0), unchart(2.0));
  CHECK(h.hxx == Catch::Approx(1.0).epsilon(1e-10));
  CHECK(h.hyy == Catch::Approx(16.0).epsilon(1e-10));
  CHECK(h.hzz == Catch::Approx(1.0).epsilon(1e-10));
  // cyclic symmetry holds for the angle-coordinate coefficients: transport
  // the chart coefficients with the chart Jacobians
  CirclePoint sx(0.1), sy(0.1 + 1.0 / 3), sz(0.1 + 2.0 / 3);
  TripleMetric s = triple_metric(*w0, sx, sy, sz);
  auto cp2 = [](CirclePoint p) {
    double c = std::tan(kPi * p.t);
    double d = kPi * (1.0 + c * c);
    return d * d;
  };
  double ax = s.hxx * cp2(sx), ay = s.hyy * cp2(sy), az = s.hzz * cp2(sz);
  CHECK(ax == Catch::Approx(ay).epsilon(1e-10));
  CHECK(ay == Catch::Approx(az).epsilon(1e-10));
}

TEST_CASE("triple metric is a Moebius isometry for the standard form") {
  auto w0 = make_standard_form();
  Rng rng(37);
  int done = 0;
  while (done < 100) {
    CirclePoint x = cktest::random_point(rng), y = cktest::random_point(rng),
                z = cktest::random_point(rng);
    if (circle_dist(x, y) < 0.05 || circle_dist(y, z) < 0.05 || circle_dist(x, z) < 0.05)
      continue;
    MoebiusMap g = cktest::random_moebius(rng);
    CirclePoint gx = moebius_apply(g, x), gy = moebius_apply(g, y),
                gz = moebius_apply(g, z);
    auto bad = [](CirclePoint p) { return std::fabs(p.t - 0.5) < 0.02; };
    if (bad(x) || bad(y) || bad(z) || bad(gx) || bad(gy) || bad(gz)) continue;
    TripleMetric h0 = triple_metric(*w0, x, y, z);
    TripleMetric h1 = triple_metric(*w0, gx, gy, gz);
    auto dchart = [&](CirclePoint p) {
      double v = std::tan(kPi * p.t);
      double num = g.c * v + g.d;
      return 1.0 / (num * num);
    };
    double rx = h1.hxx * dchart(x) * dchart(x) / h0.hxx - 1.0;
    double ry = h1.hyy * dchart(y) * dchart(y) / h0.hyy - 1.0;
    double rz = h1.hzz * dchart(z) * dchart(z) / h0.hzz - 1.0;
    CHECK(std::fabs(rx) <= 1e-10);
    CHECK(std::fabs(ry) <= 1e-10);
    CHECK(std::fabs(rz) <= 1e-10);
    ++done;
  }
}

TEST_CASE("elliptic conjugacy recovers rotations") {
  auto w0 = make_standard_form();
  auto c1 = elliptic_conjugacy(make_rotation(0.3), *w0);
  CHECK(c1.alpha == Catch::Approx(0.3).margin(1e-8));
  CHECK(c1.residual <= 1e-8);
  Rng rng(41);
  MoebiusMap h = cktest::random_moebius(rng);
  MoebiusMap g = h * MoebiusMap::rotation(0.29) * h.inverse();
  auto c2 = elliptic_conjugacy(make_moebius(g), *w0);
  double rho = rotation_number(make_moebius(g), 400000);
  CHECK(circle_dist(CirclePoint(c2.alpha), CirclePoint(rho)) <= 1e-5);
  CHECK(c2.residual <= 1e-6);
  // constructed case: f = h R h^{-1}, omega the matching pullback form
  DiffeoExpr hb = make_compose(make_bump(Arc(CirclePoint(0.55), CirclePoint(0.75)), 0.03),
                               make_moebius(h));
  DiffeoExpr f = make_conjugate(hb, make_rotation(0.29));
  auto omega = make_pullback_form(w0, make_inverse(hb));
  auto c3 = elliptic_conjugacy(f, *omega);
  CHECK(circle_dist(CirclePoint(c3.alpha), CirclePoint(0.29)) <= 1e-5);
  CHECK(c3.residual <= 1e-6);
  CHECK_THROWS_AS(elliptic_conjugacy(make_moebius(MoebiusMap(2, 0, 0, 0.5)), *w0),
                  HasFixedPoint);
  auto wave = make_scaled_form(w0, std::make_shared<WaveField>(0.2));
  CHECK_THROWS_AS(elliptic_conjugacy(make_rotation(0.3), *wave), NotInvariant);
}

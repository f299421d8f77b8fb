#pragma once

// Lorentz geometry of omega dx dy on the cylinder: curvature, isotropic
// geodesics, holonomy between horizontal circles and its Schwarzian, the
// triple-space metric, and the fixed-point-free conjugacy to a rotation.

#include <cmath>
#include <utility>
#include <vector>

#include "ck/diffeo_ops.hpp"
#include "ck/ode.hpp"
#include "ck/volume.hpp"

namespace ck {

// Lorentz curvature K = (2/omega) d^2 log omega / dx dy, coordinate-free.
inline double curvature(const VolumeForm& omega, const CylinderPoint& p) {
  LogJet2 j = omega.log_jet(p.x.t, p.y.t);
  if (auto* njf = dynamic_cast<const detail::NumericJetForm*>(&omega)) {
    if (njf->last_fd_disagreement() > 1e-3)
      throw FiniteDifferenceUnreliable();
  }
  return 2.0 * std::exp(-j.L) * j.Lxy;
}

// ------------------------------------------------------------- geodesics

// Horizontal isotropic geodesic through height y: x'' + Lx(x,y) x'^2 = 0.
// Input/output in chart coordinates; integration runs in angle coordinates,
// which re-charts through the pole automatically.
inline ChartValue geodesic_horizontal(const VolumeForm& omega, CirclePoint y,
                                      ChartValue x0, double v0, double t,
                                      OdeOptions opt = {}) {
  if (x0.inf) throw Error("geodesic_horizontal needs a finite chart start");
  if (v0 == 0.0) throw Error("geodesic_horizontal needs nonzero initial speed");
  CirclePoint u0 = unchart(x0);
  if (same_point(u0, y)) throw NearDiagonal();
  double cp = kPi * (1.0 + x0.v * x0.v);  // dc/dt at u0
  OdeState<2> s{u0.t, v0 / cp};
  auto rhs = [&](double, const OdeState<2>& st) -> OdeState<2> {
    double lx = omega.log_jet(wrap01(st[0]), y.t).Lx;
    return {st[1], -lx * st[1] * st[1]};
  };
  bool crossed = false;
  std::function<void(double, const OdeState<2>&)> obs =
      [&](double, const OdeState<2>& st) {
        if (circle_dist(CirclePoint(st[0]), y) <= 4.0 * kEpsPoint) crossed = true;
      };
  OdeState<2> out = ode_integrate<2>(rhs, s, 0.0, t, opt, &obs);
  if (crossed) throw PoleCrossing("geodesic reached the puncture");
  return chart(CirclePoint(out[0]));
}

// Vertical isotropic geodesic through (x, y) with unit initial angle speed.
inline CirclePoint geodesic_vertical_height(const VolumeForm& omega, CylinderPoint p,
                                            double t, OdeOptions opt = {}) {
  OdeState<2> s{p.y.t, 1.0};
  auto rhs = [&](double, const OdeState<2>& st) -> OdeState<2> {
    double ly = omega.log_jet(p.x.t, wrap01(st[0])).Ly;
    return {st[1], -ly * st[1] * st[1]};
  };
  bool crossed = false;
  std::function<void(double, const OdeState<2>&)> obs =
      [&](double, const OdeState<2>& st) {
        if (circle_dist(CirclePoint(st[0]), p.x) <= 4.0 * kEpsPoint) crossed = true;
      };
  OdeState<2> out = ode_integrate<2>(rhs, s, 0.0, t, opt, &obs);
  if (crossed) throw PoleCrossing("vertical geodesic reached the puncture");
  return CirclePoint(out[0]);
}

namespace detail {

// Arc parameter of the geodesic parametrization of the horizontal circle at
// height Y, as a function of the x-angle: s' = 1/w, w' = -Lx(xi, Y) w, with
// s(x0) = 0, w(x0) = 1. Integrated in the xi variable.
inline double horizontal_arc_param(const VolumeForm& omega, double Y, double x0,
                                   double xi, const OdeOptions& opt) {
  if (xi == x0) return 0.0;
  OdeState<2> s{0.0, 1.0};
  auto rhs = [&](double u, const OdeState<2>& st) -> OdeState<2> {
    double lx = omega.log_jet(wrap01(u), Y).Lx;
    return {1.0 / st[1], -lx * st[1]};
  };
  OdeState<2> out = ode_integrate<2>(rhs, s, x0, xi, opt);
  return out[0];
}

// x-angle reached at arc parameter s from x0 along the same parametrization.
inline double horizontal_at_arc(const VolumeForm& omega, double Y, double x0,
                                double s, const OdeOptions& opt) {
  OdeState<2> st{x0, 1.0};
  auto rhs = [&](double, const OdeState<2>& q) -> OdeState<2> {
    double lx = omega.log_jet(wrap01(q[0]), Y).Lx;
    return {q[1], -lx * q[1] * q[1]};
  };
  OdeState<2> out = ode_integrate<2>(rhs, st, 0.0, s, opt);
  return out[0];
}

}  // namespace detail

// Schwarzian of the holonomy between the horizontal circles through p and
// through the vertical-geodesic time-t point, both parametrized as geodesics
// with unit angle speed at the base vertical line. Five-point stencils in
// the base arc parameter at scales h, h/2, h/4, combined by Richardson
// extrapolation (the raw stencil converges only at second order and the
// holonomy can have a nearby pole in the arc parameter).
inline double holonomy_schwarzian(const VolumeForm& omega, const CylinderPoint& p,
                                  double t, double stencil = 0.02,
                                  OdeOptions opt = {}) {
  if (t == 0.0) return 0.0;
  opt.abs_tol = std::min(opt.abs_tol, 1e-15);
  opt.rel_tol = std::min(opt.rel_tol, 1e-13);
  CirclePoint Y = geodesic_vertical_height(omega, p, t, opt);
  double x0 = p.x.t, y0 = p.y.t;
  auto F = [&](double s) {
    double xi = detail::horizontal_at_arc(omega, y0, x0, s, opt);
    if (std::fabs(xi - x0) < 1e-12) throw StencilDegenerate();
    return detail::horizontal_arc_param(omega, Y.t, x0, xi, opt);
  };
  // Normalize by the Moebius map through (0,0), (h, F(h)), (-h, F(-h)): the
  // Schwarzian is invariant under this post-composition and the normalized
  // stencil is free of the cancellation the raw holonomy suffers from when
  // its pole in the arc parameter is nearby.
  double h = stencil;
  double a = F(h), b = F(-h);
  if (!(a > 0.0) || !(b < 0.0)) throw StencilDegenerate();
  double beta = -(a + b) / ((a - b) * h);
  double alpha = a * (1.0 + beta * h) / h;
  auto Minv = [&](double y) { return y / (alpha - beta * y); };
  auto S_at = [&](double hh, double G2p, double G1p, double G1m, double G2m) {
    double f1 = (-G2p + 8 * G1p - 8 * G1m + G2m) / (12 * hh);
    double f2 = (-G2p + 16 * G1p + 16 * G1m - G2m) / (12 * hh * hh);
    double f3 = (G2p - 2 * G1p + 2 * G1m - G2m) / (2 * hh * hh * hh);
    if (!(f1 > 0.0)) throw StencilDegenerate();
    double q = f2 / f1;
    return f3 / f1 - 1.5 * q * q;
  };
  double g2p = Minv(F(2 * h)), g2m = Minv(F(-2 * h));
  double ghp = Minv(F(0.5 * h)), ghm = Minv(F(-0.5 * h));
  double s1 = S_at(h, g2p, h, -h, g2m);
  double s2 = S_at(0.5 * h, h, ghp, ghm, -h);
  return (4 * s2 - s1) / 3.0;
}

// Closed-form route: the Schwarzian of a unit-speed geodesic parametrization
// of the horizontal circle at height Y is Q(x, Y) = Lxx - Lx^2/2 evaluated
// along it; the holonomy Schwarzian at the base point is the difference of Q
// at the two heights. Used as a fast cross-check of the stencil route.
inline double holonomy_schwarzian_closed(const VolumeForm& omega,
                                         const CylinderPoint& p, double t,
                                         OdeOptions opt = {}) {
  if (t == 0.0) return 0.0;
  CirclePoint Y = geodesic_vertical_height(omega, p, t, opt);
  LogJet2 a = omega.log_jet(p.x.t, Y.t);
  LogJet2 b = omega.log_jet(p.x.t, p.y.t);
  return (a.Lxx - 0.5 * a.Lx * a.Lx) - (b.Lxx - 0.5 * b.Lx * b.Lx);
}

// ------------------------------------------------ triple-space metric

struct TripleMetric {
  double hxx, hyy, hzz;
};

// Diagonal coefficients of h = (w(x,y)w(x,z)/w(y,z)) dx^2 + (cyclic), in the
// standard chart coordinates.
inline TripleMetric triple_metric(const VolumeForm& omega, CirclePoint x,
                                  CirclePoint y, CirclePoint z) {
  if (same_point(x, y) || same_point(y, z) || same_point(x, z))
    throw DegenerateTriple();
  for (CirclePoint q : {x, y, z})
    if (std::fabs(q.t - 0.5) < 1e-6)
      throw PoleCrossing("triple_metric at the chart pole");
  auto chart_density = [&](CirclePoint a, CirclePoint b) {
    double cpa = kPi * (1.0 + std::tan(kPi * a.t) * std::tan(kPi * a.t));
    double cpb = kPi * (1.0 + std::tan(kPi * b.t) * std::tan(kPi * b.t));
    return omega.density(a.t, b.t) / (cpa * cpb);
  };
  double wxy = chart_density(x, y), wxz = chart_density(x, z), wyz = chart_density(y, z);
  return {wxy * wxz / wyz, wyz * wxy / wxz, wxz * wyz / wxy};
}

// --------------------------------- fixed-point-free conjugacy to rotation

// Conjugator table: the arclength coordinate Phi(t)/T of the f-invariant
// metric m(t) = omega(t, f t) f'(t) on the circle, with cubic Hermite
// interpolation (node derivatives are exact).
struct EllipticConjugacy {
  std::vector<double> phi;    // cumulative normalized arclength at nodes
  std::vector<double> dphi;   // exact derivative sqrt(m)/T at nodes
  double total = 0.0;         // T
  double alpha = 0.0;         // rotation angle of the conjugated map
  double residual = 0.0;      // max grid deviation from an exact rotation

  int nodes() const { return int(phi.size()) - 1; }

  double eval(double t) const {
    t = wrap01(t);
    int n = nodes();
    double u = t * n;
    int i = std::min(int(u), n - 1);
    double s = u - i;
    double h = 1.0 / n;
    double p0 = phi[i], p1 = phi[i + 1], m0 = dphi[i] * h, m1 = dphi[i + 1] * h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 +
           (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
  }

  double eval_inverse(double target) const {
    target = wrap01(target);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (eval(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
};

inline EllipticConjugacy elliptic_conjugacy(const DiffeoExpr& f,
                                            const VolumeForm& omega,
                                            int nodes = 1024) {
  if (!fixed_points_diffeo(f, 512).empty()) throw HasFixedPoint();
  for (int i = 0; i < 64; ++i) {
    double t = (i + 0.3) / 64.0;
    double r = invariance_residual(omega, f, CylinderPoint(t, diffeo_apply(f, t)));
    // residual on the graph uses an off-diagonal pair; sample (t, f(t)) only
    // when separated, else skip
    if (std::fabs(r) > 1e-8) throw NotInvariant();
  }
  auto speed = [&](double t) {
    Jet3 j = diffeo_jet3_raw(f, t);
    return std::sqrt(omega.density(t, j.f) * j.d1);
  };
  EllipticConjugacy out;
  out.phi.resize(nodes + 1);
  out.dphi.resize(nodes + 1);
  double acc = 0.0;
  out.phi[0] = 0.0;
  std::vector<double> sp(nodes + 1);
  for (int i = 0; i <= nodes; ++i) sp[i] = speed(double(i) / nodes);
  for (int i = 0; i < nodes; ++i) {
    double a = double(i) / nodes, b = double(i + 1) / nodes;
    double m = speed(0.5 * (a + b));
    acc += (sp[i] + 4.0 * m + sp[i + 1]) * (b - a) / 6.0;  // Simpson
    out.phi[i + 1] = acc;
  }
  out.total = acc;
  for (int i = 0; i <= nodes; ++i) {
    out.phi[i] /= acc;
    out.dphi[i] = sp[i] / acc;
  }
  // rotation angle and conjugation residual
  double alpha_acc = 0.0;
  std::vector<double> alphas(256);
  for (int i = 0; i < 256; ++i) {
    double t = (i + 0.21) / 256.0;
    double a = wrap01(out.eval(diffeo_apply(f, t)) - out.eval(t));
    alphas[i] = a;
    alpha_acc += a;
  }
  out.alpha = alpha_acc / 256.0;
  double res = 0.0;
  for (double a : alphas) res = std::max(res, circle_dist(CirclePoint(a), CirclePoint(out.alpha)));
  out.residual = res;
  return out;
}

}  // namespace ck

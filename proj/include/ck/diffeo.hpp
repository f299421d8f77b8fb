#pragma once

// Circle diffeomorphisms as expression trees with exact order-3 jets in the
// angle coordinate: Moebius elements, rotations, the parabolic family
// x -> x (1+x^n)^(-1/n), the log-pathological one-fixed-point map, smooth
// bumps, composition and inversion.

#include <cmath>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "ck/circle.hpp"
#include "ck/jet.hpp"
#include "ck/moebius.hpp"

namespace ck {

struct DiffeoNode;
using DiffeoExpr = std::shared_ptr<const DiffeoNode>;

enum class BumpProfile {
  Mound,  // exp(-1/(1-u^2)): positive displacement hump
  Tilt,   // u exp(-1/(1-u^2)): zero displacement at center, nonzero slope
};

struct DiffeoNode {
  enum class Kind {
    Moebius,
    Rotation,
    ParabolicFamily,
    LogPathological,
    Bump,
    Compose,
    Inverse,
  } kind;

  MoebiusMap mob;            // Moebius
  double theta = 0.0;        // Rotation
  int n = 1;                 // ParabolicFamily (odd, >= 1)
  Arc support;               // Bump
  double amplitude = 0.0;    // Bump (angle units)
  BumpProfile profile = BumpProfile::Mound;
  DiffeoExpr lhs, rhs;       // Compose(lhs, rhs) = lhs after rhs; Inverse(lhs)
};

namespace detail {

inline DiffeoExpr make_node(DiffeoNode&& n) {
  return std::make_shared<const DiffeoNode>(std::move(n));
}

// -------- bump profiles: value and three u-derivatives, supported in (-1,1)

struct Profile3 {
  double p, d1, d2, d3;
};

inline Profile3 mound_profile(double u) {
  double w = 1.0 - u * u;
  if (w < 1e-3) return {0.0, 0.0, 0.0, 0.0};  // exp(-1000) underflows exactly
  double P = std::exp(-1.0 / w);
  double q = -2.0 * u / (w * w);
  double qp = -2.0 / (w * w) - 8.0 * u * u / (w * w * w);
  double qpp = -24.0 * u / (w * w * w) - 48.0 * u * u * u / (w * w * w * w);
  return {P, P * q, P * (q * q + qp), P * (q * q * q + 3.0 * q * qp + qpp)};
}

inline Profile3 tilt_profile(double u) {
  double w = 1.0 - u * u;
  if (w < 1e-3) return {0.0, 0.0, 0.0, 0.0};
  double P = std::exp(-1.0 / w);
  double q = -2.0 * u / (w * w);
  double qp = -2.0 / (w * w) - 8.0 * u * u / (w * w * w);
  double qpp = -24.0 * u / (w * w * w) - 48.0 * u * u * u / (w * w * w * w);
  double v1 = 1.0 + u * q;
  return {P * u, P * v1, P * (2.0 * q + u * q * q + u * qp),
          P * (3.0 * q * q + u * q * q * q + 3.0 * u * q * qp + 3.0 * qp + u * qpp)};
}

// sup |d/du profile|: frozen from a dense scan, used for the d1 > 0 bound.
inline constexpr double kMoundSlopeMax = 0.7985;
inline constexpr double kTiltSlopeMax = 0.5523;

// -------- real odd powers

inline double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

inline double odd_root(double v, int n) {  // real n-th root, n odd
  return v >= 0.0 ? std::pow(v, 1.0 / n) : -std::pow(-v, 1.0 / n);
}

// rpow(v, k) = v^(k/n) in the real odd-root sense, k integer (may be negative)
inline double odd_rpow(double v, int k, int n) {
  double r = odd_root(v, n);
  double a = std::pow(std::fabs(r), double(std::abs(k)));
  double s = (r < 0.0 && (std::abs(k) % 2 == 1)) ? -1.0 : 1.0;
  double out = s * a;
  return k >= 0 ? out : 1.0 / out;
}

// -------- parabolic family core jets (chart coordinates)

// f(x) = x (1+x^n)^(-1/n) at |x| <= 1.000001 (W = 1+x^n may be small near -1).
inline Jet3 parabolic_core_std(double x, int n) {
  if (n == 1) {  // Moebius x/(1+x)
    double den = 1.0 + x;
    return Jet3(x / den, 1.0 / (den * den), -2.0 / (den * den * den),
                6.0 / (den * den * den * den));
  }
  double W = 1.0 + ipow(x, n);
  double f = x * odd_rpow(W, -1, n);
  double d1 = odd_rpow(W, -(n + 1), n);
  double d2 = -(n + 1) * ipow(x, n - 1) * odd_rpow(W, -(2 * n + 1), n);
  double d3 = -(n + 1) * odd_rpow(W, -(3 * n + 1), n) *
              ((n - 1) * ipow(x, n - 2) * W - (2 * n + 1) * ipow(x, 2 * n - 2));
  return Jet3(f, d1, d2, d3);
}

// g(u) = f(-1/u) = -(u^n - 1)^(-1/n) at |u| <= 1.000001 (input in shifted chart,
// output in the standard chart).
inline Jet3 parabolic_core_inv(double u, int n) {
  double V = ipow(u, n) - 1.0;
  double g = -odd_rpow(V, -1, n);
  double A = odd_rpow(V, -(n + 1), n);
  double d1 = ipow(u, n - 1) * A;
  double t1 = (n >= 2) ? (n - 1) * ipow(u, n - 2) : 0.0;
  double d2 = A * (t1 - (n + 1) * ipow(u, 2 * n - 2) / V);
  double t3a = (n >= 3) ? (n - 1) * (n - 2) * ipow(u, n - 3) : 0.0;
  double t3b = (n >= 2) ? 3.0 * (n + 1) * (n - 1) * ipow(u, 2 * n - 3) / V : 0.0;
  double d3 = A * (t3a - t3b + (n + 1) * (2 * n + 1) * ipow(u, 3 * n - 3) / (V * V));
  return Jet3(g, d1, d2, d3);
}

// inversion R(y) = -1/y as a jet at y (used to move to the shifted chart)
inline Jet3 inversion_jet(double y) {
  return Jet3(-1.0 / y, 1.0 / (y * y), -2.0 / (y * y * y), 6.0 / (y * y * y * y));
}

// Assemble the angle-coordinate jet of a chart-level map given:
//  - the input angle t,
//  - a core evaluator expecting either the standard (|v|<=1) or the shifted
//    (|u|<=1) input chart and returning a standard-chart output jet.
template <typename CoreStd, typename CoreShift>
inline Jet3 angle_jet_from_chart_cores(double t, CoreStd core_std, CoreShift core_shift) {
  double tl = wrap01(t);
  bool in_shift = std::fabs(tl - 0.5) < 0.25;
  Jet3 cj = in_shift ? chart_jet(tl - 0.5) : chart_jet(tl < 0.75 ? tl : tl - 1.0);
  Jet3 core = in_shift ? core_shift(cj.f) : core_std(cj.f);
  Jet3 chartmap = jet_compose(core, cj);
  // choose output chart
  double shift = 0.0;
  Jet3 total;
  if (std::fabs(chartmap.f) <= 1.0) {
    total = jet_compose(unchart_jet(chartmap.f), chartmap);
  } else {
    Jet3 inv = jet_compose(inversion_jet(core.f), core);  // shifted-chart output
    Jet3 shifted = jet_compose(inv, cj);
    total = jet_compose(unchart_jet(shifted.f), shifted);
    shift = 0.5;
  }
  total.f = wrap01(total.f + shift);
  return total;
}

// -------- log-pathological map (single flat fixed point at chart 0)
//
// On (0,1] in the chart: f(x) = (Log(1+e^{x^-2}))^{-1/2}. On [-1,0) the
// closed-form branch y -> -(Log(1+e^{y^-4}))^{-1/4} moves points toward 0,
// so as a circle map with a single fixed point it must be read as f^{-1};
// f on the negative side is its inverse. The remaining arc through the
// chart pole is a septic Hermite interpolation matching 3-jets.

struct LogisticJets {
  double s, s1, s2;  // sigma, sigma', sigma'' as functions of the exponent
};

inline LogisticJets logistic(double p) {
  double e = p > 0 ? std::exp(-p) : std::exp(p);
  double s = p > 0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  return {s, s * (1.0 - s), s * (1.0 - s) * (1.0 - 2.0 * s)};
}

// branch P: chart jets of f on (0, 1]
inline Jet3 logpath_pos_jet(double x) {
  double q = 1.0 / (x * x);
  double q1 = -2.0 / (x * x * x);
  double q2 = 6.0 / (x * x * x * x);
  double q3 = -24.0 / (x * x * x * x * x);
  LogisticJets sg = logistic(q);
  double M = q + std::log1p(q > 700 ? 0.0 : std::exp(-q));
  double M1 = sg.s * q1;
  double M2 = sg.s1 * q1 * q1 + sg.s * q2;
  double M3 = sg.s2 * q1 * q1 * q1 + 3.0 * sg.s1 * q1 * q2 + sg.s * q3;
  double f = std::pow(M, -0.5);
  double d1 = -0.5 * std::pow(M, -1.5) * M1;
  double d2 = 0.75 * std::pow(M, -2.5) * M1 * M1 - 0.5 * std::pow(M, -1.5) * M2;
  double d3 = -0.5 * (3.75 * std::pow(M, -3.5) * M1 * M1 * M1 -
                      4.5 * std::pow(M, -2.5) * M1 * M2 + std::pow(M, -1.5) * M3);
  return Jet3(f, d1, d2, d3);
}

// chart jets of the negative-side closed-form branch g on [-1.3, 0)
inline Jet3 logpath_neg_branch_jet(double y) {
  double p = 1.0 / (y * y * y * y);
  double p1 = -4.0 * p / y;
  double p2 = 20.0 * p / (y * y);
  double p3 = -120.0 * p / (y * y * y);
  LogisticJets sg = logistic(p);
  double L = p + std::log1p(p > 700 ? 0.0 : std::exp(-p));
  double L1 = sg.s * p1;
  double L2 = sg.s1 * p1 * p1 + sg.s * p2;
  double L3 = sg.s2 * p1 * p1 * p1 + 3.0 * sg.s1 * p1 * p2 + sg.s * p3;
  double g = -std::pow(L, -0.25);
  double d1 = 0.25 * std::pow(L, -1.25) * L1;
  double d2 = 0.25 * (-1.25 * std::pow(L, -2.25) * L1 * L1 + std::pow(L, -1.25) * L2);
  double d3 = 0.25 * (2.8125 * std::pow(L, -3.25) * L1 * L1 * L1 -
                      3.75 * std::pow(L, -2.25) * L1 * L2 + std::pow(L, -1.25) * L3);
  return Jet3(g, d1, d2, d3);
}

// solve g(z) = x for z < 0 (monotone increasing branch)
inline double logpath_neg_invert(double x) {
  double lo = -1.35, hi = -1e-3;
  if (x >= logpath_neg_branch_jet(hi).f) hi = -1e-6;
  for (int it = 0; it < 90; ++it) {
    double mid = 0.5 * (lo + hi);
    if (logpath_neg_branch_jet(mid).f < x)
      lo = mid;
    else
      hi = mid;
  }
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    Jet3 j = logpath_neg_branch_jet(z);
    z -= (j.f - x) / j.d1;
  }
  return z;
}

// chart jet of f on [-1, 0): inverse of the closed-form branch
inline Jet3 logpath_neg_jet(double x) {
  double z = logpath_neg_invert(x);
  Jet3 j = logpath_neg_branch_jet(z);
  return jet_invert(j, z);
}

struct SepticHermite {
  double a[8];
  double eval(double s, int deriv) const {
    double r = 0.0;
    for (int i = 7; i >= deriv; --i) {
      double c = a[i];
      for (int k = 0; k < deriv; ++k) c *= (i - k);
      r = r * s + c;
    }
    return r;
  }
};

// interpolant on [0,1] with prescribed value + 3 derivatives at both ends
inline SepticHermite septic_hermite(const Jet3& at0, const Jet3& at1) {
  SepticHermite h{};
  h.a[0] = at0.f;
  h.a[1] = at0.d1;
  h.a[2] = at0.d2 / 2.0;
  h.a[3] = at0.d3 / 6.0;
  // remaining coefficients from the right-end conditions, solved explicitly
  double r0 = at1.f - (h.a[0] + h.a[1] + h.a[2] + h.a[3]);
  double r1 = at1.d1 - (h.a[1] + 2 * h.a[2] + 3 * h.a[3]);
  double r2 = at1.d2 - (2 * h.a[2] + 6 * h.a[3]);
  double r3 = at1.d3 - 6 * h.a[3];
  // [s^4..s^7](1) value/derivative matrix inverse, precomputed
  h.a[4] = 35 * r0 - 15 * r1 + 2.5 * r2 - r3 / 6.0;
  h.a[5] = -84 * r0 + 39 * r1 - 7 * r2 + 0.5 * r3;
  h.a[6] = 70 * r0 - 34 * r1 + 6.5 * r2 - 0.5 * r3;
  h.a[7] = -20 * r0 + 10 * r1 - 2 * r2 + r3 / 6.0;
  return h;
}

inline Jet3 logpath_branch_angle_jet(double t) {
  bool positive_side = t <= 0.25;
  Jet3 cj = chart_jet(positive_side ? t : t - 1.0);
  Jet3 core = positive_side ? logpath_pos_jet(cj.f) : logpath_neg_jet(cj.f);
  Jet3 cm = jet_compose(core, cj);
  Jet3 total = jet_compose(unchart_jet(cm.f), cm);
  total.f = wrap01(total.f);
  return total;
}

// Bridge across the far arc, built in lag coordinates G(t) = t - F(t): a
// graded piecewise-quintic through plateau knots (the end jets of the
// negative branch are steep, so the end pieces are short), keeping G > 0
// (no extra fixed points) and G' < 1 (orientation preserved). C^3 at the
// branch seams, C^2 at interior knots.
struct LagBridge {
  std::vector<double> breaks;         // in s, spanning [0, 1]
  std::vector<SepticHermite> pieces;  // per-cell, in the local cell variable

  // G and s-derivatives
  double g(double s, int d) const {
    size_t i = 0;
    while (i + 2 < breaks.size() && s >= breaks[i + 1]) ++i;
    double w = breaks[i + 1] - breaks[i];
    double u = (s - breaks[i]) / w;
    return pieces[i].eval(u, d) / ipow(w, d);
  }
};

inline const LagBridge& logpath_bridge() {
  static const LagBridge bridge = [] {
    Jet3 A = logpath_branch_angle_jet(0.25);
    Jet3 B = logpath_branch_angle_jet(0.75);
    const double span = 0.5;
    double ga = 0.25 - A.f;
    double gb = 0.75 - (A.f + wrap01(B.f - A.f));
    // lag jets in s = (t - 0.25)/span
    Jet3 la(ga, (1.0 - A.d1) * span, -A.d2 * span * span, -A.d3 * span * span * span);
    Jet3 lb(gb, (1.0 - B.d1) * span, -B.d2 * span * span, -B.d3 * span * span * span);
    auto rescale = [](const Jet3& j, double w) {
      return Jet3(j.f, j.d1 * w, j.d2 * w * w, j.d3 * w * w * w);
    };
    for (double plateau : {2.0, 3.0, 5.0}) {
      double gm = plateau * std::max(ga, gb);
      Jet3 knot(gm, 0.0, 0.0, 0.0);
      LagBridge cand;
      cand.breaks = {0.0, 0.4, 0.7, 0.93, 1.0};
      cand.pieces.resize(4);
      cand.pieces[0] = septic_hermite(rescale(la, 0.4), knot);
      cand.pieces[1] = septic_hermite(knot, knot);  // constant plateau
      cand.pieces[2] = septic_hermite(knot, knot);
      cand.pieces[3] = septic_hermite(knot, rescale(lb, 0.07));
      bool ok = true;
      for (int i = 0; i <= 4096 && ok; ++i) {
        double s = double(i) / 4096;
        double G = cand.g(s, 0), G1 = cand.g(s, 1);
        if (G <= 1e-4 || G1 / span >= 0.98) ok = false;
      }
      if (ok) return cand;
    }
    throw Error("log-pathological bridge construction failed");
  }();
  return bridge;
}

inline Jet3 logpath_angle_jet(double t) {
  t = wrap01(t);
  if (t < 1e-12 || t > 1.0 - 1e-12) return Jet3::identity(0.0);  // flat fixed point
  if (t <= 0.25 || t >= 0.75) return logpath_branch_angle_jet(t);
  const LagBridge& m = logpath_bridge();
  const double span = 0.5;
  double s = (t - 0.25) / span;
  double G = m.g(s, 0), G1 = m.g(s, 1) / span, G2 = m.g(s, 2) / (span * span),
         G3 = m.g(s, 3) / (span * span * span);
  return Jet3(wrap01(t - G), 1.0 - G1, -G2, -G3);
}

inline Jet3 log_pathological_jet(double t) { return logpath_angle_jet(t); }
inline double log_pathological_apply(double t) { return logpath_angle_jet(t).f; }

}  // namespace detail

// ---------------------------------------------------------------- builders

inline DiffeoExpr make_moebius(const MoebiusMap& m) {
  DiffeoNode n{};
  n.kind = DiffeoNode::Kind::Moebius;
  n.mob = m;
  return detail::make_node(std::move(n));
}

inline DiffeoExpr make_rotation(double theta) {
  DiffeoNode n{};
  n.kind = DiffeoNode::Kind::Rotation;
  n.theta = wrap01(theta);
  return detail::make_node(std::move(n));
}

inline DiffeoExpr make_parabolic_family(int order) {
  if (order < 1 || order % 2 == 0) throw Error("ParabolicFamily needs odd n >= 1");
  DiffeoNode n{};
  n.kind = DiffeoNode::Kind::ParabolicFamily;
  n.n = order;
  return detail::make_node(std::move(n));
}

inline DiffeoExpr make_log_pathological() {
  DiffeoNode n{};
  n.kind = DiffeoNode::Kind::LogPathological;
  return detail::make_node(std::move(n));
}

// Displacement bump t -> t + A * profile(u), u the normalized position in the
// support arc. The constructor rejects amplitudes that could break d1 > 0.
inline DiffeoExpr make_bump(const Arc& support, double amplitude,
                            BumpProfile profile = BumpProfile::Mound) {
  double hw = 0.5 * support.width();
  if (hw <= 0.0) throw Error("bump support must have positive width");
  double slope_max =
      (profile == BumpProfile::Mound) ? detail::kMoundSlopeMax : detail::kTiltSlopeMax;
  if (std::fabs(amplitude) * slope_max / hw >= 0.98)
    throw Error("bump amplitude too large for a diffeomorphism");
  DiffeoNode n{};
  n.kind = DiffeoNode::Kind::Bump;
  n.support = support;
  n.amplitude = amplitude;
  n.profile = profile;
  return detail::make_node(std::move(n));
}

inline DiffeoExpr make_compose(DiffeoExpr outer, DiffeoExpr inner) {
  DiffeoNode n{};
  n.kind = DiffeoNode::Kind::Compose;
  n.lhs = std::move(outer);
  n.rhs = std::move(inner);
  return detail::make_node(std::move(n));
}

inline DiffeoExpr make_inverse(DiffeoExpr f) {
  if (f->kind == DiffeoNode::Kind::Inverse) return f->lhs;
  if (f->kind == DiffeoNode::Kind::Moebius) return make_moebius(f->mob.inverse());
  if (f->kind == DiffeoNode::Kind::Rotation) return make_rotation(-f->theta);
  DiffeoNode n{};
  n.kind = DiffeoNode::Kind::Inverse;
  n.lhs = std::move(f);
  return detail::make_node(std::move(n));
}

inline DiffeoExpr make_conjugate(DiffeoExpr h, DiffeoExpr f) {
  // h o f o h^{-1}
  return make_compose(h, make_compose(f, make_inverse(h)));
}

// ------------------------------------------------------------- evaluation

double diffeo_apply(const DiffeoExpr& f, double t);
Jet3 diffeo_jet3_raw(const DiffeoExpr& f, double t);

namespace detail {

inline double bump_apply(const DiffeoNode& n, double t) {
  double hw = 0.5 * n.support.width();
  double c = n.support.a.t + hw;
  double u = (wrap01(t - c + 0.5) - 0.5) / hw;
  if (std::fabs(u) >= 1.0) return wrap01(t);
  Profile3 p = (n.profile == BumpProfile::Mound) ? mound_profile(u) : tilt_profile(u);
  return wrap01(t + n.amplitude * p.p);
}

inline Jet3 bump_jet(const DiffeoNode& n, double t) {
  double hw = 0.5 * n.support.width();
  double c = n.support.a.t + hw;
  double u = (wrap01(t - c + 0.5) - 0.5) / hw;
  if (std::fabs(u) >= 1.0) return Jet3::identity(wrap01(t));
  Profile3 p = (n.profile == BumpProfile::Mound) ? mound_profile(u) : tilt_profile(u);
  double A = n.amplitude;
  return Jet3(wrap01(t + A * p.p), 1.0 + A * p.d1 / hw, A * p.d2 / (hw * hw),
              A * p.d3 / (hw * hw * hw));
}

double invert_monotone(const DiffeoExpr& f, double target);

// node-aware inverse evaluation: exact for Moebius/rotation, local for bumps
inline double apply_inverse(const DiffeoExpr& f, double target) {
  switch (f->kind) {
    case DiffeoNode::Kind::Moebius:
      return moebius_apply(f->mob.inverse(), CirclePoint(target)).t;
    case DiffeoNode::Kind::Rotation:
      return wrap01(target - f->theta);
    case DiffeoNode::Kind::Bump: {
      // a bump maps its support onto itself and is the identity outside;
      // solve in the local (unwrapped) support frame
      double hw = 0.5 * f->support.width();
      double c = f->support.a.t + hw;
      double u = (wrap01(target - c + 0.5) - 0.5) / hw;
      if (std::fabs(u) >= 1.0) return wrap01(target);
      auto local_disp = [&](double m) {  // m in [-1, 1]
        Profile3 p =
            (f->profile == BumpProfile::Mound) ? mound_profile(m) : tilt_profile(m);
        return f->amplitude * p.p / hw;  // displacement in u-units
      };
      double lo = -1.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid + local_disp(mid) < u)
          lo = mid;
        else
          hi = mid;
      }
      double m = 0.5 * (lo + hi);
      for (int it = 0; it < 2; ++it) {
        Profile3 p =
            (f->profile == BumpProfile::Mound) ? mound_profile(m) : tilt_profile(m);
        double val = m + f->amplitude * p.p / hw;
        double der = 1.0 + f->amplitude * p.d1 / hw;
        m -= (val - u) / der;
      }
      return wrap01(c + m * hw);
    }
    case DiffeoNode::Kind::Compose:
      return apply_inverse(f->rhs, apply_inverse(f->lhs, target));
    case DiffeoNode::Kind::Inverse:
      return diffeo_apply(f->lhs, target);
    default:
      return invert_monotone(f, target);
  }
}

// generic monotone inversion on the circle: solve f(s) = target
inline double invert_monotone(const DiffeoExpr& f, double target) {
  // coarse bracket on the displacement of s -> f(s) - target
  const int kGrid = 64;
  double best_lo = 0.0, best_hi = 0.0;
  bool found = false;
  double prev_s = 0.0;
  double prev_d = 0.0;
  auto disp = [&](double s) {
    // signed distance from f(s) to target in (-0.5, 0.5]
    double d = wrap01(diffeo_apply(f, s) - target);
    return d > 0.5 ? d - 1.0 : d;
  };
  for (int i = 0; i <= kGrid; ++i) {
    double s = double(i) / kGrid;
    double d = disp(s);
    if (std::fabs(d) < 1e-15) return wrap01(s);
    if (i > 0 && prev_d < 0.0 != d < 0.0 && std::fabs(prev_d) < 0.4 &&
        std::fabs(d) < 0.4) {
      best_lo = prev_s;
      best_hi = s;
      found = true;
      break;
    }
    prev_s = s;
    prev_d = d;
  }
  if (!found) {
    // fall back: dense scan for the minimal |disp| cell
    double bs = 0.0, bd = 1e9;
    for (int i = 0; i < 1024; ++i) {
      double s = double(i) / 1024;
      double d = std::fabs(disp(s));
      if (d < bd) {
        bd = d;
        bs = s;
      }
    }
    best_lo = bs - 1.0 / 1024;
    best_hi = bs + 1.0 / 1024;
  }
  double lo = best_lo, hi = best_hi;
  double dlo = disp(lo);
  for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    double dm = disp(mid);
    if (dm == 0.0) return wrap01(mid);
    if ((dm < 0.0) == (dlo < 0.0)) {
      lo = mid;
      dlo = dm;
    } else {
      hi = mid;
    }
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {  // Newton polish
    Jet3 j = diffeo_jet3_raw(f, s);
    double d = wrap01(j.f - target);
    if (d > 0.5) d -= 1.0;
    s -= d / j.d1;
  }
  return wrap01(s);
}

}  // namespace detail

inline double diffeo_apply(const DiffeoExpr& f, double t) {
  using K = DiffeoNode::Kind;
  switch (f->kind) {
    case K::Moebius:
      return moebius_apply(f->mob, CirclePoint(t)).t;
    case K::Rotation:
      return wrap01(t + f->theta);
    case K::ParabolicFamily: {
      int n = f->n;
      return detail::angle_jet_from_chart_cores(
                 t, [&](double v) { return detail::parabolic_core_std(v, n); },
                 [&](double u) { return detail::parabolic_core_inv(u, n); })
          .f;
    }
    case K::LogPathological:
      return detail::log_pathological_apply(t);
    case K::Bump:
      return detail::bump_apply(*f, t);
    case K::Compose:
      return diffeo_apply(f->lhs, diffeo_apply(f->rhs, t));
    case K::Inverse:
      return detail::apply_inverse(f->lhs, wrap01(t));
  }
  throw Error("unreachable");
}

inline Jet3 diffeo_jet3_raw(const DiffeoExpr& f, double t) {
  using K = DiffeoNode::Kind;
  switch (f->kind) {
    case K::Moebius:
      return moebius_jet3(f->mob, CirclePoint(t));
    case K::Rotation:
      return Jet3(wrap01(t + f->theta), 1.0, 0.0, 0.0);
    case K::ParabolicFamily: {
      int n = f->n;
      return detail::angle_jet_from_chart_cores(
          t, [&](double v) { return detail::parabolic_core_std(v, n); },
          [&](double u) { return detail::parabolic_core_inv(u, n); });
    }
    case K::LogPathological:
      return detail::log_pathological_jet(t);
    case K::Bump:
      return detail::bump_jet(*f, t);
    case K::Compose: {
      Jet3 inner = diffeo_jet3_raw(f->rhs, t);
      Jet3 outer = diffeo_jet3_raw(f->lhs, inner.f);
      return jet_compose(outer, inner);
    }
    case K::Inverse: {
      double s = detail::apply_inverse(f->lhs, wrap01(t));
      Jet3 j = diffeo_jet3_raw(f->lhs, s);
      return jet_invert(j, s);
    }
  }
  throw Error("unreachable");
}

inline Jet3 diffeo_jet3(const DiffeoExpr& f, CirclePoint p) {
  Jet3 j = diffeo_jet3_raw(f, p.t);
  if (!(j.d1 > 0.0) || !std::isfinite(j.d1) || !std::isfinite(j.d3))
    throw JetUnavailable();
  return j;
}

inline CirclePoint diffeo_point(const DiffeoExpr& f, CirclePoint p) {
  return CirclePoint(diffeo_apply(f, p.t));
}

}  // namespace ck

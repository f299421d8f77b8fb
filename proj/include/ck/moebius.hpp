#pragma once

// PSL(2,R) elements acting projectively on the circle: classification,
// fixed points, one-parameter subgroups, order-3 jets of the circle map.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "ck/circle.hpp"
#include "ck/jet.hpp"

namespace ck {

enum class MoebiusClass { Identity, Elliptic, Parabolic, Hyperbolic };

// Element of PSL(2,R): det = 1 and first nonzero entry of the first row
// positive, so matrix equality is map equality.
struct MoebiusMap {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  MoebiusMap() = default;
  MoebiusMap(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
    normalize();
  }
  static MoebiusMap identity() { return MoebiusMap(); }

  void normalize() {
    double det = a * d - b * c;
    if (!(det > 0.0)) throw Error("MoebiusMap requires positive determinant");
    double s = 1.0 / std::sqrt(det);
    a *= s; b *= s; c *= s; d *= s;
    bool flip = std::fabs(a) > 1e-14 ? (a < 0.0) : (b < 0.0);
    if (flip) { a = -a; b = -b; c = -c; d = -d; }
  }

  double trace() const { return a + d; }

  MoebiusMap inverse() const { return MoebiusMap(d, -b, -c, a); }

  friend MoebiusMap operator*(const MoebiusMap& g, const MoebiusMap& h) {
    return MoebiusMap(g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
                      g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d);
  }

  // Rotation by angle theta of the circle R/Z: elliptic matrix of angle pi*theta.
  static MoebiusMap rotation(double theta) {
    double t = kPi * theta;
    return MoebiusMap(std::cos(t), std::sin(t), -std::sin(t), std::cos(t));
  }

  ChartValue apply_chart(ChartValue x) const {
    if (x.inf) {
      if (std::fabs(c) < 1e-300) return ChartValue::infinity();
      return ChartValue(a / c);
    }
    double num = a * x.v + b, den = c * x.v + d;
    if (std::fabs(den) <= 1e-300 * std::fabs(num)) return ChartValue::infinity();
    return ChartValue(num / den);
  }
};

inline double frobenius_dist(const MoebiusMap& g, const MoebiusMap& h) {
  auto sq = [](double x) { return x * x; };
  return std::sqrt(sq(g.a - h.a) + sq(g.b - h.b) + sq(g.c - h.c) + sq(g.d - h.d));
}

inline bool is_identity(const MoebiusMap& g, double tol = 1e-10) {
  return frobenius_dist(g, MoebiusMap::identity()) <= tol;
}

// Image angle under the projective action, pole-safe: near the chart pole
// we work in the half-turn-shifted chart, which conjugates the matrix by
// the quarter-rotation R = (0,-1;1,0).
inline CirclePoint moebius_apply(const MoebiusMap& g, CirclePoint p) {
  double num, den;
  if (std::fabs(p.t - 0.5) >= 0.25) {
    double v = std::tan(kPi * p.t);
    num = g.a * v + g.b;
    den = g.c * v + g.d;
  } else {
    double w = chart_shifted(p);  // v = -1/w
    num = g.b * w - g.a;
    den = g.d * w - g.c;
  }
  if (std::fabs(num) <= std::fabs(den)) {
    return CirclePoint(std::atan(num / den) / kPi);
  }
  return CirclePoint(std::atan(-den / num) / kPi + 0.5);
}

namespace detail {

// Jets of the chart c(t) = tan(pi t) and its inverse at a chart value w.
inline Jet3 chart_jet(double t_local) {  // local angle with pole away
  double c = std::tan(kPi * t_local);
  double u = 1.0 + c * c;
  return Jet3(c, kPi * u, 2.0 * kPi * kPi * c * u, 2.0 * kPi * kPi * kPi * u * (1.0 + 3.0 * c * c));
}

inline Jet3 unchart_jet(double w) {
  double u = 1.0 + w * w;
  return Jet3(std::atan(w) / kPi, 1.0 / (kPi * u), -2.0 * w / (kPi * u * u),
              (6.0 * w * w - 2.0) / (kPi * u * u * u));
}

inline Jet3 frac_linear_jet(double a, double b, double c, double d, double v) {
  double den = c * v + d;
  double w = (a * v + b) / den;
  double d1 = 1.0 / (den * den);  // det = 1
  return Jet3(w, d1, -2.0 * c / (den * den * den), 6.0 * c * c / (den * den * den * den));
}

}  // namespace detail

// 3-jet of the circle map t -> g.t in the angle coordinate. Pole-safe by
// conjugating with the shifted chart on either side.
inline Jet3 moebius_jet3(const MoebiusMap& g, CirclePoint p) {
  // Choose source chart.
  bool src_shift = std::fabs(p.t - 0.5) < 0.25;
  MoebiusMap m = g;
  double t_src = src_shift ? p.t - 0.5 : p.t;
  if (src_shift) {
    // v = -1/w, i.e. precompose with R^{-1} where R=(0,-1;1,0):  m <- m*R... we
    // fold the shift into the matrix: x = Rw with R(w) = -1/w = (0,-1;1,0).
    m = m * MoebiusMap(0.0, -1.0, 1.0, 0.0);
  }
  Jet3 cj = detail::chart_jet(t_src);  // jet of w(t) in local angle
  double w = cj.f;
  // Decide target chart from the image.
  double num = m.a * w + m.b, den = m.c * w + m.d;
  bool dst_shift = !(std::fabs(num) <= std::fabs(den));
  MoebiusMap mm = m;
  if (dst_shift) {
    // postcompose with R^{-1}(x) = -1/x? x_shifted = -1/x = R(x).
    mm = MoebiusMap(0.0, -1.0, 1.0, 0.0) * m;
  }
  Jet3 fj = detail::frac_linear_jet(mm.a, mm.b, mm.c, mm.d, w);
  Jet3 uj = detail::unchart_jet(fj.f);
  Jet3 r = jet_compose(uj, jet_compose(fj, cj));
  r.f = wrap01(r.f + (dst_shift ? 0.5 : 0.0));
  return r;
}

inline MoebiusClass moebius_classify(const MoebiusMap& g, double eps = kEpsClassify) {
  if (is_identity(g)) return MoebiusClass::Identity;
  double t = std::fabs(g.trace());
  if (t < 2.0 - eps) return MoebiusClass::Elliptic;
  if (t > 2.0 + eps) return MoebiusClass::Hyperbolic;
  return MoebiusClass::Parabolic;
}

// Reported alongside classification when |trace|-2 is within the margin.
inline bool moebius_near_parabolic(const MoebiusMap& g, double eps = kEpsClassify) {
  return std::fabs(std::fabs(g.trace()) - 2.0) <= eps && !is_identity(g);
}

struct FixedPoint {
  CirclePoint point;
  double derivative;  // of the circle map at the fixed point
};

// Fixed points with derivatives, attracting first for hyperbolic maps.
// Solved from the eigenvector equation c v^2 + (d-a) v - b = 0 in the chart.
inline std::vector<FixedPoint> moebius_fixed_points(const MoebiusMap& g) {
  if (is_identity(g)) throw IsIdentity();
  MoebiusClass cls = moebius_classify(g);
  if (cls == MoebiusClass::Elliptic) return {};
  std::vector<FixedPoint> out;
  auto push = [&](ChartValue v) {
    CirclePoint p = unchart(v);
    double der = moebius_jet3(g, p).d1;
    out.push_back({p, der});
  };
  if (std::fabs(g.c) < 1e-14) {
    // infinity is fixed
    push(ChartValue::infinity());
    if (std::fabs(g.a - g.d) > 1e-14) push(ChartValue(g.b / (g.d - g.a)));
  } else {
    double disc = (g.d - g.a) * (g.d - g.a) + 4.0 * g.b * g.c;  // = tr^2 - 4
    disc = std::max(disc, 0.0);
    double s = std::sqrt(disc);
    double q = (g.a - g.d);
    push(ChartValue((q + s) / (2.0 * g.c)));
    if (cls == MoebiusClass::Hyperbolic) push(ChartValue((q - s) / (2.0 * g.c)));
  }
  if (out.size() == 2 && out[0].derivative > out[1].derivative)
    std::swap(out[0], out[1]);  // attracting (derivative < 1) first
  return out;
}

// exp(s log g), principal branch. Closed forms per conjugacy class.
inline MoebiusMap moebius_one_param(const MoebiusMap& g, double s) {
  if (is_identity(g)) return MoebiusMap::identity();
  // Use the trace >= 0 representative for the principal logarithm.
  double a = g.a, b = g.b, c = g.c, d = g.d;
  if (a + d < 0.0) { a = -a; b = -b; c = -c; d = -d; }
  double tr = a + d;
  if (tr <= -2.0) throw LogBranchFailure();
  double ha = 0.5 * (a - d);  // traceless part
  auto build = [&](double u, double v) {
    // u*I + v*K with K = (g - (tr/2) I)/norm folded into v
    return MoebiusMap(u + v * ha, v * b, v * c, u - v * ha);
  };
  if (tr > 2.0 + kEpsClassify) {
    double l = std::acosh(0.5 * tr);
    // K = (g - cosh(l) I)/sinh(l), K^2 = I
    return build(std::cosh(s * l), std::sinh(s * l) / std::sinh(l));
  }
  if (tr < 2.0 - kEpsClassify) {
    double th = std::acos(0.5 * tr);  // in (0, pi)
    return build(std::cos(s * th), std::sin(s * th) / std::sin(th));
  }
  // Parabolic: g = I + N with N nilpotent; exp(sN) = I + sN.
  return MoebiusMap(1.0 + s * (a - 1.0), s * b, s * c, 1.0 + s * (d - 1.0));
}

// Hyperbolic map with axis endpoints (attract, repel) given as chart values
// and translation length ell: derivative e^{-ell} at the attracting point.
inline MoebiusMap moebius_hyperbolic(ChartValue attract, ChartValue repel, double ell) {
  double lam = std::exp(0.5 * ell);
  MoebiusMap diag(lam, 0.0, 0.0, 1.0 / lam);  // repels 0, attracts infinity
  MoebiusMap h;  // send 0 -> repel, infinity -> attract
  if (attract.inf) {
    h = MoebiusMap(1.0, repel.v, 0.0, 1.0);
  } else if (repel.inf) {
    h = MoebiusMap(attract.v, -1.0, 1.0, 0.0);
  } else {
    if (std::fabs(attract.v - repel.v) < 1e-12) throw DegenerateConfiguration();
    if (attract.v > repel.v)
      h = MoebiusMap(attract.v, repel.v, 1.0, 1.0);
    else
      h = MoebiusMap(attract.v, -repel.v, 1.0, -1.0);
  }
  return h * diag * h.inverse();
}

}  // namespace ck

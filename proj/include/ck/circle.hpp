#pragma once

// Canonical circle coordinates, cyclic order, arcs, the projective chart
// and cross-ratio arithmetic.

#include <cmath>
#include <limits>

#include "ck/constants.hpp"
#include "ck/error.hpp"

namespace ck {

inline double wrap01(double t) {
  double r = t - std::floor(t);
  if (r >= 1.0) r -= 1.0;  // guard against floor rounding
  return r;
}

// Point of S^1 = R/Z as an angle in [0,1).
struct CirclePoint {
  double t = 0.0;
  CirclePoint() = default;
  explicit CirclePoint(double angle) : t(wrap01(angle)) {}
};

// Distance on R/Z.
inline double circle_dist(CirclePoint a, CirclePoint b) {
  double d = std::fabs(a.t - b.t);
  return std::min(d, 1.0 - d);
}

inline bool same_point(CirclePoint a, CirclePoint b, double eps = kEpsPoint) {
  return circle_dist(a, b) <= eps;
}

// Extended real: value of the projective chart c(t) = tan(pi t).
struct ChartValue {
  double v = 0.0;
  bool inf = false;
  ChartValue() = default;
  ChartValue(double value) : v(value), inf(false) {}  // NOLINT(implicit)
  static ChartValue infinity() {
    ChartValue c;
    c.inf = true;
    c.v = std::numeric_limits<double>::infinity();
    return c;
  }
};

inline ChartValue chart(CirclePoint p) {
  if (std::fabs(p.t - 0.5) < 1e-15) return ChartValue::infinity();
  return ChartValue(std::tan(kPi * p.t));
}

inline CirclePoint unchart(ChartValue c) {
  if (c.inf) return CirclePoint(0.5);
  return CirclePoint(std::atan(c.v) / kPi);
}

// Chart shifted by half a turn: tan(pi (t - 1/2)) = -1/tan(pi t).
// Used to keep chart arithmetic away from the pole at t = 1/2.
inline double chart_shifted(CirclePoint p) { return std::tan(kPi * (p.t - 0.5)); }

inline CirclePoint unchart_shifted(double w) {
  return CirclePoint(std::atan(w) / kPi + 0.5);
}

// True iff b lies strictly in the counterclockwise open arc from a to c.
inline bool cyclic(CirclePoint a, CirclePoint b, CirclePoint c) {
  if (same_point(a, b) || same_point(b, c) || same_point(a, c))
    throw DegenerateTriple();
  double u = wrap01(b.t - a.t);
  double w = wrap01(c.t - a.t);
  return u < w;
}

// Counterclockwise arc from a to b.
struct Arc {
  CirclePoint a, b;
  Arc() = default;
  Arc(CirclePoint start, CirclePoint end) : a(start), b(end) {}
  double width() const { return wrap01(b.t - a.t); }
  CirclePoint midpoint() const { return CirclePoint(a.t + 0.5 * width()); }
  bool contains(CirclePoint p) const {  // open arc
    double u = wrap01(p.t - a.t);
    double w = width();
    return u > kEpsPoint && u < w - kEpsPoint;
  }
  bool contains_closed(CirclePoint p, double pad = 0.0) const {
    double u = wrap01(p.t - a.t);
    double w = width();
    if (u > 0.5 + 0.5 * w) u -= 1.0;  // allow slight negative overshoot
    return u >= -pad && u <= w + pad;
  }
  Arc padded(double pad) const { return Arc(CirclePoint(a.t - pad), CirclePoint(b.t + pad)); }
};

inline bool arcs_disjoint(const Arc& x, const Arc& y, double pad = 0.0) {
  return !(x.contains_closed(y.a, pad) || x.contains_closed(y.b, pad) ||
           y.contains_closed(x.a, pad) || y.contains_closed(x.b, pad));
}

// Cross-ratio [a,b,c,d] = (a-c)/(a-d) * (b-d)/(b-c), with the point at
// infinity handled by the limit of the formula. At most one argument
// may be infinite.
inline double cross_ratio(ChartValue a, ChartValue b, ChartValue c, ChartValue d) {
  int ninf = int(a.inf) + int(b.inf) + int(c.inf) + int(d.inf);
  if (ninf > 1) throw DegenerateConfiguration("more than one infinite chart value");
  auto close = [](ChartValue x, ChartValue y) {
    if (x.inf || y.inf) return x.inf && y.inf;
    double scale = 1.0 + std::max(std::fabs(x.v), std::fabs(y.v));
    return std::fabs(x.v - y.v) <= 1e-14 * scale;
  };
  if (close(a, b) || close(a, c) || close(a, d) || close(b, c) || close(b, d) ||
      close(c, d))
    throw DegenerateConfiguration("coincident points in cross-ratio");
  if (a.inf) return (b.v - d.v) / (b.v - c.v);
  if (b.inf) return (a.v - c.v) / (a.v - d.v);
  if (c.inf) return (b.v - d.v) / (a.v - d.v);
  if (d.inf) return (a.v - c.v) / (b.v - c.v);
  return (a.v - c.v) / (a.v - d.v) * (b.v - d.v) / (b.v - c.v);
}

// omega0-area of the rectangle I x J for the standard form 4 dx dy/(x-y)^2:
// 4 Log [a,b,c,d]. Computed in a chart rotated so that neither closed arc
// meets the pole.
inline double rect_area_standard(const Arc& I, const Arc& J) {
  if (J.width() <= kEpsPoint || I.width() <= kEpsPoint) return 0.0;
  if (!arcs_disjoint(I, J)) throw OverlappingArcs();
  // Rotate the pole into the gap following I (counterclockwise): choose r so
  // that t = 1/2 lands strictly between I.b and J.a or between J.b and I.a.
  double gap1 = wrap01(J.a.t - I.b.t);
  double gap2 = wrap01(I.a.t - J.b.t);
  double pole_target =
      gap1 >= gap2 ? wrap01(I.b.t + 0.5 * gap1) : wrap01(J.b.t + 0.5 * gap2);
  double r = 0.5 - pole_target;  // rotate pole_target onto the pole
  auto ch = [&](CirclePoint p) { return ChartValue(std::tan(kPi * wrap01(p.t + r))); };
  double cr = cross_ratio(ch(I.a), ch(I.b), ch(J.a), ch(J.b));
  return std::fabs(4.0 * std::log(cr));
}

}  // namespace ck

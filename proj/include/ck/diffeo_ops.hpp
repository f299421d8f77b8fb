#pragma once

// Analysis of circle diffeomorphisms: chart Schwarzian, Birkhoff rotation
// numbers, fixed points with derivatives, the spectral (Moebius-like) test,
// and the closed-form derivative products of the log-pathological map.

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "ck/diffeo.hpp"

namespace ck {

// Schwarzian derivative of the chart map c∘f∘c^{-1} at chart(p), i.e. the
// projective-chart Schwarzian density. Near the chart pole the computation
// runs in the half-turn-shifted chart and the result is transported back by
// the quadratic-differential rule S = S~(w~) * (dw~/dw)^2 with w~ = -1/w.
inline double schwarzian(const DiffeoExpr& f, CirclePoint p) {
  Jet3 aj = diffeo_jet3(f, p);
  double t = p.t, ft = aj.f;
  bool src_shift = std::fabs(t - 0.5) < 0.25;
  bool dst_shift = std::fabs(ft - 0.5) < 0.25;
  double t_local = src_shift ? t - 0.5 : (t < 0.75 ? t : t - 1.0);
  Jet3 cj = detail::chart_jet(t_local);
  Jet3 oj = detail::chart_jet(dst_shift ? ft - 0.5 : (ft < 0.75 ? ft : ft - 1.0));
  // chart map in (possibly shifted) charts: oj ∘ f_angle ∘ cj^{-1}
  Jet3 cm = jet_compose(jet_compose(oj, aj), jet_invert(cj, t_local));
  double s = jet_schwarzian(cm);
  // Transport from the shifted source chart back to the standard one:
  // S_std(w) = S_shift(w~) * (dw~/dw)^2, w~ = -1/w, dw~/dw = 1/w^2.
  if (src_shift) {
    double w = std::tan(kPi * t);  // |w| >= 1 here
    s /= (w * w) * (w * w);
  }
  return s;
}

// Birkhoff estimate of the rotation number: (F^n(x0) - x0)/n for the lift.
// The displacement branch cut is placed in the largest gap of the sampled
// displacement values (the true displacement has range width < 1, so a gap
// of matching size always exists).
inline double rotation_number(const DiffeoExpr& f, long iterations) {
  if (iterations < 1) throw Error("rotation_number needs iterations >= 1");
  std::vector<double> samples(256);
  for (int i = 0; i < 256; ++i)
    samples[i] = wrap01(diffeo_apply(f, i / 256.0) - i / 256.0);
  std::sort(samples.begin(), samples.end());
  double cut = 0.0, best_gap = -1.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    double lo = samples[i];
    double hi = (i + 1 < samples.size()) ? samples[i + 1] : samples[0] + 1.0;
    if (hi - lo > best_gap) {
      best_gap = hi - lo;
      cut = wrap01(0.5 * (hi + lo));
    }
  }
  double x = 0.1234567;
  double sum = 0.0;
  for (long i = 0; i < iterations; ++i) {
    double y = diffeo_apply(f, x);
    double d = wrap01(y - x);
    if (d >= cut) d -= 1.0;  // representative in [cut-1, cut)
    sum += d;
    x = y;
  }
  return wrap01(sum / double(iterations));
}

struct DiffeoFixedPoint {
  CirclePoint point;
  double derivative;
  bool non_transverse = false;
};

// All fixed points located from sign changes of the displacement on a grid,
// polished by bisection + Newton; flat touches are reported NonTransverse.
inline std::vector<DiffeoFixedPoint> fixed_points_diffeo(const DiffeoExpr& f,
                                                         int grid = 512) {
  if (grid < 16) throw Error("fixed_points_diffeo needs grid >= 16");
  auto disp = [&](double t) {
    double d = wrap01(diffeo_apply(f, t) - t);
    return d > 0.5 ? d - 1.0 : d;
  };
  std::vector<DiffeoFixedPoint> out;
  auto push = [&](double root) {
    Jet3 j = diffeo_jet3_raw(f, root);
    if (circle_dist(CirclePoint(j.f), CirclePoint(root)) > 1e-8)
      return;  // not actually fixed (wrap artifact of the displacement branch)
    for (const auto& q : out)
      if (same_point(q.point, CirclePoint(root), 1e-4)) return;  // flat zeros localize poorly
    DiffeoFixedPoint fp;
    fp.point = CirclePoint(root);
    fp.derivative = j.d1;
    fp.non_transverse = std::fabs(j.d1 - 1.0) <= 1e-6;
    out.push_back(fp);
  };
  std::vector<double> dv(grid + 1);
  for (int i = 0; i <= grid; ++i) dv[i] = disp(double(i) / grid);
  for (int i = 0; i < grid; ++i) {
    double a = double(i) / grid, b = double(i + 1) / grid;
    double da = dv[i], db = dv[i + 1];
    if (da == 0.0) {
      push(a);
      continue;
    }
    if (std::fabs(da) > 0.4 && std::fabs(db) > 0.4) continue;  // branch wrap cell
    if ((da < 0.0) == (db < 0.0)) {
      // possible tangential touch: inspect the cell minimum of |disp|
      if (std::fabs(da) < 1e-4 || std::fabs(db) < 1e-4) {
        double lo = a, hi = b;
        for (int it = 0; it < 60; ++it) {
          double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
          if (std::fabs(disp(m1)) < std::fabs(disp(m2)))
            hi = m2;
          else
            lo = m1;
        }
        double m = 0.5 * (lo + hi);
        if (std::fabs(disp(m)) <= 1e-12) push(m);
      }
      continue;
    }
    // transverse sign change: bisection
    double lo = a, hi = b, dl = da;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      double dm = disp(mid);
      if (dm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((dm < 0.0) == (dl < 0.0)) {
        lo = mid;
        dl = dm;
      } else {
        hi = mid;
      }
    }
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 2; ++it) {
      Jet3 j = diffeo_jet3_raw(f, root);
      double d = wrap01(j.f - root);
      if (d > 0.5) d -= 1.0;
      double slope = j.d1 - 1.0;
      if (std::fabs(slope) > 1e-9) root -= d / slope;
    }
    push(wrap01(root));
  }
  return out;
}

struct SpectralPass {};
struct SpectralFailProduct {
  double value;
};
struct SpectralFailUnitDerivative {};
struct SpectralTooManyFixedPoints {
  int count;
};
using SpectralResult = std::variant<SpectralPass, SpectralFailProduct,
                                    SpectralFailUnitDerivative, SpectralTooManyFixedPoints>;

inline bool spectral_passes(const SpectralResult& r) {
  return std::holds_alternative<SpectralPass>(r);
}

// Moebius-like spectral test: <= 2 fixed points; with two fixed points the
// derivatives must multiply to 1 and differ from 1.
inline SpectralResult spectral_test(const DiffeoExpr& f, int grid = 512) {
  auto fps = fixed_points_diffeo(f, grid);
  if (fps.size() > 2) return SpectralTooManyFixedPoints{int(fps.size())};
  if (fps.size() < 2) return SpectralPass{};
  double prod = fps[0].derivative * fps[1].derivative;
  if (std::fabs(prod - 1.0) > kEpsSpectral) return SpectralFailProduct{prod};
  if (std::fabs(fps[0].derivative - 1.0) <= kEpsSpectral ||
      std::fabs(fps[1].derivative - 1.0) <= kEpsSpectral)
    return SpectralFailUnitDerivative{};
  return SpectralPass{};
}

// ------------------------- Prop 3.2 closed-form derivative products ------

// (f^n)'(x) for the positive branch, from f^n(x) = (Log(n+e^{x^-2}))^{-1/2}.
inline double logpath_forward_derivative(double n, double x) {
  if (!(x > 0.0 && x <= 1.0)) throw Error("x must lie in (0,1]");
  double q = 1.0 / (x * x);
  if (q > 700.0) throw Overflow("e^{x^-2} overflows; usable range is x > 0.038");
  double eq = std::exp(q);
  double M = std::log(n + eq);
  return (1.0 / (x * x * x)) * (1.0 / (1.0 + n * std::exp(-q))) * std::pow(M, -1.5);
}

// (f^{-n})'(v) for the negative branch, from f^{-n}(v) = -(Log(n+e^{v^-4}))^{-1/4}.
inline double logpath_backward_derivative(double n, double v) {
  if (!(v < 0.0 && v >= -1.0)) throw Error("v must lie in [-1,0)");
  double p = 1.0 / (v * v * v * v);
  if (p > 700.0) throw Overflow("e^{v^-4} overflows; usable range is |v| > 0.25");
  double ep = std::exp(p);
  double L = std::log(n + ep);
  return (-1.0 / (v * v * v * v * v)) * (1.0 / (1.0 + n * std::exp(-p))) *
         std::pow(L, -1.25);
}

struct DecayPoint {
  double n;
  double product;  // (f^n)'(x_n) (f^n)'(y_n) = (f^n)'(x)/(f^{-n})'(v)
};

// Derivative products along the Prop 3.2 sequences, via closed-form iterates
// only (the map is never iterated numerically).
inline std::vector<DecayPoint> prop32_decay(const std::vector<double>& ns,
                                            double x = 1.0, double v = -0.9) {
  std::vector<DecayPoint> out;
  out.reserve(ns.size());
  for (double n : ns) {
    double fwd = logpath_forward_derivative(n, x);
    double bwd = logpath_backward_derivative(n, v);
    out.push_back({n, fwd / bwd});
  }
  return out;
}

// Least-squares slope of log(product) against log(log n).
inline double prop32_fit_slope(const std::vector<DecayPoint>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    double X = std::log(std::log(p.n)), Y = std::log(p.product);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
  }
  double m = double(pts.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace ck

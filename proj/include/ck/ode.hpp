#pragma once

// Adaptive Dormand-Prince 5(4) integration for small fixed-size systems.

#include <array>
#include <cmath>
#include <functional>

#include "ck/error.hpp"

namespace ck {

template <int N>
using OdeState = std::array<double, N>;

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-14;
  long max_steps = 200000;
};

namespace detail {

template <int N, typename F>
inline void dp45_stage(const F& f, double t, const OdeState<N>& y, double h,
                       std::array<OdeState<N>, 7>& k, OdeState<N>& y5,
                       OdeState<N>& err) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  OdeState<N> tmp;
  k[0] = f(t, y);
  for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k[0][i];
  k[1] = f(t + c2 * h, tmp);
  for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
  k[2] = f(t + c3 * h, tmp);
  for (int i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
  k[3] = f(t + c4 * h, tmp);
  for (int i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
  k[4] = f(t + c5 * h, tmp);
  for (int i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] +
                         a64 * k[3][i] + a65 * k[4][i]);
  k[5] = f(t + h, tmp);
  for (int i = 0; i < N; ++i)
    y5[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] +
                        b6 * k[5][i]);
  k[6] = f(t + h, y5);
  for (int i = 0; i < N; ++i)
    err[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                  e6 * k[5][i] + e7 * k[6][i]);
}

}  // namespace detail

// Integrate y' = f(t, y) from t0 to t1 (either direction). The optional
// observer(t, y) runs after each accepted step.
template <int N, typename F,
          typename Obs = std::function<void(double, const OdeState<N>&)>>
inline OdeState<N> ode_integrate(const F& f, OdeState<N> y, double t0, double t1,
                                 const OdeOptions& opt = {}, Obs* observer = nullptr) {
  if (t0 == t1) return y;
  double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  double h = dir * std::min(opt.h_init, std::fabs(t1 - t0));
  std::array<OdeState<N>, 7> k;
  OdeState<N> y5, err;
  for (long step = 0; step < opt.max_steps; ++step) {
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    detail::dp45_stage<N>(f, t, y, h, k, y5, err);
    double emax = 0.0;
    for (int i = 0; i < N; ++i) {
      double sc = opt.abs_tol + opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      emax = std::max(emax, std::fabs(err[i]) / sc);
    }
    if (emax <= 1.0) {
      t += h;
      y = y5;
      if (observer) (*observer)(t, y);
      if (dir * (t - t1) >= 0.0) return y;
    }
    double fac = 0.9 * std::pow(std::max(emax, 1e-10), -0.2);
    fac = std::min(5.0, std::max(0.2, fac));
    h *= fac;
    if (std::fabs(h) < opt.h_min) throw Error("ode step size underflow");
  }
  throw Error("ode step budget exceeded");
}

}  // namespace ck

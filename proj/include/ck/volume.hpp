#pragma once

// Volume forms on the cylinder C = S^1 x S^1 \ diagonal, evaluated as
// log-density jets of order 2 in angle coordinates. The standard form is
// omega0 = 4 dx dy/(x-y)^2 in the chart, i.e. 4 pi^2 / sin^2(pi(x-y))
// in angles.

#include <cmath>
#include <functional>
#include <memory>
#include <utility>

#include "ck/circle.hpp"
#include "ck/diffeo.hpp"

namespace ck {

// Point of C: ordered pair off the diagonal.
struct CylinderPoint {
  CirclePoint x, y;
  CylinderPoint() = default;
  CylinderPoint(CirclePoint x_, CirclePoint y_) : x(x_), y(y_) {
    if (same_point(x, y)) throw NearDiagonal();
  }
  CylinderPoint(double xa, double ya) : CylinderPoint(CirclePoint(xa), CirclePoint(ya)) {}
};

// log-density and its partial derivatives to order 2 (angle coordinates)
struct LogJet2 {
  double L = 0.0;
  double Lx = 0.0, Ly = 0.0;
  double Lxx = 0.0, Lxy = 0.0, Lyy = 0.0;
};

inline LogJet2 logjet_add(const LogJet2& a, const LogJet2& b) {
  return {a.L + b.L,     a.Lx + b.Lx,   a.Ly + b.Ly,
          a.Lxx + b.Lxx, a.Lxy + b.Lxy, a.Lyy + b.Lyy};
}

class VolumeForm;
using VolumePtr = std::shared_ptr<const VolumeForm>;

// Scalar field with order-2 jets, used by Scaled forms.
struct ScalarField2 {
  virtual ~ScalarField2() = default;
  virtual LogJet2 eval(double x, double y) const = 0;
};

class VolumeForm {
 public:
  virtual ~VolumeForm() = default;

  // log-density jet at angle coordinates (x, y), off the diagonal
  virtual LogJet2 log_jet(double x, double y) const = 0;

  double log_density(double x, double y) const { return log_jet(x, y).L; }
  double density(double x, double y) const { return std::exp(log_density(x, y)); }
  double density(const CylinderPoint& p) const { return density(p.x.t, p.y.t); }
};

namespace detail {

class StandardForm final : public VolumeForm {
 public:
  LogJet2 log_jet(double x, double y) const override {
    double d = x - y;
    double s = std::sin(kPi * d);
    if (std::fabs(s) < 1e-14) throw NearDiagonal();
    double cot = std::cos(kPi * d) / s;
    LogJet2 j;
    j.L = std::log(4.0 * kPi * kPi) - 2.0 * std::log(std::fabs(s));
    j.Lx = -2.0 * kPi * cot;
    j.Ly = 2.0 * kPi * cot;
    double csc2 = kPi * kPi * (1.0 + cot * cot);
    j.Lxx = 2.0 * csc2;
    j.Lyy = 2.0 * csc2;
    j.Lxy = -2.0 * csc2;
    return j;
  }
};

// |x^n - y^n|^{-1-1/n} dx dy in the chart; transported to angle coordinates
// with the chart Jacobians. Singular on the chart poles.
class ParabolicForm final : public VolumeForm {
 public:
  explicit ParabolicForm(int n) : n_(n) {
    if (n < 1 || n % 2 == 0) throw Error("ParabolicForm needs odd n >= 1");
  }

  LogJet2 log_jet(double x, double y) const override {
    // chart values and their log-derivative jets
    double cx = std::tan(kPi * x), cy = std::tan(kPi * y);
    if (!std::isfinite(cx) || !std::isfinite(cy) || std::fabs(cx) > 1e130 ||
        std::fabs(cy) > 1e130)
      throw PoleCrossing("parabolic form evaluated at the chart pole");
    double D = ipow_(cx, n_) - ipow_(cy, n_);
    if (std::fabs(D) < 1e-280) throw NearDiagonal();
    double ex = -(1.0 + 1.0 / n_);
    // L = ex*log|D| + log cx'(x) + log cy'(y)
    // with c' = pi (1 + c^2); d/dx log c' = 2 pi c; d2 = 2 pi^2 (1 + c^2)... in
    // angle coordinates: d c/dx = pi(1+c^2).
    double cpx = kPi * (1.0 + cx * cx), cpy = kPi * (1.0 + cy * cy);
    double Dx = double(n_) * ipow_(cx, n_ - 1) * cpx;
    double Dy = -double(n_) * ipow_(cy, n_ - 1) * cpy;
    double Dxx = double(n_) * (double(n_ - 1) * ipow_(cx, n_ - 2) * cpx * cpx +
                               ipow_(cx, n_ - 1) * 2.0 * kPi * cx * cpx);
    double Dyy = -double(n_) * (double(n_ - 1) * ipow_(cy, n_ - 2) * cpy * cpy +
                                ipow_(cy, n_ - 1) * 2.0 * kPi * cy * cpy);
    LogJet2 j;
    j.L = ex * std::log(std::fabs(D)) + std::log(cpx) + std::log(cpy);
    j.Lx = ex * Dx / D + 2.0 * kPi * cx;
    j.Ly = ex * Dy / D + 2.0 * kPi * cy;
    j.Lxx = ex * (Dxx * D - Dx * Dx) / (D * D) + 2.0 * kPi * cpx;
    j.Lyy = ex * (Dyy * D - Dy * Dy) / (D * D) + 2.0 * kPi * cpy;
    j.Lxy = ex * (-Dx * Dy) / (D * D);
    return j;
  }

 private:
  static double ipow_(double v, int e) {
    if (e < 0) return 0.0;
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= v;
    return r;
  }
  int n_;
};

class ScaledForm final : public VolumeForm {
 public:
  ScaledForm(VolumePtr base, std::shared_ptr<const ScalarField2> sigma)
      : base_(std::move(base)), sigma_(std::move(sigma)) {}
  LogJet2 log_jet(double x, double y) const override {
    return logjet_add(base_->log_jet(x, y), sigma_->eval(x, y));
  }

 private:
  VolumePtr base_;
  std::shared_ptr<const ScalarField2> sigma_;
};

// Pullback(omega, f)(x,y) = omega(f x, f y) f'(x) f'(y)
class PullbackForm final : public VolumeForm {
 public:
  PullbackForm(VolumePtr base, DiffeoExpr f) : base_(std::move(base)), f_(std::move(f)) {}
  LogJet2 log_jet(double x, double y) const override {
    Jet3 jx = diffeo_jet3_raw(f_, x);
    Jet3 jy = diffeo_jet3_raw(f_, y);
    LogJet2 b = base_->log_jet(jx.f, jy.f);
    LogJet2 j;
    j.L = b.L + std::log(jx.d1) + std::log(jy.d1);
    j.Lx = b.Lx * jx.d1 + jx.d2 / jx.d1;
    j.Ly = b.Ly * jy.d1 + jy.d2 / jy.d1;
    j.Lxx = b.Lxx * jx.d1 * jx.d1 + b.Lx * jx.d2 +
            (jx.d3 * jx.d1 - jx.d2 * jx.d2) / (jx.d1 * jx.d1);
    j.Lyy = b.Lyy * jy.d1 * jy.d1 + b.Ly * jy.d2 +
            (jy.d3 * jy.d1 - jy.d2 * jy.d2) / (jy.d1 * jy.d1);
    j.Lxy = b.Lxy * jx.d1 * jy.d1;
    return j;
  }

 private:
  VolumePtr base_;
  DiffeoExpr f_;
};

// Pointwise-evaluable density with finite-difference jets (Richardson).
class NumericJetForm : public VolumeForm {
 public:
  explicit NumericJetForm(double fd_step) : h_(fd_step) {}

  virtual double log_value(double x, double y) const = 0;

  LogJet2 log_jet(double x, double y) const override {
    LogJet2 a = fd_jet(x, y, h_);
    LogJet2 b = fd_jet(x, y, 0.5 * h_);
    // Richardson: second-order stencils, error ~ h^2
    LogJet2 j;
    j.L = a.L;
    j.Lx = (4.0 * b.Lx - a.Lx) / 3.0;
    j.Ly = (4.0 * b.Ly - a.Ly) / 3.0;
    j.Lxx = (4.0 * b.Lxx - a.Lxx) / 3.0;
    j.Lyy = (4.0 * b.Lyy - a.Lyy) / 3.0;
    j.Lxy = (4.0 * b.Lxy - a.Lxy) / 3.0;
    last_disagreement_ = std::max(
        {std::fabs(a.Lxx - b.Lxx), std::fabs(a.Lyy - b.Lyy), std::fabs(a.Lxy - b.Lxy)});
    return j;
  }

  double last_fd_disagreement() const { return last_disagreement_; }

 private:
  LogJet2 fd_jet(double x, double y, double h) const {
    auto V = [&](double u, double v) { return log_value(u, v); };
    LogJet2 j;
    double c = V(x, y);
    double xp = V(x + h, y), xm = V(x - h, y);
    double yp = V(x, y + h), ym = V(x, y - h);
    double pp = V(x + h, y + h), pm = V(x + h, y - h), mp = V(x - h, y + h),
           mm = V(x - h, y - h);
    j.L = c;
    j.Lx = (xp - xm) / (2 * h);
    j.Ly = (yp - ym) / (2 * h);
    j.Lxx = (xp - 2 * c + xm) / (h * h);
    j.Lyy = (yp - 2 * c + ym) / (h * h);
    j.Lxy = (pp - pm - mp + mm) / (4 * h * h);
    return j;
  }

  double h_;
  mutable double last_disagreement_ = 0.0;
};

}  // namespace detail

inline VolumePtr make_standard_form() {
  return std::make_shared<const detail::StandardForm>();
}

inline VolumePtr make_parabolic_form(int n) {
  return std::make_shared<const detail::ParabolicForm>(n);
}

inline VolumePtr make_scaled_form(VolumePtr base,
                                  std::shared_ptr<const ScalarField2> sigma) {
  return std::make_shared<const detail::ScaledForm>(std::move(base), std::move(sigma));
}

inline VolumePtr make_pullback_form(VolumePtr base, DiffeoExpr f) {
  return std::make_shared<const detail::PullbackForm>(std::move(base), std::move(f));
}

// omega(f x, f y) f'(x) f'(y) / omega(x, y) - 1
inline double invariance_residual(const VolumeForm& omega, const DiffeoExpr& f,
                                  const CylinderPoint& p) {
  Jet3 jx = diffeo_jet3_raw(f, p.x.t);
  Jet3 jy = diffeo_jet3_raw(f, p.y.t);
  if (circle_dist(CirclePoint(jx.f), CirclePoint(jy.f)) <= kEpsPoint)
    throw NearDiagonal();
  double lhs = omega.log_density(jx.f, jy.f) + std::log(jx.d1) + std::log(jy.d1);
  double rhs = omega.log_density(p.x.t, p.y.t);
  return std::expm1(lhs - rhs);
}

}  // namespace ck

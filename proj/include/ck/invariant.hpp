#pragma once

// Group cocycles over the standard form, Koenigs linearization, invariant
// forms for a single hyperbolic map, the cross-ratio invariant function on
// gap rectangles, and the equivariant invariant form for a deformed
// Schottky representation.

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "ck/cylinder.hpp"
#include "ck/schottky.hpp"
#include "ck/volume.hpp"

namespace ck {

// ------------------------------------------------------------ group cocycle

// log of the invariance ratio of the standard form under the map with the
// given 1-jets: log[w0(img) f'(x) f'(y) / w0(x,y)] in angle coordinates.
inline double pull_increment(const Jet3& jx, const Jet3& jy, double x, double y) {
  double s0 = std::fabs(std::sin(kPi * (x - y)));
  double s1 = std::fabs(std::sin(kPi * (jx.f - jy.f)));
  if (s0 < 1e-15 || s1 < 1e-15) throw NearDiagonal();
  return 2.0 * std::log(s0) - 2.0 * std::log(s1) + std::log(jx.d1) + std::log(jy.d1);
}

// Representation handle: letters act either by the base Moebius maps or by
// the deformed expression trees.
class RepAction {
 public:
  explicit RepAction(const SchottkyRep* base) : base_(base), drep_(nullptr) {}
  explicit RepAction(const DeformedRep* drep)
      : base_(&drep->base()), drep_(drep) {}

  const SchottkyRep& base() const { return *base_; }
  bool deformed() const { return drep_ != nullptr; }
  const DeformedRep* deformed_rep() const { return drep_; }

  Jet3 letter_jet(int l, double t) const {
    if (drep_) return diffeo_jet3_raw(drep_->rho1_letter(l), t);
    return moebius_jet3(base_->moebius_letter(l), CirclePoint(t));
  }

  double letter_apply(int l, double t) const {
    if (drep_) return diffeo_apply(drep_->rho1_letter(l), t);
    return moebius_apply(base_->moebius_letter(l), CirclePoint(t)).t;
  }

  bool clean(int l, CirclePoint p) const {
    return drep_ ? drep_->clean(l, p) : true;
  }

  DiffeoExpr word_expr(const Word& w) const {
    if (drep_) return drep_->rho1_word(w);
    return make_moebius(base_->moebius_word(w));
  }

 private:
  const SchottkyRep* base_;
  const DeformedRep* drep_;
};

// alpha_gamma(x, y) with rho(gamma)^* w0 = e^{-alpha_gamma} w0, evaluated
// letterwise along the word.
inline double cocycle_eval(const RepAction& rep, const Word& gamma,
                           const CylinderPoint& p) {
  double total = 0.0;
  double x = p.x.t, y = p.y.t;
  for (auto it = gamma.letters.rbegin(); it != gamma.letters.rend(); ++it) {
    Jet3 jx = rep.letter_jet(*it, x);
    Jet3 jy = rep.letter_jet(*it, y);
    total += pull_increment(jx, jy, x, y);
    x = jx.f;
    y = jy.f;
  }
  return -total;
}

// alpha_gamma(N, S) = -log(rho(gamma)'(N) rho(gamma)'(S)) at the two fixed
// points of the word.
inline double periodic_obstruction(const RepAction& rep, const Word& gamma,
                                   int grid = 1024) {
  if (!rep.deformed()) {
    MoebiusMap m = rep.base().moebius_word(gamma);
    auto fps = moebius_fixed_points(m);
    if (fps.size() != 2) throw NotHyperbolicLike();
    return -std::log(fps[0].derivative * fps[1].derivative);
  }
  auto fps = fixed_points_diffeo(rep.word_expr(gamma), grid);
  if (fps.size() != 2) throw NotHyperbolicLike();
  return -std::log(fps[0].derivative * fps[1].derivative);
}

// ------------------------------------------------------ Koenigs linearization

// h_N with h_N(f(x)) = lambda h_N(x), h_N(N) = 0, h_N'(N) = 1 in the chart
// centered at N. Evaluated by iterating f with running jets: the multiplier
// pulls back the chart coordinate of the deep orbit point.
class KoenigsChart {
 public:
  KoenigsChart(DiffeoExpr f, CirclePoint attracting)
      : f_(std::move(f)), center_(attracting) {
    Jet3 j0 = diffeo_jet3_raw(f_, center_.t);
    lambda_ = j0.d1;
    if (!(lambda_ > 0.0 && lambda_ < 1.0)) throw NotAttracting();
    if (lambda_ > 1.0 - 1e-4) throw SlowConvergence();
  }

  double multiplier() const { return lambda_; }
  CirclePoint center() const { return center_; }

  // kappa and its first three derivatives with respect to the angle
  Jet3 jet(double t) const {
    Jet3 orbit = Jet3::identity(wrap01(t));
    double prev = 1e300;
    double scale = 1.0;
    for (int n = 0; n < 400; ++n) {
      double local = local_coord_(orbit.f);
      double est = local / scale;  // lambda^{-n} chi(f^n x)
      if (n > 3 && std::fabs(est - prev) <= 1e-11 * std::max(1.0, std::fabs(est))) {
        Jet3 chi = chart_jet_centered_(orbit.f);
        Jet3 total = jet_compose(chi, orbit);
        return Jet3(total.f / scale, total.d1 / scale, total.d2 / scale,
                    total.d3 / scale);
      }
      prev = est;
      Jet3 step = diffeo_jet3_raw(f_, orbit.f);
      orbit = jet_compose(step, orbit);
      scale *= lambda_;
    }
    throw SlowConvergence("Koenigs iteration did not settle");
  }

  double eval(double t) const { return jet(t).f; }

 private:
  double local_coord_(double t) const {
    return std::tan(kPi * (wrap01(t - center_.t + 0.5) - 0.5));
  }
  Jet3 chart_jet_centered_(double t) const {
    return detail::chart_jet(wrap01(t - center_.t + 0.5) - 0.5);
  }

  DiffeoExpr f_;
  CirclePoint center_;
  double lambda_;
};

// ----------------------------------------- invariant form of a single map

namespace detail {

inline double smoothstep_c3(double s) {  // septic, flat to third order
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  double s4 = s * s * s * s;
  return s4 * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
}

inline double smoothstep_c3_d(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double s3 = s * s * s;
  return s3 * (140.0 - 420.0 * s + 420.0 * s * s - 140.0 * s * s * s);
}

inline double smoothstep_c3_dd(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double s2 = s * s;
  return s2 * (420.0 - 1680.0 * s + 2100.0 * s2 - 840.0 * s2 * s);
}

// log kappa'(t) and two more derivatives, from the order-3 kappa jet
struct LogDeriv2 {
  double v, d1, d2;
};

inline LogDeriv2 log_d1_jet(const Jet3& j) {
  double l = std::log(j.d1);
  double l1 = j.d2 / j.d1;
  double l2 = j.d3 / j.d1 - l1 * l1;
  return {l, l1, l2};
}

}  // namespace detail

// Form kappa_N'(x) kappa_S'(y) near the (N,S) axes blended with the mirror
// patch near (S,N); each patch is exactly f-invariant and the blend weight
// depends only on the f-invariant combination log|kN(x)| - log|kN(y)|.
class SingleMapInvariantForm final : public VolumeForm {
 public:
  SingleMapInvariantForm(DiffeoExpr f, CirclePoint N, CirclePoint S)
      : kn_(f, N), ks_(make_inverse(f), S) {
    loglam_ = std::log(kn_.multiplier());
    // one-point normalization: match the standard form at a reference axis
    // point (angle offset from N along the circle, at y = S)
    double xr = wrap01(N.t + 0.37 * wrap01(S.t - N.t));
    auto w0 = make_standard_form();
    norm1_ = 0.0;
    norm2_ = 0.0;
    LogJet2 mine = log_jet(xr, S.t);
    norm1_ = w0->log_jet(xr, S.t).L - mine.L;
    LogJet2 mirror = log_jet(S.t == 0.0 ? 0.0 : S.t, xr);  // placeholder
    (void)mirror;
    norm2_ = norm1_;
  }

  LogJet2 log_jet(double x, double y) const override {
    Jet3 knx = kn_.jet(x), kny = kn_.jet(y);
    double v = (std::log(std::fabs(knx.f)) - std::log(std::fabs(kny.f))) / (-loglam_);
    // weight: 0 on the (N,S) side (v -> -inf), 1 on the (S,N) side
    double s = 0.5 * (v / 8.0 + 1.0);
    double W = detail::smoothstep_c3(s);
    LogJet2 j;
    if (W < 1.0) {
      Jet3 ksy = ks_.jet(y);
      detail::LogDeriv2 a = detail::log_d1_jet(knx);
      detail::LogDeriv2 b = detail::log_d1_jet(ksy);
      accumulate_(j, 1.0 - W, a, b, knx, kny, v, s, false, x, y);
    }
    if (W > 0.0) {
      Jet3 ksx = ks_.jet(x);
      Jet3 kny2 = kny;
      detail::LogDeriv2 a = detail::log_d1_jet(ksx);
      detail::LogDeriv2 b = detail::log_d1_jet(kny2);
      accumulate_(j, W, a, b, knx, kny, v, s, true, x, y);
    }
    j.L += norm1_;
    return j;
  }

 private:
  // adds weight * (a(x) + b(y)) with the weight's own v-derivatives folded in
  void accumulate_(LogJet2& j, double weight, const detail::LogDeriv2& a,
                   const detail::LogDeriv2& b, const Jet3& knx, const Jet3& kny,
                   double v, double s, bool mirror, double, double) const {
    // v_x = kn'(x)/kn(x)/(-loglam), v_y = -kn'(y)/kn(y)/(-loglam)
    double vx = knx.d1 / knx.f / (-loglam_);
    double vy = -kny.d1 / kny.f / (-loglam_);
    double vxx = (knx.d2 * knx.f - knx.d1 * knx.d1) / (knx.f * knx.f) / (-loglam_);
    double vyy = -(kny.d2 * kny.f - kny.d1 * kny.d1) / (kny.f * kny.f) / (-loglam_);
    double ds = 1.0 / 16.0;  // d s / d v
    double W1 = detail::smoothstep_c3_d(s) * ds;
    double W2 = detail::smoothstep_c3_dd(s) * ds * ds;
    double sgn = mirror ? 1.0 : -1.0;  // weight = W or 1-W
    double base = a.v + b.v;
    j.L += weight * base;
    j.Lx += weight * a.d1 + sgn * W1 * vx * base;
    j.Ly += weight * b.d1 + sgn * W1 * vy * base;
    j.Lxx += weight * a.d2 + 2.0 * sgn * W1 * vx * a.d1 +
             sgn * (W2 * vx * vx + W1 * vxx) * base;
    j.Lyy += weight * b.d2 + 2.0 * sgn * W1 * vy * b.d1 +
             sgn * (W2 * vy * vy + W1 * vyy) * base;
    j.Lxy += sgn * W1 * (vx * b.d1 + vy * a.d1) + sgn * W2 * vx * vy * base;
    (void)v;
  }

  KoenigsChart kn_, ks_;
  double loglam_;
  double norm1_, norm2_;
};

// Invariant volume form of a single two-fixed-point map; SpectralFail when
// the derivative product obstruction is nonzero.
inline VolumePtr hyperbolic_invariant_form(const DiffeoExpr& f, int grid = 512) {
  auto fps = fixed_points_diffeo(f, grid);
  if (fps.size() != 2) throw NotHyperbolicLike();
  double prod = fps[0].derivative * fps[1].derivative;
  if (std::fabs(prod - 1.0) > kEpsSpectral ||
      std::fabs(fps[0].derivative - 1.0) <= kEpsSpectral)
    throw SpectralFail();
  CirclePoint N = fps[0].derivative < 1.0 ? fps[0].point : fps[1].point;
  CirclePoint S = fps[0].derivative < 1.0 ? fps[1].point : fps[0].point;
  return std::make_shared<const SingleMapInvariantForm>(f, N, S);
}

// ----------------------------------- invariant function on gap rectangles

struct GapInterval {
  Arc arc;      // the full connected component of the complement of L
  Word route;   // route steering it onto a primary gap
  int primary;  // index of the primary gap reached
};

inline GapInterval locate_gap(const SchottkyRep& rep, CirclePoint x,
                              int max_depth = 24) {
  Coding c = code_point(rep, x, max_depth);
  const GapInfo& g = rep.gaps()[c.gap];
  // true gap endpoints are the stabilizer fixed points; transport back
  MoebiusMap back = rep.moebius_word(c.word).inverse();
  Arc J = cyclic(g.repel, g.between.midpoint(), g.attract) ? Arc(g.repel, g.attract)
                                                           : Arc(g.attract, g.repel);
  GapInterval out;
  out.arc = Arc(moebius_apply(back, J.a), moebius_apply(back, J.b));
  out.route = c.word;
  out.primary = c.gap;
  return out;
}

struct InvariantFunctionProfile {
  double threshold = 1e-6;  // constant (= 0) below this sigma value
  double width = 1.0;
  double eval(double sigma) const {
    return detail::smoothstep_c3((sigma - threshold) / width);
  }
};

// F(sigma(x)) with sigma the product of the four corner-rectangle areas of
// the gap rectangle containing p; 0 on the limit-set grid and on
// same-gap squares.
inline double prop54_invariant_function(const SchottkyRep& rep,
                                        const InvariantFunctionProfile& F,
                                        const CylinderPoint& p, int max_depth = 24) {
  GapInterval gx, gy;
  try {
    gx = locate_gap(rep, p.x, max_depth);
    gy = locate_gap(rep, p.y, max_depth);
  } catch (const DepthExceeded&) {
    return F.eval(0.0);  // indistinguishable from the limit set
  }
  if (same_point(gx.arc.a, gy.arc.a) && same_point(gx.arc.b, gy.arc.b))
    return F.eval(0.0);  // same-gap square
  // four corner rectangles
  const Arc& I = gx.arc;
  const Arc& J = gy.arc;
  double r1 = rect_area_standard(Arc(I.a, p.x), Arc(J.a, p.y));
  double r2 = rect_area_standard(Arc(p.x, I.b), Arc(J.a, p.y));
  double r3 = rect_area_standard(Arc(I.a, p.x), Arc(p.y, J.b));
  double r4 = rect_area_standard(Arc(p.x, I.b), Arc(p.y, J.b));
  return F.eval(r1 * r2 * r3 * r4);
}

// --------------------------------------- equivariant form for deformations

struct SigmaStats {
  long evaluations = 0;
  long max_steps_seen = 0;
  long cap_hits = 0;
};

// The invariant density e^{sigma} w0 for a deformed representation.
// sigma(p) accumulates the exact cocycle increments along a canonical
// steering route: code the x coordinate into the primary gap system, march
// gaps by their stabilizers until the orbit is captured at the stabilizer's
// fixed point, then steer by the y coordinate, stopping once every future
// increment provably vanishes (both orbits clear of the bump zones and
// inside the disk chains or captured near the limit set).
class EquivariantForm final : public detail::NumericJetForm {
 public:
  explicit EquivariantForm(std::shared_ptr<const DeformedRep> drep,
                           double fd_step = kCurvatureFdStep)
      : NumericJetForm(fd_step), drep_(std::move(drep)), rep_(drep_.get()) {}

  const DeformedRep& deformed() const { return *drep_; }

  double log_value(double x, double y) const override {
    return sigma(x, y) + w0_->log_jet(x, y).L;
  }

  // Steering decision for one coordinate: 0 = captured at the limit set,
  // otherwise the word to apply next. Membership in a full gap component
  // (the interval between its stabilizer's fixed points) takes priority
  // over disk membership, so the stabilizer march runs to its capture
  // radius instead of livelocking against the coding.
  struct Steer {
    bool captured;
    bool coding;  // true: single disk letter, false: stabilizer word
    Word word;
  };

  Steer steer_(double t, int code_steps) const {
    const SchottkyRep& base = drep_->base();
    CirclePoint p(t);
    const double delta_cap = 1e-7;
    for (const auto& gi : base.gaps()) {
      Arc J = cyclic(gi.repel, gi.between.midpoint(), gi.attract)
                  ? Arc(gi.repel, gi.attract)
                  : Arc(gi.attract, gi.repel);
      if (!J.contains_closed(p)) continue;
      if (circle_dist(p, gi.repel) <= delta_cap ||
          circle_dist(p, gi.attract) <= delta_cap)
        return {true, false, {}};
      return {false, false, gi.stab_word.inverse()};
    }
    int l = base.disk_containing(p);
    if (l != 0 && code_steps < code_depth_) return {false, true, Word::letter(-l)};
    return {true, false, {}};  // deep in the cover: numerically on the limit set
  }

  double sigma(double x, double y) const {
    double total = 0.0;
    long steps = 0;
    stats_.evaluations++;
    int x_code = 0, y_code = 0;
    for (int outer = 0; outer < 400; ++outer) {
      if (circle_dist(CirclePoint(x), CirclePoint(y)) < 1e-11) break;
      Steer s = steer_(x, x_code);
      bool steering_y = s.captured;
      if (steering_y) s = steer_(y, y_code);
      if (s.captured) break;  // both sides settled at the limit set
      if (s.coding) (steering_y ? y_code : x_code)++;
      for (auto it = s.word.letters.rbegin(); it != s.word.letters.rend(); ++it) {
        int m = *it;
        bool clean = rep_.clean(m, CirclePoint(x)) && rep_.clean(m, CirclePoint(y));
        Jet3 jx, jy;
        if (clean) {
          // pure Moebius action: the increment vanishes identically
          const MoebiusMap& g = drep_->base().moebius_letter_ref(m);
          x = moebius_apply(g, CirclePoint(x)).t;
          y = moebius_apply(g, CirclePoint(y)).t;
        } else {
          jx = rep_.letter_jet(m, x);
          jy = rep_.letter_jet(m, y);
          total += pull_increment(jx, jy, x, y);
          x = jx.f;
          y = jy.f;
        }
        ++steps;
      }
      if (outer == 399) stats_.cap_hits++;
    }
    stats_.max_steps_seen = std::max(stats_.max_steps_seen, steps);
    return total;
  }

  const SigmaStats& stats() const { return stats_; }

 private:
  std::shared_ptr<const DeformedRep> drep_;
  RepAction rep_;
  VolumePtr w0_ = make_standard_form();
  mutable SigmaStats stats_;
};

inline std::shared_ptr<const EquivariantForm> build_deformed_invariant_form(
    std::shared_ptr<const DeformedRep> drep, double fd_step = kCurvatureFdStep) {
  return std::make_shared<const EquivariantForm>(std::move(drep), fd_step);
}

}  // namespace ck

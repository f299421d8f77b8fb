#pragma once

// Order-3 jets of one-dimensional maps and their composition calculus.

#include <cmath>

#include "ck/error.hpp"

namespace ck {

// Value and first three derivatives of a map at a point, in a fixed
// coordinate. d1 > 0 for orientation-preserving circle maps.
struct Jet3 {
  double f = 0.0, d1 = 1.0, d2 = 0.0, d3 = 0.0;
  Jet3() = default;
  Jet3(double f_, double d1_, double d2_, double d3_) : f(f_), d1(d1_), d2(d2_), d3(d3_) {}
  static Jet3 identity(double at) { return Jet3(at, 1.0, 0.0, 0.0); }
};

// Jet of outer∘inner (Faa di Bruno to order 3); outer is the jet of the
// outer map at inner.f.
inline Jet3 jet_compose(const Jet3& outer, const Jet3& inner) {
  Jet3 r;
  r.f = outer.f;
  r.d1 = outer.d1 * inner.d1;
  r.d2 = outer.d2 * inner.d1 * inner.d1 + outer.d1 * inner.d2;
  r.d3 = outer.d3 * inner.d1 * inner.d1 * inner.d1 +
         3.0 * outer.d2 * inner.d1 * inner.d2 + outer.d1 * inner.d3;
  return r;
}

// Jet of the inverse map at the image point, from the jet of the map.
inline Jet3 jet_invert(const Jet3& j, double preimage) {
  if (!(j.d1 > 0.0)) throw JetUnavailable("non-positive derivative in jet_invert");
  Jet3 r;
  r.f = preimage;
  double g1 = 1.0 / j.d1;
  r.d1 = g1;
  r.d2 = -j.d2 * g1 * g1 * g1;
  r.d3 = (3.0 * j.d2 * j.d2 - j.d1 * j.d3) * g1 * g1 * g1 * g1 * g1;
  return r;
}

// Schwarzian derivative from a 3-jet: f'''/f' - (3/2)(f''/f')^2.
inline double jet_schwarzian(const Jet3& j) {
  double q = j.d2 / j.d1;
  return j.d3 / j.d1 - 1.5 * q * q;
}

}  // namespace ck

#pragma once

// Marked free groups of Moebius maps with ping-pong certificates: word
// enumeration, limit-set covers, point coding, gap stabilizers, and
// limit-set-fixing deformations rho_1 = phi^{-1} rho_0 phi.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ck/diffeo.hpp"
#include "ck/moebius.hpp"

namespace ck {

// Letters are +-1, ..., +-n for generators a_1..a_n and their inverses.
struct Word {
  std::vector<int8_t> letters;

  Word() = default;
  explicit Word(std::vector<int8_t> ls) : letters(std::move(ls)) { reduce(); }

  static Word identity() { return Word(); }
  static Word letter(int l) { return Word({int8_t(l)}); }

  size_t length() const { return letters.size(); }
  bool empty() const { return letters.empty(); }

  void reduce() {
    std::vector<int8_t> out;
    for (int8_t l : letters) {
      if (!out.empty() && out.back() == -l)
        out.pop_back();
      else
        out.push_back(l);
    }
    letters = std::move(out);
  }

  Word inverse() const {
    Word w;
    w.letters.reserve(letters.size());
    for (auto it = letters.rbegin(); it != letters.rend(); ++it)
      w.letters.push_back(int8_t(-*it));
    return w;
  }

  friend Word operator*(const Word& u, const Word& v) {
    Word w;
    w.letters = u.letters;
    w.letters.insert(w.letters.end(), v.letters.begin(), v.letters.end());
    w.reduce();
    return w;
  }

  bool operator==(const Word& o) const { return letters == o.letters; }

  std::string str() const {
    if (letters.empty()) return "e";
    std::string s;
    for (int8_t l : letters) {
      char c = char('a' + std::abs(l) - 1);
      s += (l > 0) ? c : char(std::toupper(c));
    }
    return s;
  }
};

// index of a letter in arrays ordered a1, a1^-1, a2, a2^-1, ...
inline int letter_index(int l) { return 2 * (std::abs(l) - 1) + (l < 0 ? 1 : 0); }

struct SchottkyParams {
  // per generator: attracting arc center, repelling arc center, arc width,
  // translation length
  struct Gen {
    double attract_center;
    double repel_center;
    double width;
    double translation_length;
  };
  std::vector<Gen> gens;
};

struct GapInfo {
  Arc between;          // the primary gap between consecutive ping-pong arcs
  Word stab_word;       // generator of the gap stabilizer
  MoebiusMap stab0;     // its Moebius image in the base representation
  CirclePoint attract;  // attracting fixed point of stab0 (one gap endpoint)
  CirclePoint repel;    // repelling fixed point (the other endpoint)
};

class SchottkyRep {
 public:
  explicit SchottkyRep(const SchottkyParams& params) {
    if (params.gens.empty()) throw Error("need at least one generator");
    for (const auto& g : params.gens) {
      gens_.push_back(moebius_hyperbolic(chart(CirclePoint(g.attract_center)),
                                         chart(CirclePoint(g.repel_center)),
                                         g.translation_length));
      double hw = 0.5 * g.width;
      arcs_.push_back(Arc(CirclePoint(g.attract_center - hw),
                          CirclePoint(g.attract_center + hw)));
      arcs_.push_back(
          Arc(CirclePoint(g.repel_center - hw), CirclePoint(g.repel_center + hw)));
    }
    certify_();
    find_gaps_();
  }

  int num_generators() const { return int(gens_.size()); }
  int num_letters() const { return 2 * int(gens_.size()); }

  const MoebiusMap& generator(int i) const { return gens_[i]; }  // 0-based

  MoebiusMap moebius_letter(int l) const {
    return l > 0 ? gens_[l - 1] : gens_[-l - 1].inverse();
  }

  MoebiusMap moebius_word(const Word& w) const {
    MoebiusMap m;
    for (int8_t l : w.letters) m = m * moebius_letter(l);
    return m;
  }

  const Arc& disk(int l) const { return arcs_[letter_index(l)]; }
  const std::vector<Arc>& disks() const { return arcs_; }

  double certificate_margin() const { return margin_; }

  // letter whose ping-pong arc contains p, or 0
  int disk_containing(CirclePoint p) const {
    static const int kLetterOf[] = {0};
    (void)kLetterOf;
    for (int g = 1; g <= num_generators(); ++g) {
      if (arcs_[letter_index(g)].contains_closed(p)) return g;
      if (arcs_[letter_index(-g)].contains_closed(p)) return -g;
    }
    return 0;
  }

  const std::vector<GapInfo>& gaps() const { return gaps_; }

  int gap_containing(CirclePoint p) const {  // index into gaps(), or -1
    for (size_t i = 0; i < gaps_.size(); ++i)
      if (gaps_[i].between.contains_closed(p)) return int(i);
    return -1;
  }

 private:
  void certify_() {
    int L = num_letters();
    for (int i = 0; i < L; ++i)
      for (int j = i + 1; j < L; ++j)
        if (!arcs_disjoint(arcs_[i], arcs_[j]))
          throw PingPongFailure("ping-pong arcs intersect: " + std::to_string(i) +
                                "," + std::to_string(j));
    margin_ = 1.0;
    for (int g = 1; g <= num_generators(); ++g) {
      for (int l : {g, -g}) {
        MoebiusMap m = moebius_letter(l);
        const Arc& target = disk(l);
        const Arc& source = disk(-l);
        // complement of the repelling disk, counterclockwise
        Arc compl_arc(source.b, source.a);
        Arc image(moebius_apply(m, compl_arc.a), moebius_apply(m, compl_arc.b));
        double lo = wrap01(image.a.t - target.a.t);
        double hi = wrap01(target.b.t - image.b.t);
        double inside = target.width() - image.width();
        if (lo > target.width() || hi > target.width() || inside <= 0.0)
          throw PingPongFailure("letter " + std::to_string(l) +
                                " does not contract into its arc");
        margin_ = std::min({margin_, lo, hi});
      }
    }
  }

  void find_gaps_();

  std::vector<MoebiusMap> gens_;
  std::vector<Arc> arcs_;  // indexed by letter_index
  std::vector<GapInfo> gaps_;
  double margin_ = 0.0;
};

// ----------------------------------------------------------------- presets

inline SchottkyRep make_symmetric_2gen(double width = 0.1, double ell = 4.0) {
  SchottkyParams p;
  p.gens.push_back({0.0, 0.5, width, ell});
  p.gens.push_back({0.25, 0.75, width, ell});
  return SchottkyRep(p);
}

inline SchottkyRep make_single_hyperbolic(double width = 0.2, double ell = 2.5) {
  SchottkyParams p;
  p.gens.push_back({0.0, 0.5, width, ell});
  return SchottkyRep(p);
}

// ------------------------------------------------------------- enumeration

struct EnumeratedWord {
  Word word;
  MoebiusMap map;
};

inline long reduced_word_count(int n, int length) {
  // 1 + sum_{k=1..L} 2n (2n-1)^{k-1}
  long total = 1, layer = 2 * n;
  for (int k = 1; k <= length; ++k) {
    total += layer;
    layer *= (2 * n - 1);
  }
  return total;
}

inline std::vector<EnumeratedWord> enumerate_words(const SchottkyRep& rep, int length,
                                                   long cap = 2000000) {
  if (length < 0) throw Error("enumerate_words needs length >= 0");
  if (reduced_word_count(rep.num_generators(), length) > cap) throw BudgetExceeded();
  std::vector<EnumeratedWord> out;
  out.push_back({Word::identity(), MoebiusMap::identity()});
  size_t layer_begin = 0, layer_end = 1;
  for (int k = 1; k <= length; ++k) {
    size_t next_begin = out.size();
    for (size_t i = layer_begin; i < layer_end; ++i) {
      for (int g = 1; g <= rep.num_generators(); ++g) {
        for (int l : {g, -g}) {
          const Word& w = out[i].word;
          if (!w.empty() && w.letters.front() == -l) continue;
          Word nw;
          nw.letters.reserve(w.length() + 1);
          nw.letters.push_back(int8_t(l));
          nw.letters.insert(nw.letters.end(), w.letters.begin(), w.letters.end());
          out.push_back({std::move(nw), rep.moebius_letter(l) * out[i].map});
        }
      }
    }
    layer_begin = next_begin;
    layer_end = out.size();
  }
  return out;
}

// ---------------------------------------------------------- limit-set cover

struct CoverArc {
  Arc arc;
  Word word;  // the arc is word-prefix applied to the last letter's disk
};

inline std::vector<CoverArc> limit_set_cover(const SchottkyRep& rep, int depth,
                                             long cap = 2000000) {
  if (depth < 1) throw Error("limit_set_cover needs depth >= 1");
  double count = 2.0 * rep.num_generators();
  for (int k = 1; k < depth; ++k) count *= (2 * rep.num_generators() - 1);
  if (count > double(cap)) throw BudgetExceeded();
  std::vector<CoverArc> layer;
  for (int g = 1; g <= rep.num_generators(); ++g)
    for (int l : {g, -g}) layer.push_back({rep.disk(l), Word::letter(l)});
  for (int k = 2; k <= depth; ++k) {
    std::vector<CoverArc> next;
    next.reserve(layer.size() * (2 * rep.num_generators() - 1));
    for (const auto& ca : layer) {
      int first = ca.word.letters.front();
      for (int g = 1; g <= rep.num_generators(); ++g) {
        for (int l : {g, -g}) {
          if (l == -first) continue;
          MoebiusMap m = rep.moebius_letter(l);
          Arc img(moebius_apply(m, ca.arc.a), moebius_apply(m, ca.arc.b));
          Word w = Word::letter(l) * ca.word;
          next.push_back({img, std::move(w)});
        }
      }
    }
    layer = std::move(next);
  }
  return layer;
}

inline double max_cover_width(const std::vector<CoverArc>& cover) {
  double w = 0.0;
  for (const auto& c : cover) w = std::max(w, c.arc.width());
  return w;
}

// ------------------------------------------------------------- point coding

struct Coding {
  Word word;          // gamma with gamma(x) in the primary gap system
  CirclePoint image;  // gamma(x)
  int gap = -1;       // index of the primary gap reached
};

// Steers x into the primary gap system by repeatedly applying the inverse of
// the letter whose disk contains it. Deterministic; shortest word.
inline Coding code_point(const SchottkyRep& rep, CirclePoint x, int max_depth = 24) {
  Coding c;
  c.image = x;
  for (int d = 0; d <= max_depth; ++d) {
    int l = rep.disk_containing(c.image);
    if (l == 0) {
      c.gap = rep.gap_containing(c.image);
      if (c.gap < 0) throw Error("point escaped both disks and gaps");
      return c;
    }
    if (d == max_depth) break;
    c.image = moebius_apply(rep.moebius_letter(-l), c.image);
    c.word = Word::letter(-l) * c.word;
  }
  throw DepthExceeded("point is inside the limit-set cover at max depth");
}

inline void SchottkyRep::find_gaps_() {
  // primary gaps: between consecutive ping-pong arcs
  std::vector<Arc> sorted = arcs_;
  std::sort(sorted.begin(), sorted.end(),
            [](const Arc& x, const Arc& y) { return x.a.t < y.a.t; });
  std::vector<Arc> gaps;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const Arc& cur = sorted[i];
    const Arc& nxt = sorted[(i + 1) % sorted.size()];
    gaps.push_back(Arc(cur.b, nxt.a));
  }
  // stabilizer search: the gap endpoints are the fixed points of a primitive
  // hyperbolic word whose axis interval contains the gap and avoids the
  // limit-set cover
  auto words = enumerate_words(*this, num_generators() == 1 ? 1 : 8, 3000000);
  auto cover = limit_set_cover(*this, num_generators() == 1 ? 4 : 6, 3000000);
  for (const Arc& gap : gaps) {
    CirclePoint mid = gap.midpoint();
    bool found = false;
    for (const auto& ew : words) {
      if (ew.word.empty()) continue;
      if (moebius_classify(ew.map) != MoebiusClass::Hyperbolic) continue;
      auto fps = moebius_fixed_points(ew.map);
      if (fps.size() != 2) continue;
      CirclePoint N = fps[0].point, S = fps[1].point;
      // candidate interval from S to N (either direction) containing mid
      Arc J = cyclic(S, mid, N) ? Arc(S, N) : Arc(N, S);
      if (!J.contains(mid)) continue;
      if (J.width() > 0.5) continue;  // gap intervals here are all short
      // J must avoid the limit set except near its endpoints; the shrink
      // scale follows the cover resolution at this depth
      double shrink = 2.0 * max_cover_width(cover) + 1e-9;
      if (J.width() <= 3.0 * shrink) continue;
      Arc J_inner(CirclePoint(J.a.t + shrink), CirclePoint(J.b.t - shrink));
      bool clean = true;
      for (const auto& ca : cover) {
        if (!arcs_disjoint(J_inner, ca.arc)) {
          clean = false;
          break;
        }
      }
      if (!clean) continue;
      GapInfo info;
      info.between = gap;
      info.stab_word = ew.word;
      info.stab0 = ew.map;
      info.attract = fps[0].point;
      info.repel = fps[1].point;
      gaps_.push_back(info);
      found = true;
      break;
    }
    if (!found) throw StabilizerMissing("no stabilizer found for a primary gap");
  }
}

// --------------------------------------------------------------- deformation

enum class DeformTarget { Generator1 = 1, Generator2 = 2 };

struct GapBumpSpec {
  int generator = 1;     // which conjugator the bump joins (1-based)
  int gap = 0;           // primary gap index
  double center_rel = 0.5;
  double width_rel = 0.6;      // of the gap width
  double amplitude_rel = 0.2;  // of the gap width
  BumpProfile profile = BumpProfile::Mound;
};

struct ZoneIntervals {
  std::vector<Arc> arcs;
  bool contains(CirclePoint p) const {
    for (const auto& a : arcs)
      if (a.contains_closed(p)) return true;
    return false;
  }
};

class DeformedRep {
 public:
  DeformedRep(SchottkyRep base, const std::vector<GapBumpSpec>& specs)
      : base_(std::move(base)) {
    int n = base_.num_generators();
    conjugators_.assign(n, nullptr);
    std::vector<std::vector<Arc>> supports(n);
    for (const auto& s : specs) {
      if (s.generator < 1 || s.generator > n) throw Error("bad generator index");
      if (s.gap < 0 || s.gap >= int(base_.gaps().size())) throw Error("bad gap index");
      const Arc& gap = base_.gaps()[s.gap].between;
      double gw = gap.width();
      double hw = 0.5 * s.width_rel * gw;
      double center = gap.a.t + s.center_rel * gw;
      Arc support(CirclePoint(center - hw), CirclePoint(center + hw));
      // support must stay strictly inside the gap
      if (!(s.center_rel - 0.5 * s.width_rel > 0.02 &&
            s.center_rel + 0.5 * s.width_rel < 0.98))
        throw BumpEscapesGap();
      DiffeoExpr bump = make_bump(support, s.amplitude_rel * gw, s.profile);
      int gi = s.generator - 1;
      conjugators_[gi] =
          conjugators_[gi] ? make_compose(bump, conjugators_[gi]) : bump;
      supports[gi].push_back(support);
    }
    for (int i = 0; i < n; ++i)
      if (!conjugators_[i]) conjugators_[i] = make_rotation(0.0);
    // rho1 per letter and bump-influence zones
    rho1_.resize(2 * n);
    zones_.resize(2 * n);
    for (int g = 1; g <= n; ++g) {
      DiffeoExpr phi = conjugators_[g - 1];
      DiffeoExpr phi_inv = make_inverse(phi);
      DiffeoExpr gen = make_moebius(base_.generator(g - 1));
      DiffeoExpr gen_inv = make_moebius(base_.generator(g - 1).inverse());
      rho1_[letter_index(g)] = make_compose(phi_inv, make_compose(gen, phi));
      rho1_[letter_index(-g)] = make_compose(phi_inv, make_compose(gen_inv, phi));
      for (const Arc& sup : supports[g - 1]) {
        Arc padded = sup.padded(1e-9);
        for (int l : {g, -g}) {
          zones_[letter_index(l)].arcs.push_back(padded);
          // preimage of the support under rho1(l)
          DiffeoExpr inv = make_inverse(rho1_according(l));
          Arc pre(diffeo_point(inv, padded.a), diffeo_point(inv, padded.b));
          zones_[letter_index(l)].arcs.push_back(pre.padded(1e-9));
        }
      }
    }
  }

  const SchottkyRep& base() const { return base_; }
  const DiffeoExpr& conjugator(int gen1based) const {
    return conjugators_[gen1based - 1];
  }
  const DiffeoExpr& rho1_letter(int l) const { return rho1_[letter_index(l)]; }
  const ZoneIntervals& zone(int l) const { return zones_[letter_index(l)]; }

  DiffeoExpr rho1_word(const Word& w) const {
    if (w.empty()) return make_rotation(0.0);
    DiffeoExpr e = rho1_letter(w.letters.back());
    for (auto it = w.letters.rbegin() + 1; it != w.letters.rend(); ++it)
      e = make_compose(rho1_letter(*it), e);
    return e;
  }

  // true if rho1(l) acts with exactly Moebius jets at p
  bool clean(int l, CirclePoint p) const { return !zone(l).contains(p); }

 private:
  // helper used during construction before rho1_ is fully populated
  DiffeoExpr rho1_according(int l) const { return rho1_[letter_index(l)]; }

  SchottkyRep base_;
  std::vector<DiffeoExpr> conjugators_;
  std::vector<DiffeoExpr> rho1_;
  std::vector<ZoneIntervals> zones_;
};

}  // namespace ck

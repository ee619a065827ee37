#pragma once

// Independent reference implementations used as oracles by the tests. They
// read raw tables only and share no code paths with the library's
// evaluators, searches or quotient builders.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmw/fmw.hpp"

namespace oracle {

using fmw::Element;
using fmw::FiniteStructure;

inline const char* workbench_path() { return FMW_SAMPLES_DIR "/workbench.fmw"; }

inline const char* workbench_text() {
  return R"(
signature Graph { rel r/2; }
signature Mag { fn m/2; }
signature Succ { fn s/1; }
structure P_edge : Graph { universe 2; rel r = {(0,1)}; }
structure S_sym : Graph { universe 2; rel r = {(0,1), (1,0)}; }
structure S_loop : Graph { universe 1; rel r = {(0,0)}; }
structure Path3 : Graph { universe 3; rel r = {(0,1), (1,2)}; }
structure Z2 : Mag { universe 2; fn m = [0,1; 1,0]; }
structure Z4 : Mag { universe 4; fn m = [0,1,2,3; 1,2,3,0; 2,3,0,1; 3,0,1,2]; }
structure LeftProj : Mag { universe 2; fn m = [0,0; 1,1]; }
structure unit : Mag { universe 1; fn m = [0]; }
structure Z3 : Succ { universe {a, b, c}; fn s = [1, 2, 0]; }
formula sym : Graph = r(x,y) |- r(y,x)
formula trans : Graph = r(x,y) & r(y,z) |- r(x,z)
formula irrefl : Graph = r(x,x) |- false
formula comm : Mag = |- m(x,y) = m(y,x)
formula assoc : Mag = |- m(m(x,y),z) = m(x,m(y,z))
formula idem : Mag = |- m(x,x) = x
formula cancel : Mag = m(x,y) = m(x,z) |- y = z
formula cycle : Succ = |- s(s(s(x))) = x
)";
}

inline const fmw::Workspace& ws() {
  static const fmw::Workspace w = fmw::parse_workspace(workbench_text());
  return w;
}

inline std::size_t entry(const FiniteStructure& a, const std::vector<Element>& args) {
  std::size_t off = 0;
  for (Element e : args) off = off * a.size() + e;
  return off;
}

inline Element term(const FiniteStructure& a, const fmw::Term& t, const std::vector<Element>& asg) {
  if (t.is_variable()) return asg.at(t.index);
  std::vector<Element> args;
  for (const auto& s : t.args) args.push_back(term(a, s, asg));
  return a.table(t.index)[entry(a, args)];
}

inline bool atom(const FiniteStructure& a, const fmw::Atom& at, const std::vector<Element>& asg) {
  std::vector<Element> vals;
  for (const auto& s : at.args) vals.push_back(term(a, s, asg));
  if (at.is_equation()) return vals[0] == vals[1];
  return a.table(at.symbol)[entry(a, vals)] != 0;
}

inline bool clause(const FiniteStructure& a, const fmw::HornFormula& phi, const std::vector<Element>& asg) {
  for (const auto& n : phi.negatives())
    if (!atom(a, n, asg)) return true;
  return phi.positive() && atom(a, *phi.positive(), asg);
}

/// Calls visit on every tuple in {0..n-1}^k, in lexicographic order.
inline void tuples(std::size_t n, std::size_t k, const std::function<void(const std::vector<Element>&)>& visit) {
  std::vector<Element> t(k, 0);
  if (k > 0 && n == 0) return;
  while (true) {
    visit(t);
    std::size_t i = k;
    while (i > 0 && ++t[i - 1] == n) t[--i] = 0;
    if (i == 0) return;
  }
}

/// Least falsifying assignment, or nothing.
inline std::optional<std::vector<Element>> counterexample(const FiniteStructure& a, const fmw::HornFormula& phi) {
  std::optional<std::vector<Element>> out;
  tuples(a.size(), phi.arity(), [&](const std::vector<Element>& asg) {
    if (!out && !clause(a, phi, asg)) out = asg;
  });
  return out;
}

/// Checks one total map against the raw tables.
inline bool is_morphism(const std::vector<Element>& h, const FiniteStructure& a, const FiniteStructure& b,
                        fmw::MorphismKind kind) {
  if (h.size() != a.size()) return false;
  for (Element e : h)
    if (e >= b.size()) return false;
  if (kind != fmw::MorphismKind::homomorphism) {
    std::set<Element> img(h.begin(), h.end());
    if (img.size() != h.size()) return false;
    if (kind == fmw::MorphismKind::isomorphism && img.size() != b.size()) return false;
  }
  const auto& sig = a.signature();
  bool good = true;
  for (std::size_t s = 0; s < sig.size() && good; ++s)
    tuples(a.size(), sig[s].arity, [&](const std::vector<Element>& args) {
      if (!good) return;
      std::vector<Element> mapped;
      for (Element e : args) mapped.push_back(h[e]);
      const Element va = a.table(s)[entry(a, args)];
      const Element vb = b.table(s)[entry(b, mapped)];
      if (sig[s].is_function()) {
        good = h[va] == vb;
      } else if (kind == fmw::MorphismKind::homomorphism) {
        good = !va || vb;
      } else {
        good = (va != 0) == (vb != 0);
      }
    });
  return good;
}

/// Every total map of the right kind, by exhaustion over all |B|^|A| maps.
inline std::vector<std::vector<Element>> all_morphisms(const FiniteStructure& a, const FiniteStructure& b,
                                                       fmw::MorphismKind kind) {
  std::vector<std::vector<Element>> out;
  tuples(b.size(), a.size(), [&](const std::vector<Element>& h) {
    if (is_morphism(h, a, b, kind)) out.push_back(h);
  });
  return out;
}

inline bool isomorphic(const FiniteStructure& a, const FiniteStructure& b) {
  return a.size() == b.size() && !all_morphisms(a, b, fmw::MorphismKind::isomorphism).empty();
}

/// The reduced product by {I} is isomorphic to the direct product via its
/// class representatives.
inline bool trivial_filter_matches_product(const std::vector<FiniteStructure>& fam) {
  const auto rp = fmw::reduced_product(fam, fmw::FilterOnFiniteSet::trivial(fam.size()));
  const auto p = fmw::direct_product(fam.front().sig_ptr(), fam);
  std::vector<Element> h;
  for (const auto& rep : rp.class_reps) {
    const auto it = std::find(p.tuples.begin(), p.tuples.end(), rep);
    if (it == p.tuples.end()) return false;
    h.push_back(static_cast<Element>(it - p.tuples.begin()));
  }
  return is_morphism(h, rp.carrier, p.carrier, fmw::MorphismKind::isomorphism);
}

/// The reduced product by the filter at {j} is isomorphic to factor j via
/// the j-th coordinate.
inline bool principal_filter_matches_factor(const std::vector<FiniteStructure>& fam, std::size_t j) {
  const auto rp = fmw::reduced_product(fam, fmw::FilterOnFiniteSet::principal(fam.size(), fmw::IndexSet{1} << j));
  std::vector<Element> h;
  for (const auto& rep : rp.class_reps) h.push_back(rep[j]);
  return is_morphism(h, rp.carrier, fam[j], fmw::MorphismKind::isomorphism);
}

/// All proper filters on {0..n-1}, found by brute force over families of
/// subsets: upward closed, closed under intersection, containing I, not ∅.
inline std::vector<std::vector<fmw::IndexSet>> all_filters(std::size_t n) {
  const std::size_t subsets = std::size_t{1} << n;
  const fmw::IndexSet full = static_cast<fmw::IndexSet>(subsets - 1);
  std::vector<std::vector<fmw::IndexSet>> out;
  for (std::uint64_t fam = 0; fam < (std::uint64_t{1} << subsets); ++fam) {
    auto in = [&](fmw::IndexSet s) { return (fam >> s & 1) != 0; };
    if (!in(full) || in(0)) continue;
    bool good = true;
    for (fmw::IndexSet a = 0; a < subsets && good; ++a) {
      if (!in(a)) continue;
      for (fmw::IndexSet b = 0; b < subsets && good; ++b) {
        if ((a & b) == a && !in(b)) good = false;
        if (in(b) && !in(a & b)) good = false;
      }
    }
    if (!good) continue;
    std::vector<fmw::IndexSet> members;
    for (fmw::IndexSet s = 0; s < subsets; ++s)
      if (in(s)) members.push_back(s);
    out.push_back(members);
  }
  return out;
}

/// Classes of ∏ A_i under ~F, computed pairwise from agreement sets.
inline std::vector<std::vector<std::vector<Element>>> classes(const std::vector<FiniteStructure>& factors,
                                                              const std::vector<fmw::IndexSet>& filter) {
  std::vector<std::vector<Element>> all;
  std::vector<Element> t(factors.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == factors.size()) {
      all.push_back(t);
      return;
    }
    for (Element e = 0; e < factors[i].size(); ++e) {
      t[i] = e;
      rec(i + 1);
    }
  };
  rec(0);
  auto related = [&](const std::vector<Element>& a, const std::vector<Element>& b) {
    fmw::IndexSet agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] == b[i]) agree |= fmw::IndexSet{1} << i;
    return std::find(filter.begin(), filter.end(), agree) != filter.end();
  };
  std::vector<std::vector<std::vector<Element>>> out;
  for (const auto& x : all) {
    bool placed = false;
    for (auto& c : out)
      if (related(c.front(), x)) {
        c.push_back(x);
        placed = true;
        break;
      }
    if (!placed) out.push_back({x});
  }
  return out;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/product.hpp"
#include "fmw/structure.hpp"

namespace fmw {

enum class MorphismKind { homomorphism, embedding, isomorphism };

inline const char* to_string(MorphismKind k) {
  switch (k) {
    case MorphismKind::homomorphism: return "hom";
    case MorphismKind::embedding: return "embedding";
    case MorphismKind::isomorphism: return "iso";
  }
  return "?";
}

inline MorphismKind parse_morphism_kind(std::string_view s) {
  if (s == "hom" || s == "homomorphism") return MorphismKind::homomorphism;
  if (s == "embedding" || s == "embed") return MorphismKind::embedding;
  if (s == "iso" || s == "isomorphism") return MorphismKind::isomorphism;
  throw input_error("unknown morphism kind '" + std::string(s) + "'");
}

/// A concrete failed condition of a candidate morphism.
struct Violation {
  std::string symbol;  // empty for injectivity/surjectivity/shape failures
  Tuple args;
  std::string detail;

  std::string to_string() const {
    if (symbol.empty()) return detail;
    std::string out = symbol + "(";
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + std::to_string(args[i]);
    return out + "): " + detail;
  }
};

class morphism_error : public error {
 public:
  explicit morphism_error(Violation v) : error("not a morphism: " + v.to_string()), violation_(std::move(v)) {}
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

/// A verified map between universes. Only check_morphism() and the functions
/// built on it produce these.
struct Morphism {
  FiniteStructure source;
  FiniteStructure target;
  std::vector<Element> map;
  MorphismKind kind = MorphismKind::homomorphism;
};

/// hom: functions commute with the map and relations are preserved.
/// embedding: additionally injective and relations are reflected.
/// iso: a surjective embedding.
inline std::optional<Violation> find_violation(std::span<const Element> h, const FiniteStructure& a,
                                               const FiniteStructure& b, MorphismKind kind) {
  if (!same_signature(a.sig_ptr(), b.sig_ptr())) return Violation{{}, {}, "signature mismatch"};
  if (h.size() != a.size())
    return Violation{{}, {}, "map has " + std::to_string(h.size()) + " entries for a universe of " + std::to_string(a.size())};
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] >= b.size()) return Violation{{}, {}, "h(" + std::to_string(i) + ")=" + std::to_string(h[i]) + " out of range"};
  const bool strong = kind != MorphismKind::homomorphism;
  if (strong) {
    std::vector<int> seen(b.size(), -1);
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (seen[h[i]] >= 0)
        return Violation{{}, {}, "not injective: h(" + std::to_string(seen[h[i]]) + ")=h(" + std::to_string(i) + ")=" + std::to_string(h[i])};
      seen[h[i]] = static_cast<int>(i);
    }
  }
  if (kind == MorphismKind::isomorphism && a.size() != b.size()) return Violation{{}, {}, "not surjective"};

  const Signature& sig = a.signature();
  std::optional<Violation> bad;
  Tuple mapped;
  for (std::size_t s = 0; s < sig.size() && !bad; ++s) {
    const Symbol& sym = sig[s];
    for_each_tuple(a.size(), sym.arity, [&](std::span<const Element> args) {
      if (bad) return;
      mapped.assign(args.size(), 0);
      for (std::size_t j = 0; j < args.size(); ++j) mapped[j] = h[args[j]];
      if (sym.is_function()) {
        const Element lhs = h[a.apply(s, args)];
        const Element rhs = b.apply(s, mapped);
        if (lhs != rhs)
          bad = Violation{sym.name, Tuple(args.begin(), args.end()),
                          "h(" + sym.name + "^A)=" + std::to_string(lhs) + " but " + sym.name + "^B(h)=" + std::to_string(rhs)};
      } else {
        const bool in_a = a.holds(s, args);
        const bool in_b = b.holds(s, mapped);
        if (in_a && !in_b) {
          std::string img = sym.name + "(";
          for (std::size_t j = 0; j < mapped.size(); ++j) img += (j ? "," : "") + std::to_string(mapped[j]);
          bad = Violation{sym.name, Tuple(args.begin(), args.end()), "holds in source but image " + img + ") fails in target"};
        } else if (strong && !in_a && in_b) {
          bad = Violation{sym.name, Tuple(args.begin(), args.end()), "fails in source but holds on the image (not reflected)"};
        }
      }
    });
  }
  return bad;
}

inline Morphism check_morphism(std::vector<Element> h, const FiniteStructure& a, const FiniteStructure& b,
                               MorphismKind kind) {
  if (auto v = find_violation(h, a, b, kind)) throw morphism_error(*v);
  return Morphism{a, b, std::move(h), kind};
}

inline bool is_surjective(const Morphism& m) {
  std::vector<bool> hit(m.target.size(), false);
  for (Element e : m.map) hit[e] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool x) { return x; });
}

namespace detail {

/// Constraints of a morphism search, bucketed by the last source element
/// they mention so they are checked as soon as all their elements are mapped.
class SearchPlan {
 public:
  struct FnCheck {
    std::size_t sym;
    Tuple args;
    Element result;
  };
  struct RelCheck {
    std::size_t sym;
    Tuple args;
    bool must_hold;
  };

  SearchPlan(const FiniteStructure& a, MorphismKind kind) : fn_at(a.size()), rel_at(a.size()) {
    const Signature& sig = a.signature();
    const bool strong = kind != MorphismKind::homomorphism;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      const Symbol& sym = sig[s];
      for_each_tuple(a.size(), sym.arity, [&](std::span<const Element> args) {
        Element level = 0;
        for (Element x : args) level = std::max(level, x);
        if (sym.is_function()) {
          const Element r = a.apply(s, args);
          fn_at[std::max(level, r)].push_back({s, Tuple(args.begin(), args.end()), r});
        } else {
          const bool in_a = a.holds(s, args);
          if (in_a || strong) rel_at[level].push_back({s, Tuple(args.begin(), args.end()), in_a});
        }
      });
    }
  }

  std::vector<std::vector<FnCheck>> fn_at;
  std::vector<std::vector<RelCheck>> rel_at;
};

}  // namespace detail

/// Enumerates morphisms A → B of the given kind in lexicographic order of
/// their maps, calling visit(map) for each; visit returns false to stop.
/// Elements are assigned in index order, targets tried ascending, and every
/// constraint is checked as soon as its elements are mapped. Returns the
/// number of search nodes; throws resource_error past limits.max_search.
template <class Visit>
std::uint64_t for_each_morphism(const FiniteStructure& a, const FiniteStructure& b, MorphismKind kind,
                                Visit&& visit, const Limits& limits = Limits{}) {
  if (!same_signature(a.sig_ptr(), b.sig_ptr())) throw signature_error("morphism search across different signatures");
  if (kind == MorphismKind::isomorphism && a.size() != b.size()) return 0;
  if (kind != MorphismKind::homomorphism && a.size() > b.size()) return 0;
  const detail::SearchPlan plan(a, kind);
  const bool injective = kind != MorphismKind::homomorphism;
  const std::size_t n = a.size();
  std::vector<Element> h(n, 0);
  std::vector<bool> used(b.size(), false);
  std::uint64_t nodes = 0;
  Tuple mapped;

  auto consistent = [&](std::size_t level) {
    for (const auto& c : plan.fn_at[level]) {
      mapped.resize(c.args.size());
      for (std::size_t j = 0; j < c.args.size(); ++j) mapped[j] = h[c.args[j]];
      if (b.apply(c.sym, mapped) != h[c.result]) return false;
    }
    for (const auto& c : plan.rel_at[level]) {
      mapped.resize(c.args.size());
      for (std::size_t j = 0; j < c.args.size(); ++j) mapped[j] = h[c.args[j]];
      if (b.holds(c.sym, mapped) != c.must_hold) return false;
    }
    return true;
  };

  bool stop = false;
  auto rec = [&](auto&& self, std::size_t level) -> void {
    if (level == n) {
      if (!visit(static_cast<const std::vector<Element>&>(h))) stop = true;
      return;
    }
    for (Element v = 0; v < b.size() && !stop; ++v) {
      if (injective && used[v]) continue;
      if (++nodes > limits.max_search)
        throw resource_error("morphism search exceeded " + std::to_string(limits.max_search) + " nodes");
      h[level] = v;
      if (!consistent(level)) continue;
      if (injective) used[v] = true;
      self(self, level + 1);
      if (injective) used[v] = false;
    }
  };
  rec(rec, 0);
  return nodes;
}

/// Lexicographically least morphism of the given kind, re-verified.
inline std::optional<Morphism> find_morphism(const FiniteStructure& a, const FiniteStructure& b, MorphismKind kind,
                                             const Limits& limits = Limits{}) {
  std::optional<std::vector<Element>> found;
  for_each_morphism(
      a, b, kind,
      [&](const std::vector<Element>& h) {
        found = h;
        return false;
      },
      limits);
  if (!found) return std::nullopt;
  return check_morphism(std::move(*found), a, b, kind);
}

/// The substructure of the target on the range of h. For a homomorphism the
/// range is closed under the target's functions; its relations are the
/// target's restricted to the range, which contain the images of the
/// source's relation tuples.
inline FiniteStructure image_structure(const Morphism& h, std::string name = {}) {
  if (auto v = find_violation(h.map, h.source, h.target, MorphismKind::homomorphism))
    throw morphism_error(*v);
  std::vector<Element> range(h.map.begin(), h.map.end());
  std::sort(range.begin(), range.end());
  range.erase(std::unique(range.begin(), range.end()), range.end());
  return materialize(h.target, range, h.target.sig_ptr(), std::move(name));
}

/// The corestriction of h onto image_structure(h), re-verified as a
/// surjective homomorphism.
inline Morphism corestriction(const Morphism& h, const FiniteStructure& image) {
  std::vector<Element> range(h.map.begin(), h.map.end());
  std::sort(range.begin(), range.end());
  range.erase(std::unique(range.begin(), range.end()), range.end());
  std::vector<Element> m(h.map.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    m[i] = static_cast<Element>(std::lower_bound(range.begin(), range.end(), h.map[i]) - range.begin());
  Morphism out = check_morphism(std::move(m), h.source, image, MorphismKind::homomorphism);
  if (!is_surjective(out)) throw error("corestriction is not onto");
  return out;
}

}  // namespace fmw

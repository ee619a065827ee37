#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmw/constructions.hpp"
#include "fmw/diagram_method.hpp"
#include "fmw/enumerate.hpp"
#include "fmw/error.hpp"
#include "fmw/filter.hpp"
#include "fmw/formula.hpp"
#include "fmw/morphism.hpp"
#include "fmw/product.hpp"
#include "fmw/structure.hpp"

namespace fmw {

/// One index of a witness construction: the sentence set it must model and
/// the least (member, map) that does.
struct IndexChoice {
  std::string sentences;
  std::size_t member = 0;
  std::vector<Element> map;
  /// Position of (member, map) among the distinct factors.
  std::size_t factor = 0;
};

/// A factor B_i: catalog member M expanded by ȧ ↦ map[a].
struct Factor {
  std::size_t member = 0;
  std::vector<Element> map;

  friend auto operator<=>(const Factor&, const Factor&) = default;
};

struct Refutation {
  HornFormula formula;
  Assignment falsifying;
  /// Per catalog member: assignments checked while confirming validity.
  std::vector<std::pair<std::string, std::uint64_t>> validity;
  /// The index that admitted no model.
  std::string reason;

  std::string kind() const { return kind_name(formula); }
};

struct MalcevConstruction {
  std::vector<Factor> factors;
  FilterOnFiniteSet filter;
  /// Into the substructure of ∏_F B_i|Σ generated by the images.
  DiagramEmbedding<Tuple> embedding;
  /// The whole reduced product, when it fits under max_product.
  std::optional<ReducedProductStructure> product;
  std::optional<Morphism> product_embedding;
};

struct BirkhoffConstruction {
  std::vector<Factor> factors;
  /// Closure conflicts that each forced one more factor.
  std::vector<std::string> refinements;
  /// C ≤ ∏ B_i|Σ and C ↠ A.
  QuotientPresentation<Tuple> quotient;
  /// The whole product, when it fits under max_product.
  std::optional<ProductStructure> product;
};

template <class C>
struct WitnessResult {
  std::vector<IndexChoice> indices;
  std::optional<C> construction;
  std::optional<Refutation> refutation;

  bool embedded() const { return construction.has_value(); }
};

using MalcevResult = WitnessResult<MalcevConstruction>;
using BirkhoffResult = WitnessResult<BirkhoffConstruction>;

// ---------------------------------------------------------------------------
// Sentences over Σ(A) as formulas over Σ

/// ȧ ↦ variable a; base symbols unchanged.
inline Term constants_to_variables(const Term& t, const Signature& expanded) {
  if (t.is_variable()) throw input_error("sentence contains a variable");
  if (auto e = expanded.element_of(t.index)) return Term::variable(*e);
  Term out = Term::apply(t.index);
  for (const auto& a : t.args) out.args.push_back(constants_to_variables(a, expanded));
  return out;
}

inline Atom constants_to_variables(const Atom& a, const Signature& expanded) {
  Atom out{a.kind, a.symbol, {}};
  for (const auto& t : a.args) out.args.push_back(constants_to_variables(t, expanded));
  return out;
}

/// The clause θ1(x̄) ∧ ... → ξ(x̄) with one variable per element of A, named
/// by element index, verified valid in K and false in A under a ↦ a.
inline Refutation make_refutation(const FiniteStructure& a, const StructureCatalog& k, const Signature& expanded,
                                  const std::vector<Atom>& premises, const std::optional<Atom>& conclusion,
                                  std::string reason, const Limits& limits) {
  std::vector<Atom> negs;
  for (const auto& p : premises) negs.push_back(constants_to_variables(p, expanded));
  std::optional<Atom> pos;
  if (conclusion) pos = constants_to_variables(*conclusion, expanded);
  std::vector<std::string> names;
  for (std::size_t e = 0; e < a.size(); ++e) names.push_back(variable_name(e));
  if (negs.empty() && !pos) negs.push_back(Atom::equation(Term::variable(0), Term::variable(0)));
  HornFormula phi(a.sig_ptr(), std::move(negs), std::move(pos), names);

  Assignment asg;
  for (const auto& v : phi.variables())
    asg.push_back(static_cast<Element>(std::find(names.begin(), names.end(), v) - names.begin()));
  if (clause_holds(a, std::span<const Element>(asg), phi))
    throw error("refutation " + to_string(phi) + " holds in A at the identity assignment");
  Refutation r{std::move(phi), std::move(asg), {}, std::move(reason)};
  for (const auto& m : k.members()) {
    auto s = satisfies(m, r.formula, limits);
    if (!s.holds) throw error("refutation " + to_string(r.formula) + " fails in " + m.name());
    r.validity.emplace_back(m.name(), s.assignments_checked);
  }
  return r;
}

namespace detail {

inline void require_same_base(const FiniteStructure& a, const StructureCatalog& k) {
  if (!same_signature(a.sig_ptr(), k.sig_ptr()))
    throw signature_error("structure '" + a.name() + "' and the catalog have different signatures");
}

/// Least map h: A → M (lexicographic) with accept(h), by plain enumeration.
template <class Accept>
std::optional<std::vector<Element>> least_map(std::size_t from, const FiniteStructure& m, Accept&& accept,
                                              const Limits& limits) {
  const std::uint64_t total = checked_pow(m.size(), from);
  if (total > limits.max_search)
    throw resource_error("map search over " + std::to_string(total) + " maps (cap " + std::to_string(limits.max_search) +
                         ")");
  std::optional<std::vector<Element>> found;
  for_each_tuple(m.size(), from, [&](std::span<const Element> h) {
    if (!found && accept(h)) found.emplace(h.begin(), h.end());
  });
  return found;
}

inline std::size_t add_factor(std::vector<Factor>& factors, std::map<Factor, std::size_t>& index, Factor f) {
  auto [it, fresh] = index.emplace(f, factors.size());
  if (fresh) factors.push_back(std::move(f));
  return it->second;
}

inline std::vector<FiniteStructure> expanded_factors(const StructureCatalog& k, const std::vector<Factor>& factors,
                                                     const SigPtr& expanded) {
  std::vector<FiniteStructure> out;
  for (const auto& f : factors) out.push_back(expand_structure(k.members()[f.member], expanded, f.map));
  return out;
}

inline std::vector<FiniteStructure> base_factors(const StructureCatalog& k, const std::vector<Factor>& factors) {
  std::vector<FiniteStructure> out;
  for (const auto& f : factors) out.push_back(k.members()[f.member]);
  return out;
}

inline Tuple image_tuple(const std::vector<Factor>& factors, Element a) {
  Tuple t;
  for (const auto& f : factors) t.push_back(f.map[a]);
  return t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mal'cev

struct MalcevOptions {
  /// Index set [diag⁺]^{<ω} × [diag⁻]^{≤1} with the generated filter,
  /// instead of one index per Ξ with the trivial filter.
  bool faithful = false;
};

namespace detail {

inline void assemble_malcev(MalcevResult& out, const FiniteStructure& a, const StructureCatalog& k,
                            const SigPtr& expanded, std::vector<Factor> factors, FilterOnFiniteSet filter,
                            const Limits& limits) {
  const auto bs = base_factors(k, factors);
  ReducedProductView view(ProductView(expanded, expanded_factors(k, factors, expanded)), filter);
  auto emb = embed_from_diagram(a, view, limits);
  MalcevConstruction c{std::move(factors), filter, std::move(emb), std::nullopt, std::nullopt};
  if (ProductView(a.sig_ptr(), bs).cardinality() <= limits.max_product) {
    c.product = reduced_product(bs, filter, limits);
    std::vector<Element> h(a.size());
    for (Element e = 0; e < a.size(); ++e) {
      const Tuple rep = view.canonical(c.embedding.images[e]);
      auto it = std::lower_bound(c.product->class_reps.begin(), c.product->class_reps.end(), rep);
      if (it == c.product->class_reps.end() || *it != rep) throw error("image outside the reduced product");
      h[e] = static_cast<Element>(it - c.product->class_reps.begin());
    }
    c.product_embedding = check_morphism(std::move(h), a, c.product->carrier, MorphismKind::embedding);
  }
  out.construction = std::move(c);
}

}  // namespace detail

/// For each Ξ ∈ {∅} ∪ {{¬ξ} : ¬ξ ∈ diag⁻(A)}, the least member M and
/// homomorphism h: A → M with M ⊭ ξ[h]. If all exist, A embeds into the
/// reduced product of the expanded factors modulo the trivial filter, by
/// a ↦ (ȧ^{B_i})_i. Otherwise the first failing Ξ yields a basic Horn
/// clause valid in K and false in A: diag⁺(x̄) → ξ(x̄), or diag⁺(x̄) → ⊥.
inline MalcevResult malcev_witness(const FiniteStructure& a, const StructureCatalog& k,
                                   const MalcevOptions& opt = {}, const Limits& limits = Limits{}) {
  detail::require_same_base(a, k);
  const Diagram d = diagram(a);
  const Signature& ex = *d.expanded;
  MalcevResult out;

  if (opt.faithful) {
    const std::size_t p = d.positive.size();
    if (p >= 63) throw resource_error("positive diagram too large for the faithful index set");
    const std::uint64_t count = checked_mul(std::uint64_t{1} << p, d.negative.size() + 1);
    if (count > limits.max_index)
      throw resource_error("faithful index set has " + std::to_string(count) + " indices (cap " +
                           std::to_string(limits.max_index) + ")");
    std::vector<Factor> factors;
    std::vector<IndexSet> thetas;
    for (std::size_t x = 0; x <= d.negative.size(); ++x) {
      const Atom* xi = x == 0 ? nullptr : &d.negative[x - 1];
      for (IndexSet theta = 0; theta < (IndexSet{1} << p); ++theta) {
        std::vector<Atom> prem;
        for (std::size_t j = 0; j < p; ++j)
          if (theta >> j & 1) prem.push_back(constants_to_variables(d.positive[j], ex));
        std::optional<Atom> xv;
        if (xi) xv = constants_to_variables(*xi, ex);
        std::string label = "\xCE\x98=" + format_index_set(theta) + ", " + (xi ? negated_to_string(*xi, ex) : "\xE2\x88\x85");
        std::optional<IndexChoice> choice;
        for (std::size_t mi = 0; mi < k.size() && !choice; ++mi) {
          const FiniteStructure& m = k.members()[mi];
          auto h = detail::least_map(a.size(), m, [&](std::span<const Element> h) {
            for (const auto& t : prem)
              if (!eval_atom(m, h, t)) return false;
            return !xv || !eval_atom(m, h, *xv);
          }, limits);
          if (h) choice = IndexChoice{label, mi, *h, factors.size()};
        }
        if (!choice) {
          std::vector<Atom> ps;
          for (std::size_t j = 0; j < p; ++j)
            if (theta >> j & 1) ps.push_back(d.positive[j]);
          out.refutation = make_refutation(a, k, ex, ps, xi ? std::optional<Atom>(*xi) : std::nullopt,
                                           "no member of the catalog models " + label, limits);
          return out;
        }
        factors.push_back(Factor{choice->member, choice->map});
        thetas.push_back(theta);
        out.indices.push_back(std::move(*choice));
      }
    }
    std::vector<IndexSet> gens;
    for (std::size_t j = 0; j < p; ++j) {
      IndexSet g = 0;
      for (std::size_t i = 0; i < thetas.size(); ++i)
        if (thetas[i] >> j & 1) g |= IndexSet{1} << i;
      gens.push_back(g);
    }
    auto filter = filter_from_generators(factors.size(), gens, limits);
    detail::assemble_malcev(out, a, k, d.expanded, std::move(factors), std::move(filter), limits);
    return out;
  }

  std::vector<Factor> factors;
  std::map<Factor, std::size_t> seen;
  for (std::size_t x = 0; x <= d.negative.size(); ++x) {
    const Atom* xi = x == 0 ? nullptr : &d.negative[x - 1];
    std::optional<Atom> xv;
    if (xi) xv = constants_to_variables(*xi, ex);
    std::optional<IndexChoice> choice;
    for (std::size_t mi = 0; mi < k.size() && !choice; ++mi) {
      const FiniteStructure& m = k.members()[mi];
      for_each_morphism(
          a, m, MorphismKind::homomorphism,
          [&](const std::vector<Element>& h) {
            if (xv && eval_atom(m, std::span<const Element>(h), *xv)) return true;
            choice = IndexChoice{xi ? negated_to_string(*xi, ex) : "\xE2\x88\x85", mi, h, 0};
            return false;
          },
          limits);
    }
    if (!choice) {
      const std::string label = xi ? negated_to_string(*xi, ex) : "\xE2\x88\x85";
      out.refutation = make_refutation(a, k, ex, d.positive, xi ? std::optional<Atom>(*xi) : std::nullopt,
                                       "no homomorphism into the catalog models diag\xE2\x81\xBA with " + label, limits);
      return out;
    }
    choice->factor = detail::add_factor(factors, seen, Factor{choice->member, choice->map});
    out.indices.push_back(std::move(*choice));
  }
  if (factors.size() > max_index_bits)
    throw resource_error(std::to_string(factors.size()) + " distinct factors (at most 64 supported)");
  auto filter = FilterOnFiniteSet::trivial(factors.size());
  detail::assemble_malcev(out, a, k, d.expanded, std::move(factors), std::move(filter), limits);
  return out;
}

// ---------------------------------------------------------------------------
// Birkhoff

/// For each ¬ξ ∈ diag⁻(A), the least member M and map h: A → M with
/// M ⊭ ξ[h]. The product of the expanded factors satisfies the flat negative
/// diagram; the paired closure of its constants then either presents A as a
/// homomorphic image of the generated substructure, or exhibits a nested
/// sentence ξ′ true in the product and false in A. In that case the least
/// (M, h) falsifying ξ′ joins the product and the closure is rerun; if none
/// exists, ξ′(x̄) is an identity valid in K and false in A.
inline BirkhoffResult birkhoff_witness(const FiniteStructure& a, const StructureCatalog& k,
                                       const Limits& limits = Limits{}) {
  detail::require_same_base(a, k);
  const Diagram d = diagram(a);
  const Signature& ex = *d.expanded;
  BirkhoffResult out;
  std::vector<Factor> factors;
  std::map<Factor, std::size_t> seen;

  auto separate = [&](const Atom& xi) -> std::optional<std::pair<std::size_t, std::vector<Element>>> {
    const Atom xv = constants_to_variables(xi, ex);
    for (std::size_t mi = 0; mi < k.size(); ++mi) {
      const FiniteStructure& m = k.members()[mi];
      auto h = detail::least_map(a.size(), m, [&](std::span<const Element> h) { return !eval_atom(m, h, xv); }, limits);
      if (h) return std::make_pair(mi, std::move(*h));
    }
    return std::nullopt;
  };

  for (const auto& xi : d.negative) {
    auto found = separate(xi);
    if (!found) {
      out.refutation = make_refutation(a, k, ex, {}, xi, "no member of the catalog models " + negated_to_string(xi, ex),
                                       limits);
      return out;
    }
    const std::size_t f = detail::add_factor(factors, seen, Factor{found->first, found->second});
    out.indices.push_back(IndexChoice{negated_to_string(xi, ex), found->first, std::move(found->second), f});
  }

  std::vector<std::string> refinements;
  while (true) {
    ProductView view(d.expanded, detail::expanded_factors(k, factors, d.expanded));
    try {
      auto q = quotient_from_negative_diagram(a, view, limits);
      BirkhoffConstruction c{std::move(factors), std::move(refinements), std::move(q), std::nullopt};
      const auto bs = detail::base_factors(k, c.factors);
      if (ProductView(a.sig_ptr(), bs).cardinality() <= limits.max_product)
        c.product = direct_product(a.sig_ptr(), bs, limits);
      out.construction = std::move(c);
      return out;
    } catch (const quotient_conflict& conflict) {
      auto found = separate(conflict.sentence());
      if (!found) {
        out.refutation = make_refutation(a, k, ex, {}, conflict.sentence(),
                                         "no member of the catalog models " + conflict.text() +
                                             ", which the product of the chosen factors violates",
                                         limits);
        return out;
      }
      const std::size_t before = factors.size();
      const std::size_t f = detail::add_factor(factors, seen, Factor{found->first, found->second});
      if (factors.size() == before) throw error("refinement factor already present");
      refinements.push_back(conflict.text());
      out.indices.push_back(IndexChoice{conflict.text(), found->first, std::move(found->second), f});
    }
  }
}

// ---------------------------------------------------------------------------
// Independent audits

/// Re-checks a refutation from scratch: valid in every member of K, false in
/// A at the reported assignment.
inline std::optional<std::string> audit_refutation(const FiniteStructure& a, const StructureCatalog& k,
                                                   const Refutation& r, const Limits& limits = Limits{}) {
  if (r.falsifying.size() != r.formula.arity()) return "assignment has the wrong length";
  for (Element e : r.falsifying)
    if (e >= a.size()) return "assignment outside A";
  if (clause_holds(a, std::span<const Element>(r.falsifying), r.formula)) return "formula holds in A at the assignment";
  auto cs = class_satisfies(k, r.formula, limits);
  if (!cs.holds) return "formula fails in " + *cs.failing_member;
  return std::nullopt;
}

/// Re-checks an embedding arm against ∏_F M_i directly: each index map is a
/// homomorphism, and a ↦ (h_i(a))_i/F is injective on classes, commutes with
/// the functions and reflects and preserves the relations.
inline std::optional<std::string> audit_malcev(const FiniteStructure& a, const StructureCatalog& k,
                                               const MalcevResult& r, const MalcevOptions& opt = {},
                                               const Limits& limits = Limits{}) {
  if (r.refutation) return audit_refutation(a, k, *r.refutation, limits);
  if (!r.construction) return "no outcome";
  const auto& c = *r.construction;
  if (c.factors.empty()) return "no factors";
  if (!opt.faithful)
    for (const auto& f : c.factors)
      if (find_violation(f.map, a, k.members()[f.member], MorphismKind::homomorphism))
        return "index map is not a homomorphism";
  ReducedProductView view(ProductView(a.sig_ptr(), detail::base_factors(k, c.factors)), c.filter);
  std::vector<Tuple> img;
  for (Element e = 0; e < a.size(); ++e) img.push_back(view.canonical(detail::image_tuple(c.factors, e)));
  for (Element x = 0; x < a.size(); ++x)
    for (Element y = x + 1; y < a.size(); ++y)
      if (view.equivalent(img[x], img[y])) return "images of " + std::to_string(x) + " and " + std::to_string(y) + " coincide";
  const Signature& sig = a.signature();
  std::optional<std::string> bad;
  std::vector<Tuple> args;
  for (std::size_t s = 0; s < sig.size() && !bad; ++s) {
    for_each_tuple(a.size(), sig[s].arity, [&](std::span<const Element> idx) {
      if (bad) return;
      args.clear();
      for (Element i : idx) args.push_back(img[i]);
      if (sig[s].is_function()) {
        if (!view.equivalent(view.apply(s, args), img[a.apply(s, idx)])) bad = "function " + sig[s].name + " not preserved";
      } else if (view.holds(s, args) != a.holds(s, idx)) {
        bad = "relation " + sig[s].name + " not preserved and reflected";
      }
    });
  }
  if (bad) return bad;
  const auto& emb = c.embedding;
  for (Element e = 0; e < a.size(); ++e)
    if (emb.sub.elements.at(emb.embedding.map.at(e)) != img[e]) return "reported embedding disagrees with the factors";
  if (find_violation(emb.embedding.map, a, emb.sub.structure, MorphismKind::embedding)) return "reported embedding fails";
  return std::nullopt;
}

/// Re-checks a quotient arm: C is closed in ∏ M_i with matching tables, it
/// contains every generator (h_i(a))_i, and C ↠ A is an onto homomorphism
/// sending each generator to its element.
inline std::optional<std::string> audit_birkhoff(const FiniteStructure& a, const StructureCatalog& k,
                                                 const BirkhoffResult& r, const Limits& limits = Limits{}) {
  if (r.refutation) return audit_refutation(a, k, *r.refutation, limits);
  if (!r.construction) return "no outcome";
  const auto& c = *r.construction;
  ProductView view(a.sig_ptr(), detail::base_factors(k, c.factors));
  const auto& q = c.quotient;
  if (auto v = inclusion_violation(view, q.sub.structure, q.sub.elements)) return "substructure: " + *v;
  if (auto v = find_violation(q.surjection.map, q.sub.structure, a, MorphismKind::homomorphism))
    return "surjection: " + v->to_string();
  std::vector<bool> hit(a.size(), false);
  for (Element e : q.surjection.map) hit[e] = true;
  if (std::find(hit.begin(), hit.end(), false) != hit.end()) return "surjection is not onto";
  for (Element e = 0; e < a.size(); ++e) {
    const Tuple g = detail::image_tuple(c.factors, e);
    auto it = std::lower_bound(q.sub.elements.begin(), q.sub.elements.end(), g);
    if (it == q.sub.elements.end() || *it != g) return "generator of " + std::to_string(e) + " missing from C";
    if (q.surjection.map[static_cast<std::size_t>(it - q.sub.elements.begin())] != e)
      return "generator of " + std::to_string(e) + " not sent to it";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Strictness

struct StrictnessReport {
  std::uint64_t valid_with_unit = 0;
  std::vector<HornFormula> non_strict_with_unit;
  std::uint64_t valid_without_unit = 0;
  std::vector<HornFormula> non_strict_without_unit;

  bool ok() const { return non_strict_with_unit.empty(); }
};

/// Δ within the bounds for K ∪ {unit}, which should contain only strict
/// clauses, alongside the non-strict part of Δ for K alone.
inline StrictnessReport strictness_audit(const StructureCatalog& k, const EnumerationBounds& b,
                                         const Limits& limits = Limits{}) {
  StructureCatalog with_unit(k.sig_ptr());
  for (const auto& m : k.members()) with_unit.add(m);
  std::string name = "unit";
  while (std::any_of(k.members().begin(), k.members().end(), [&](const auto& m) { return m.name() == name; }))
    name += "'";
  with_unit.add(unit_structure(k.sig_ptr(), name));

  AtomPool pool(k.sig_ptr(), b.max_vars, b.max_term_depth, limits);
  StrictnessReport r;
  for_each_valid_clause(
      pool, with_unit, b.max_negatives, HornKind::any,
      [&](std::span<const AtomPool::Id> negs, AtomPool::Id pos) {
        ++r.valid_with_unit;
        if (pos == AtomPool::none) r.non_strict_with_unit.push_back(pool.formula(negs, pos));
        return true;
      },
      limits);
  for_each_valid_clause(
      pool, k, b.max_negatives, HornKind::any,
      [&](std::span<const AtomPool::Id> negs, AtomPool::Id pos) {
        ++r.valid_without_unit;
        if (pos == AtomPool::none) r.non_strict_without_unit.push_back(pool.formula(negs, pos));
        return true;
      },
      limits);
  return r;
}

}  // namespace fmw

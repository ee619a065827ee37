#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/filter.hpp"
#include "fmw/formula.hpp"
#include "fmw/morphism.hpp"
#include "fmw/product.hpp"
#include "fmw/structure.hpp"

namespace fmw {

struct ProductStructure {
  std::vector<FiniteStructure> factors;
  /// Universe indexes the tuples in lexicographic order.
  FiniteStructure carrier;
  std::vector<Tuple> tuples;
  /// π_i, each verified as a homomorphism.
  std::vector<Morphism> projections;
};

/// ∏ A_i, materialized. The empty product is the unit.
inline ProductStructure direct_product(SigPtr sig, std::vector<FiniteStructure> factors,
                                       const Limits& limits = Limits{}) {
  ProductView view(sig, factors);
  const std::uint64_t card = view.cardinality();
  if (card > limits.max_product)
    throw resource_error("product has " + std::to_string(card) + " elements (cap " +
                         std::to_string(limits.max_product) + ")");
  std::vector<Tuple> tuples;
  tuples.reserve(card);
  for (std::uint64_t i = 0; i < card; ++i) tuples.push_back(view.tuple_at(i));
  FiniteStructure carrier = materialize(view, tuples, sig, "product", limits);
  std::vector<Morphism> projections;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    std::vector<Element> pi(tuples.size());
    for (std::size_t t = 0; t < tuples.size(); ++t) pi[t] = tuples[t][i];
    projections.push_back(check_morphism(std::move(pi), carrier, factors[i], MorphismKind::homomorphism));
  }
  return {std::move(factors), std::move(carrier), std::move(tuples), std::move(projections)};
}

struct ReducedProductStructure {
  std::vector<FiniteStructure> factors;
  FilterOnFiniteSet filter;
  /// Universe indexes the ~F classes in order of their representatives.
  FiniteStructure carrier;
  /// Class of each product tuple, by lexicographic tuple number.
  std::vector<std::size_t> quotient;
  /// Lexicographically least tuple of each class.
  std::vector<Tuple> class_reps;
};

/// ∏_F A_i, materialized: the ~F classes of all product tuples, with
/// functions computed pointwise and relations holding on a class iff the
/// set of indices where they hold is in F.
inline ReducedProductStructure reduced_product(std::vector<FiniteStructure> factors, FilterOnFiniteSet filter,
                                               const Limits& limits = Limits{}) {
  if (factors.empty()) throw input_error("a reduced product needs at least one factor");
  SigPtr sig = factors.front().sig_ptr();
  ReducedProductView view(ProductView(sig, factors), filter);
  const std::uint64_t card = view.product().cardinality();
  if (card > limits.max_product)
    throw resource_error("product has " + std::to_string(card) + " tuples (cap " +
                         std::to_string(limits.max_product) + ")");
  std::map<Tuple, std::size_t> class_of;
  std::vector<Tuple> reps;
  std::vector<std::size_t> quotient(card);
  for (std::uint64_t i = 0; i < card; ++i) {
    Tuple rep = view.canonical(view.product().tuple_at(i));
    auto [it, fresh] = class_of.emplace(rep, reps.size());
    if (fresh) reps.push_back(std::move(rep));
    quotient[i] = it->second;
  }
  FiniteStructure carrier = materialize(view, reps, sig, "reduced_product", limits);
  return {std::move(factors), std::move(filter), std::move(carrier), std::move(quotient), std::move(reps)};
}

inline ReducedProductView view_of(const ReducedProductStructure& rp) {
  return ReducedProductView(ProductView(rp.carrier.sig_ptr(), rp.factors), rp.filter);
}

// ---------------------------------------------------------------------------
// Diagrams

/// Flat diagram of A over Σ(A). `negative` holds the atoms ξ whose negations
/// ¬ξ belong to the diagram. Reflexive equations ȧ=ȧ are left out.
struct Diagram {
  SigPtr expanded;
  std::size_t universe_size = 0;
  std::vector<Atom> positive;
  std::vector<Atom> negative;
};

inline Term constant_term(const Signature& expanded, std::size_t element) {
  return Term::apply(expanded.element_constant(element));
}

inline SigPtr require_element_expansion(const FiniteStructure& a, SigPtr expanded) {
  if (!expanded) return make_sig(expand_signature(a.signature(), a.size()));
  if (!expanded->extends(a.signature()) || expanded->expansion_size() != a.size() ||
      expanded->base_size() != a.signature().size())
    throw signature_error("expected the expansion of '" + a.signature().name() + "' by " +
                          std::to_string(a.size()) + " element constants");
  return expanded;
}

/// Calls visit(atom, truth in ⟨A, a⟩) for every flat atomic Σ(A)-sentence:
/// equations between distinct constants, then relation facts, then function
/// facts f(ȧ..)=ḃ, each by symbol, lexicographic arguments and value.
template <class Visit>
void for_each_flat_atom(const FiniteStructure& a, const Signature& expanded, Visit&& visit) {
  const Signature& sig = a.signature();
  auto c = [&](Element e) { return constant_term(expanded, e); };
  for (Element x = 0; x < a.size(); ++x)
    for (Element y = x + 1; y < a.size(); ++y) visit(Atom::equation(c(x), c(y)), false);
  for (std::size_t s = 0; s < sig.size(); ++s) {
    if (!sig[s].is_relation()) continue;
    for_each_tuple(a.size(), sig[s].arity, [&](std::span<const Element> args) {
      std::vector<Term> ts;
      for (Element e : args) ts.push_back(c(e));
      visit(Atom::relation(s, std::move(ts)), a.holds(s, args));
    });
  }
  for (std::size_t s = 0; s < sig.size(); ++s) {
    if (!sig[s].is_function()) continue;
    for_each_tuple(a.size(), sig[s].arity, [&](std::span<const Element> args) {
      std::vector<Term> ts;
      for (Element e : args) ts.push_back(c(e));
      const Element value = a.apply(s, args);
      const Term lhs = Term::apply(s, ts);
      for (Element b = 0; b < a.size(); ++b) visit(Atom::equation(lhs, c(b)), b == value);
    });
  }
}

/// The flat diagram, in for_each_flat_atom order.
inline Diagram diagram(const FiniteStructure& a, SigPtr expanded = nullptr) {
  expanded = require_element_expansion(a, std::move(expanded));
  Diagram d{expanded, a.size(), {}, {}};
  for_each_flat_atom(a, *expanded, [&](Atom atom, bool truth) {
    (truth ? d.positive : d.negative).push_back(std::move(atom));
  });
  return d;
}

/// Number of flat atomic sentences over Σ(A), reflexive equations excluded.
inline std::uint64_t count_flat_atoms(const Signature& sig, std::size_t n) {
  std::uint64_t total = n * (n - 1) / 2;
  for (const auto& s : sig.symbols()) {
    const std::uint64_t tuples = checked_pow(n, s.arity);
    total += s.is_relation() ? tuples : tuples * n;
  }
  return total;
}

/// Expands M to Σ(A) by interpreting ȧ as const_map[a].
inline FiniteStructure expand_structure(const FiniteStructure& m, SigPtr expanded,
                                        std::span<const Element> const_map) {
  if (!expanded->is_expanded() || !expanded->extends(m.signature()) ||
      expanded->base_size() != m.signature().size())
    throw signature_error("expand_structure needs an expansion of the structure's signature");
  if (const_map.size() != expanded->expansion_size())
    throw input_error("constant map covers " + std::to_string(const_map.size()) + " of " +
                      std::to_string(expanded->expansion_size()) + " constants");
  FiniteStructure out(expanded, m.size(), m.name());
  out.set_labels(m.labels());
  for (std::size_t s = 0; s < m.signature().size(); ++s) {
    auto t = m.table(s);
    out.set_table(s, std::vector<Element>(t.begin(), t.end()));
  }
  for (std::size_t a = 0; a < const_map.size(); ++a) {
    if (const_map[a] >= m.size())
      throw input_error("constant " + (*expanded)[expanded->element_constant(a)].name + " mapped to " +
                        std::to_string(const_map[a]) + ", outside the universe");
    out.set_value(expanded->element_constant(a), {}, const_map[a]);
  }
  return out;
}

/// ⟨A, a⟩_{a∈A}.
inline FiniteStructure self_expansion(const FiniteStructure& a, SigPtr expanded = nullptr) {
  expanded = require_element_expansion(a, std::move(expanded));
  std::vector<Element> id(a.size());
  for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<Element>(i);
  return expand_structure(a, expanded, id);
}

}  // namespace fmw

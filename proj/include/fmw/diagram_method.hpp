#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmw/constructions.hpp"
#include "fmw/error.hpp"
#include "fmw/formula.hpp"
#include "fmw/morphism.hpp"
#include "fmw/product.hpp"
#include "fmw/structure.hpp"

namespace fmw {

/// A diagram sentence the candidate structure gets wrong. For a negative
/// sentence ¬ξ, `sentence` is ξ.
class diagram_violation : public error {
 public:
  diagram_violation(Atom sentence, bool negated, const Signature& expanded)
      : error("structure does not satisfy " + render(sentence, negated, expanded)),
        sentence_(std::move(sentence)),
        negated_(negated),
        text_(render(sentence_, negated_, expanded)) {}

  const Atom& sentence() const { return sentence_; }
  bool negated() const { return negated_; }
  const std::string& text() const { return text_; }

 private:
  static std::string render(const Atom& a, bool negated, const Signature& sig) {
    return negated ? negated_to_string(a, sig) : to_string(a, sig);
  }
  Atom sentence_;
  bool negated_;
  std::string text_;
};

/// First flat diagram sentence of A false in s, in diagram order.
template <StructureLike S>
std::optional<std::pair<Atom, bool>> first_diagram_failure(const FiniteStructure& a, const S& s,
                                                           bool negative_only = false) {
  std::optional<std::pair<Atom, bool>> bad;
  for_each_flat_atom(a, s.signature(), [&](Atom atom, bool truth) {
    if (bad || (negative_only && truth)) return;
    if (eval_sentence(s, atom) != truth) bad.emplace(std::move(atom), !truth);
  });
  return bad;
}

/// If B ⊨ diag(A), then a ↦ ȧ^B embeds A into B|Σ. The map is read off the
/// constants and verified; nothing is searched.
inline Morphism embed_from_diagram(const FiniteStructure& a, const FiniteStructure& b) {
  require_element_expansion(a, b.sig_ptr());
  if (auto bad = first_diagram_failure(a, b)) throw diagram_violation(bad->first, bad->second, b.signature());
  std::vector<Element> h(a.size());
  for (std::size_t e = 0; e < a.size(); ++e) h[e] = b.apply(b.signature().element_constant(e), {});
  return check_morphism(std::move(h), a, reduct(b, a.sig_ptr()), MorphismKind::embedding);
}

template <class E>
struct DiagramEmbedding {
  /// Substructure of s|Σ generated by the constants.
  Generated<E> sub;
  /// a ↦ ȧ^s, as an embedding of A into sub.
  Morphism embedding;
  /// ȧ^s for every a.
  std::vector<E> images;
};

/// The same construction over a lazily evaluated structure: the embedding
/// lands in the substructure of s|Σ generated by {ȧ^s}.
template <StructureLike S>
DiagramEmbedding<typename S::element_type> embed_from_diagram(const FiniteStructure& a, const S& s,
                                                              const Limits& limits) {
  using E = typename S::element_type;
  const Signature& sig = s.signature();
  if (!sig.is_expanded() || sig.expansion_size() != a.size() || sig.base_size() != a.signature().size() ||
      !sig.extends(a.signature()))
    throw signature_error("structure is not over the expansion of A's signature by A's elements");
  if (auto bad = first_diagram_failure(a, s)) throw diagram_violation(bad->first, bad->second, sig);
  std::vector<E> images;
  for (std::size_t e = 0; e < a.size(); ++e) images.push_back(s.apply(sig.element_constant(e), std::span<const E>{}));
  BaseReduct<S> base(s);
  auto sub = generated_substructure(base, images, a.sig_ptr(), limits, "generated");
  if (auto v = inclusion_violation(base, sub.structure, sub.elements)) throw error("inclusion check: " + *v);
  std::vector<Element> h(a.size());
  for (std::size_t e = 0; e < a.size(); ++e)
    h[e] = static_cast<Element>(std::lower_bound(sub.elements.begin(), sub.elements.end(), images[e]) -
                                sub.elements.begin());
  Morphism m = check_morphism(std::move(h), a, sub.structure, MorphismKind::embedding);
  return {std::move(sub), std::move(m), std::move(images)};
}

/// Two closed Σ(A)-terms with one value in B and different values in A, or
/// a relation sentence true in B and false in A. Either way `sentence` is
/// true in B while ¬sentence belongs to the full negative diagram of A.
class quotient_conflict : public error {
 public:
  quotient_conflict(Atom sentence, const Signature& expanded)
      : error("pairing conflict: " + to_string(sentence, expanded) + " holds, violating " +
              negated_to_string(sentence, expanded)),
        sentence_(std::move(sentence)),
        text_(negated_to_string(sentence_, expanded)) {}

  const Atom& sentence() const { return sentence_; }
  /// The violated negative sentence, e.g. ¬(m(ȧ1,ȧ1)=ȧ1).
  const std::string& text() const { return text_; }

 private:
  Atom sentence_;
  std::string text_;
};

template <class E>
struct QuotientPresentation {
  /// C: the substructure of s|Σ generated by {ȧ^s}.
  Generated<E> sub;
  /// A closed Σ(A)-term naming each element of C, first found.
  std::vector<Term> terms;
  /// C ↠ A, c = t^s ↦ t^A.
  Morphism surjection;
};

/// Pairs each element t^s of the generated substructure with t^A by closing
/// {(ȧ^s, a)} under the functions applied to both coordinates. Throws
/// quotient_conflict as soon as one element would get two A-values, or a
/// relation holds on elements whose A-values fail it. Otherwise C ↠ A is a
/// homomorphism, checked before returning.
template <StructureLike S>
QuotientPresentation<typename S::element_type> quotient_from_negative_diagram(const FiniteStructure& a, const S& s,
                                                                               const Limits& limits = Limits{}) {
  using E = typename S::element_type;
  const Signature& sig = s.signature();
  const Signature& base = a.signature();
  if (!sig.is_expanded() || sig.expansion_size() != a.size() || sig.base_size() != base.size() ||
      !sig.extends(base))
    throw signature_error("structure is not over the expansion of A's signature by A's elements");

  struct Pair {
    Element value;
    Term term;
  };
  std::map<E, Pair> known;
  std::vector<E> list;
  auto meet = [&](E e, Element value, Term term) {
    auto it = known.find(e);
    if (it == known.end()) {
      known.emplace(e, Pair{value, term});
      list.push_back(std::move(e));
      if (list.size() > limits.max_product)
        throw resource_error("generated substructure exceeds " + std::to_string(limits.max_product) + " elements");
      return true;
    }
    if (it->second.value != value) throw quotient_conflict(Atom::equation(it->second.term, term).oriented(), sig);
    return false;
  };

  for (std::size_t e = 0; e < a.size(); ++e) {
    const std::size_t c = sig.element_constant(e);
    meet(s.apply(c, std::span<const E>{}), static_cast<Element>(e), Term::apply(c));
  }
  for (std::size_t f = 0; f < base.size(); ++f)
    if (base[f].is_constant()) meet(s.apply(f, std::span<const E>{}), a.apply(f, {}), Term::apply(f));

  std::vector<E> args;
  Tuple values;
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t f = 0; f < base.size(); ++f) {
      if (!base[f].is_function() || base[f].arity == 0) continue;
      const std::size_t snapshot = list.size();
      for_each_tuple(snapshot, base[f].arity, [&](std::span<const Element> idx) {
        args.clear();
        values.clear();
        std::vector<Term> ts;
        for (Element i : idx) {
          const Pair& p = known.at(list[i]);
          args.push_back(list[i]);
          values.push_back(p.value);
          ts.push_back(p.term);
        }
        if (meet(s.apply(f, std::span<const E>(args)), a.apply(f, values), Term::apply(f, std::move(ts))))
          grew = true;
      });
    }
  }
  for (std::size_t r = 0; r < base.size(); ++r) {
    if (!base[r].is_relation()) continue;
    for_each_tuple(list.size(), base[r].arity, [&](std::span<const Element> idx) {
      args.clear();
      values.clear();
      for (Element i : idx) {
        args.push_back(list[i]);
        values.push_back(known.at(list[i]).value);
      }
      if (s.holds(r, std::span<const E>(args)) && !a.holds(r, values)) {
        std::vector<Term> ts;
        for (Element i : idx) ts.push_back(known.at(list[i]).term);
        throw quotient_conflict(Atom::relation(r, std::move(ts)), sig);
      }
    });
  }

  std::sort(list.begin(), list.end());
  BaseReduct<S> reduct_view(s);
  FiniteStructure c = materialize(reduct_view, list, a.sig_ptr(), "generated", limits);
  if (auto v = inclusion_violation(reduct_view, c, list)) throw error("inclusion check: " + *v);
  std::vector<Element> h(list.size());
  std::vector<Term> terms;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Pair& p = known.at(list[i]);
    h[i] = p.value;
    terms.push_back(p.term);
  }
  Morphism onto = check_morphism(std::move(h), c, a, MorphismKind::homomorphism);
  if (!is_surjective(onto)) throw error("quotient map is not onto");
  return {Generated<E>{std::move(c), std::move(list)}, std::move(terms), std::move(onto)};
}

}  // namespace fmw

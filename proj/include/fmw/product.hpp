#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/filter.hpp"
#include "fmw/structure.hpp"

namespace fmw {

/// Direct product of finite factors, evaluated on demand. Elements are
/// tuples; functions act componentwise and a relation holds iff it holds at
/// every index. With no factors this is the one-element product (the empty
/// tuple), in which every relation holds.
class ProductView {
 public:
  using element_type = Tuple;

  ProductView(SigPtr sig, std::vector<FiniteStructure> factors)
      : sig_(std::move(sig)), factors_(std::move(factors)) {
    for (const auto& f : factors_)
      if (!same_signature(f.sig_ptr(), sig_))
        throw signature_error("factor '" + f.name() + "' has a different signature");
  }

  const Signature& signature() const { return *sig_; }
  const SigPtr& sig_ptr() const { return sig_; }
  const std::vector<FiniteStructure>& factors() const { return factors_; }
  std::size_t factor_count() const { return factors_.size(); }

  std::uint64_t cardinality() const {
    std::uint64_t c = 1;
    for (const auto& f : factors_) c = checked_mul(c, f.size());
    return c;
  }

  Tuple apply(std::size_t sym, std::span<const Tuple> args) const {
    Tuple out(factors_.size());
    Tuple local(args.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      for (std::size_t j = 0; j < args.size(); ++j) local[j] = args[j].at(i);
      out[i] = factors_[i].apply(sym, local);
    }
    return out;
  }

  /// Indices at which the relation holds on the projections.
  IndexSet holds_at(std::size_t sym, std::span<const Tuple> args) const {
    if (factors_.size() > max_index_bits) throw resource_error("more than 64 factors");
    IndexSet mask = 0;
    Tuple local(args.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      for (std::size_t j = 0; j < args.size(); ++j) local[j] = args[j].at(i);
      if (factors_[i].holds(sym, local)) mask |= IndexSet{1} << i;
    }
    return mask;
  }

  bool holds(std::size_t sym, std::span<const Tuple> args) const {
    Tuple local(args.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      for (std::size_t j = 0; j < args.size(); ++j) local[j] = args[j].at(i);
      if (!factors_[i].holds(sym, local)) return false;
    }
    return true;
  }

  /// Tuple number `index` in lexicographic order (first factor most significant).
  Tuple tuple_at(std::uint64_t index) const {
    Tuple t(factors_.size());
    for (std::size_t i = factors_.size(); i-- > 0;) {
      t[i] = static_cast<Element>(index % factors_[i].size());
      index /= factors_[i].size();
    }
    return t;
  }

  /// {i : a_i = b_i}.
  static IndexSet agreement(const Tuple& a, const Tuple& b) {
    IndexSet m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] == b[i]) m |= IndexSet{1} << i;
    return m;
  }

 private:
  SigPtr sig_;
  std::vector<FiniteStructure> factors_;
};

/// Reduced product ∏_F A_i evaluated on demand. Elements are the
/// lexicographically least representatives of ~F classes: a ~F b iff
/// {i : a_i = b_i} ∈ F. Since F contains its least member G and every member
/// contains G, a ~F b iff a and b agree on G, so the least representative
/// keeps the coordinates in G and zeroes the rest.
class ReducedProductView {
 public:
  using element_type = Tuple;

  ReducedProductView(ProductView product, FilterOnFiniteSet filter)
      : product_(std::move(product)), filter_(std::move(filter)), least_(filter_.least()) {
    if (product_.factor_count() == 0) throw input_error("a reduced product needs at least one factor");
    if (filter_.index_size() != product_.factor_count())
      throw input_error("filter over " + std::to_string(filter_.index_size()) + " indices, but " +
                        std::to_string(product_.factor_count()) + " factors");
  }

  const Signature& signature() const { return product_.signature(); }
  const SigPtr& sig_ptr() const { return product_.sig_ptr(); }
  const ProductView& product() const { return product_; }
  const FilterOnFiniteSet& filter() const { return filter_; }

  Tuple canonical(Tuple t) const {
    for (std::size_t i = 0; i < t.size(); ++i)
      if (!(least_ >> i & 1)) t[i] = 0;
    return t;
  }

  /// The defining relation, straight from filter membership.
  bool equivalent(const Tuple& a, const Tuple& b) const {
    return filter_.contains(ProductView::agreement(a, b));
  }

  Tuple apply(std::size_t sym, std::span<const Tuple> args) const {
    return canonical(product_.apply(sym, args));
  }
  bool holds(std::size_t sym, std::span<const Tuple> args) const {
    return filter_.contains(product_.holds_at(sym, args));
  }

 private:
  ProductView product_;
  FilterOnFiniteSet filter_;
  IndexSet least_;
};

/// Builds a FiniteStructure whose element i is elements[i] of `s`. The
/// element list must be closed under the functions of `sig` (a prefix of the
/// view's signature).
template <StructureLike S>
FiniteStructure materialize(const S& s, const std::vector<typename S::element_type>& elements, SigPtr sig,
                            std::string name = {}, const Limits& limits = Limits{}) {
  using E = typename S::element_type;
  if (!s.signature().extends(*sig)) throw signature_error("materialize: signature is not a prefix");
  std::map<E, Element> index;
  for (std::size_t i = 0; i < elements.size(); ++i) index.emplace(elements[i], static_cast<Element>(i));
  if (index.size() != elements.size()) throw input_error("materialize: duplicate elements");
  FiniteStructure out(sig, elements.size(), std::move(name), limits);
  std::vector<E> args;
  for (std::size_t sym = 0; sym < sig->size(); ++sym) {
    const Symbol& symbol = (*sig)[sym];
    std::vector<Element> table;
    table.reserve(checked_pow(elements.size(), symbol.arity));
    for_each_tuple(elements.size(), symbol.arity, [&](std::span<const Element> idx) {
      args.clear();
      for (Element i : idx) args.push_back(elements[i]);
      if (symbol.is_function()) {
        auto it = index.find(s.apply(sym, std::span<const E>(args)));
        if (it == index.end()) throw error("materialize: elements not closed under '" + symbol.name + "'");
        table.push_back(it->second);
      } else {
        table.push_back(s.holds(sym, std::span<const E>(args)) ? 1 : 0);
      }
    });
    out.set_table(sym, std::move(table));
  }
  return out;
}

template <class E>
struct Generated {
  FiniteStructure structure;
  /// elements[i] is the ambient element behind structure element i.
  std::vector<E> elements;
};

/// Least subset containing `seeds` and closed under every function of the
/// ambient signature (constants included), with relations restricted.
/// Universe order is ascending ambient order, so a full seed reproduces the
/// ambient structure.
template <StructureLike S>
Generated<typename S::element_type> generated_substructure(const S& s,
                                                           std::vector<typename S::element_type> seeds,
                                                           SigPtr sig, const Limits& limits = Limits{},
                                                           std::string name = {}) {
  using E = typename S::element_type;
  if (seeds.empty() && !sig->has_constant())
    throw input_error("empty seed generates nothing without constants");
  std::set<E> known(seeds.begin(), seeds.end());
  std::vector<E> list(known.begin(), known.end());
  auto add = [&](E e) {
    if (known.insert(e).second) {
      list.push_back(std::move(e));
      if (list.size() > limits.max_product)
        throw resource_error("generated substructure exceeds " + std::to_string(limits.max_product) + " elements");
    }
  };
  for (std::size_t f = 0; f < sig->size(); ++f)
    if ((*sig)[f].is_constant()) add(s.apply(f, std::span<const E>{}));
  bool grew = true;
  std::vector<E> args;
  while (grew) {
    grew = false;
    const std::size_t before = list.size();
    for (std::size_t f = 0; f < sig->size(); ++f) {
      const Symbol& sym = (*sig)[f];
      if (!sym.is_function() || sym.arity == 0) continue;
      const std::size_t snapshot = list.size();
      for_each_tuple(snapshot, sym.arity, [&](std::span<const Element> idx) {
        args.clear();
        for (Element i : idx) args.push_back(list[i]);
        add(s.apply(f, std::span<const E>(args)));
      });
    }
    grew = list.size() != before;
  }
  std::sort(list.begin(), list.end());
  FiniteStructure sub = materialize(s, list, sig, std::move(name), limits);
  return {std::move(sub), std::move(list)};
}

template <StructureLike S>
Generated<typename S::element_type> generated_substructure(const S& s,
                                                           std::vector<typename S::element_type> seeds,
                                                           const Limits& limits = Limits{}) {
  return generated_substructure(s, std::move(seeds), s.sig_ptr(), limits);
}

/// Checks that `elements` spans a substructure of `s` whose tables are those
/// of `sub`: functions agree on every argument tuple and relations agree in
/// both directions. Returns a description of the first mismatch.
template <StructureLike S>
std::optional<std::string> inclusion_violation(const S& s, const FiniteStructure& sub,
                                               const std::vector<typename S::element_type>& elements) {
  using E = typename S::element_type;
  if (elements.size() != sub.size()) return "element list has the wrong length";
  if (!s.signature().extends(sub.signature())) return "signature mismatch";
  if (std::set<E>(elements.begin(), elements.end()).size() != elements.size()) return "inclusion not injective";
  const Signature& sig = sub.signature();
  std::optional<std::string> bad;
  std::vector<E> args;
  for (std::size_t sym = 0; sym < sig.size() && !bad; ++sym) {
    for_each_tuple(sub.size(), sig[sym].arity, [&](std::span<const Element> idx) {
      if (bad) return;
      args.clear();
      for (Element i : idx) args.push_back(elements[i]);
      if (sig[sym].is_function()) {
        if (!(s.apply(sym, std::span<const E>(args)) == elements[sub.apply(sym, idx)]))
          bad = "function '" + sig[sym].name + "' disagrees with the ambient structure";
      } else if (s.holds(sym, std::span<const E>(args)) != sub.holds(sym, idx)) {
        bad = "relation '" + sig[sym].name + "' disagrees with the ambient structure";
      }
    });
  }
  return bad;
}

}  // namespace fmw

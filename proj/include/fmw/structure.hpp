#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/formula.hpp"
#include "fmw/signature.hpp"

namespace fmw {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;
/// Values of a formula's variables, indexed by variable id.
using Assignment = std::vector<Element>;

/// Anything that interprets a signature over some element type: materialized
/// structures as well as lazily evaluated products and reduced products.
template <class S>
concept StructureLike = requires(const S& s, std::size_t sym,
                                 std::span<const typename S::element_type> args) {
  typename S::element_type;
  { s.signature() } -> std::convertible_to<const Signature&>;
  { s.apply(sym, args) } -> std::convertible_to<typename S::element_type>;
  { s.holds(sym, args) } -> std::convertible_to<bool>;
};

/// Calls f(span<const Element>) for every k-tuple over {0..n-1} in
/// lexicographic order (first coordinate most significant).
template <class F>
void for_each_tuple(std::size_t n, std::size_t k, F&& f) {
  Tuple t(k, 0);
  if (k == 0) {
    f(std::span<const Element>(t));
    return;
  }
  if (n == 0) return;
  while (true) {
    f(std::span<const Element>(t));
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (++t[i] < n) break;
      t[i] = 0;
      if (i == 0) return;
    }
  }
}

/// Finite Σ-structure on the universe {0..n-1}, n ≥ 1. Every symbol has a
/// dense table of size n^arity in lexicographic argument order; function
/// tables hold values, relation tables hold 0/1.
class FiniteStructure {
 public:
  using element_type = Element;

  FiniteStructure(SigPtr sig, std::size_t size, std::string name = {},
                  const Limits& limits = Limits{})
      : sig_(std::move(sig)), size_(size), name_(std::move(name)) {
    if (!sig_) throw input_error("structure without signature");
    if (size_ == 0) throw input_error("structures must have a nonempty universe");
    tables_.resize(sig_->size());
    for (std::size_t s = 0; s < sig_->size(); ++s) {
      std::uint64_t cells = checked_pow(size_, (*sig_)[s].arity);
      if (cells > limits.max_table)
        throw resource_error("table for '" + (*sig_)[s].name + "' needs " + std::to_string(cells) +
                             " cells (cap " + std::to_string(limits.max_table) + ")");
      tables_[s].assign(cells, 0);
    }
  }

  const Signature& signature() const { return *sig_; }
  const SigPtr& sig_ptr() const { return sig_; }
  std::size_t size() const { return size_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != size_) throw input_error("label count differs from universe size");
    labels_ = std::move(labels);
  }
  std::string label(Element e) const { return labels_.empty() ? std::to_string(e) : labels_.at(e); }

  std::size_t offset(std::span<const Element> args) const {
    std::size_t off = 0;
    for (Element a : args) {
      if (a >= size_) throw input_error("element " + std::to_string(a) + " out of range");
      off = off * size_ + a;
    }
    return off;
  }

  Element apply(std::size_t sym, std::span<const Element> args) const {
    const Symbol& s = symbol(sym, args.size());
    if (!s.is_function()) throw input_error("'" + s.name + "' is not a function symbol");
    return tables_[sym][offset(args)];
  }
  bool holds(std::size_t sym, std::span<const Element> args) const {
    const Symbol& s = symbol(sym, args.size());
    if (!s.is_relation()) throw input_error("'" + s.name + "' is not a relation symbol");
    return tables_[sym][offset(args)] != 0;
  }

  void set_value(std::size_t sym, std::span<const Element> args, Element v) {
    const Symbol& s = symbol(sym, args.size());
    if (!s.is_function()) throw input_error("'" + s.name + "' is not a function symbol");
    if (v >= size_) throw input_error("value " + std::to_string(v) + " out of range");
    tables_[sym][offset(args)] = v;
  }
  void set_holds(std::size_t sym, std::span<const Element> args, bool v) {
    const Symbol& s = symbol(sym, args.size());
    if (!s.is_relation()) throw input_error("'" + s.name + "' is not a relation symbol");
    tables_[sym][offset(args)] = v ? 1 : 0;
  }

  /// Raw table, lexicographic argument order.
  std::span<const Element> table(std::size_t sym) const { return tables_.at(sym); }

  /// Replaces a whole table; values are range-checked.
  void set_table(std::size_t sym, std::vector<Element> values) {
    if (values.size() != tables_.at(sym).size())
      throw input_error("table for '" + (*sig_)[sym].name + "' needs " +
                        std::to_string(tables_[sym].size()) + " entries, got " +
                        std::to_string(values.size()));
    const Element bound = (*sig_)[sym].is_function() ? static_cast<Element>(size_) : 2;
    for (Element v : values)
      if (v >= bound) throw input_error("table entry " + std::to_string(v) + " out of range for '" + (*sig_)[sym].name + "'");
    tables_[sym] = std::move(values);
  }

  /// Table equality over the same signature; names and labels are ignored.
  friend bool operator==(const FiniteStructure& a, const FiniteStructure& b) {
    return same_signature(a.sig_, b.sig_) && a.size_ == b.size_ && a.tables_ == b.tables_;
  }

 private:
  const Symbol& symbol(std::size_t sym, std::size_t argc) const {
    if (sym >= sig_->size()) throw input_error("unknown symbol index " + std::to_string(sym));
    const Symbol& s = (*sig_)[sym];
    if (s.arity != argc) throw input_error("arity mismatch for '" + s.name + "'");
    return s;
  }

  SigPtr sig_;
  std::size_t size_;
  std::string name_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Element>> tables_;
};

/// Read-only view of a structure over an expansion as a structure over the
/// base signature. Base symbol indices coincide, so this only narrows the
/// signature.
template <StructureLike S>
class BaseReduct {
 public:
  using element_type = typename S::element_type;

  explicit BaseReduct(const S& inner)
      : inner_(&inner), base_(make_sig(inner.signature().base())) {}

  const Signature& signature() const { return *base_; }
  const SigPtr& sig_ptr() const { return base_; }
  element_type apply(std::size_t sym, std::span<const element_type> args) const {
    return inner_->apply(sym, args);
  }
  bool holds(std::size_t sym, std::span<const element_type> args) const {
    return inner_->holds(sym, args);
  }

 private:
  const S* inner_;
  SigPtr base_;
};

// ---------------------------------------------------------------------------
// Evaluation

template <StructureLike S>
typename S::element_type eval_term(const S& s, std::span<const typename S::element_type> asg,
                                   const Term& t) {
  using E = typename S::element_type;
  if (t.is_variable()) {
    if (t.index >= asg.size()) throw input_error("unbound variable id " + std::to_string(t.index));
    return asg[t.index];
  }
  if (t.index >= s.signature().size()) throw input_error("unknown symbol index " + std::to_string(t.index));
  std::vector<E> vals;
  vals.reserve(t.args.size());
  for (const auto& a : t.args) vals.push_back(eval_term(s, asg, a));
  return s.apply(t.index, std::span<const E>(vals));
}

template <StructureLike S>
bool eval_atom(const S& s, std::span<const typename S::element_type> asg, const Atom& a) {
  using E = typename S::element_type;
  if (a.is_equation()) return eval_term(s, asg, a.args[0]) == eval_term(s, asg, a.args[1]);
  std::vector<E> vals;
  vals.reserve(a.args.size());
  for (const auto& t : a.args) vals.push_back(eval_term(s, asg, t));
  return s.holds(a.symbol, std::span<const E>(vals));
}

/// Truth of a variable-free atom (a sentence).
template <StructureLike S>
bool eval_sentence(const S& s, const Atom& a) {
  return eval_atom(s, std::span<const typename S::element_type>{}, a);
}

/// A ⊨ φ[asg]: some negative atom is false or the positive atom is true.
template <StructureLike S>
bool clause_holds(const S& s, std::span<const typename S::element_type> asg, const HornFormula& phi) {
  for (const auto& n : phi.negatives())
    if (!eval_atom(s, asg, n)) return true;
  return phi.positive() && eval_atom(s, asg, *phi.positive());
}

struct Satisfaction {
  bool holds = true;
  std::optional<Assignment> witness;  // lexicographically least falsifying assignment
  std::uint64_t assignments_checked = 0;
};

inline void require_formula_signature(const Signature& structure_sig, const HornFormula& phi) {
  if (!structure_sig.extends(phi.signature()))
    throw signature_error("formula signature '" + phi.signature().name() +
                          "' does not match structure signature '" + structure_sig.name() + "'");
}

/// A ⊨ φ under the universal-closure convention: every assignment of the
/// free variables satisfies the clause. Enumerates |A|^n assignments in
/// lexicographic order and stops at the first falsifying one.
inline Satisfaction satisfies(const FiniteStructure& a, const HornFormula& phi,
                              const Limits& limits = Limits{}) {
  require_formula_signature(a.signature(), phi);
  const std::uint64_t total = checked_pow(a.size(), phi.arity());
  if (total > limits.max_assignments)
    throw resource_error("satisfaction check needs " + std::to_string(total) +
                         " assignments (cap " + std::to_string(limits.max_assignments) + ")");
  Satisfaction out;
  bool done = false;
  for_each_tuple(a.size(), phi.arity(), [&](std::span<const Element> asg) {
    if (done) return;
    ++out.assignments_checked;
    if (!clause_holds(a, asg, phi)) {
      out.holds = false;
      out.witness = Assignment(asg.begin(), asg.end());
      done = true;
    }
  });
  return out;
}

inline std::string format_assignment(const HornFormula& phi, const Assignment& asg) {
  std::string out;
  for (std::size_t i = 0; i < phi.arity() && i < asg.size(); ++i) {
    if (i) out += ", ";
    out += phi.variables()[i] + "=" + std::to_string(asg[i]);
  }
  return out;
}

/// A finite stand-in for a class of structures: named members over one
/// signature.
class StructureCatalog {
 public:
  explicit StructureCatalog(SigPtr sig) : sig_(std::move(sig)) {
    if (!sig_) throw input_error("catalog without signature");
  }

  void add(FiniteStructure m) {
    if (!same_signature(m.sig_ptr(), sig_))
      throw signature_error("catalog member '" + m.name() + "' has a different signature");
    for (const auto& x : members_)
      if (x.name() == m.name()) throw input_error("duplicate catalog member '" + m.name() + "'");
    members_.push_back(std::move(m));
  }

  const Signature& signature() const { return *sig_; }
  const SigPtr& sig_ptr() const { return sig_; }
  const std::vector<FiniteStructure>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

 private:
  SigPtr sig_;
  std::vector<FiniteStructure> members_;
};

struct ClassSatisfaction {
  bool holds = true;
  std::optional<std::string> failing_member;
  std::optional<Assignment> witness;
};

/// K ⊨ φ: every member satisfies φ. Reports the first failing member in
/// catalog order. Vacuously true for an empty catalog.
inline ClassSatisfaction class_satisfies(const StructureCatalog& k, const HornFormula& phi,
                                         const Limits& limits = Limits{}) {
  require_formula_signature(k.signature(), phi);
  for (const auto& m : k.members()) {
    auto s = satisfies(m, phi, limits);
    if (!s.holds) return {false, m.name(), s.witness};
  }
  return {};
}

/// One element; every function maps to it and every relation holds on the
/// constant tuple.
inline FiniteStructure unit_structure(SigPtr sig, std::string name = "unit") {
  FiniteStructure u(sig, 1, std::move(name));
  for (std::size_t s = 0; s < sig->size(); ++s) {
    if ((*sig)[s].is_relation()) {
      Tuple zeros((*sig)[s].arity, 0);
      u.set_holds(s, zeros, true);
    }
  }
  return u;
}

/// B|Σ: drops the element constants of an expanded signature.
inline FiniteStructure reduct(const FiniteStructure& b, SigPtr base = nullptr) {
  if (!b.signature().is_expanded()) throw input_error("reduct needs a structure over an expanded signature");
  if (!base) base = make_sig(b.signature().base());
  if (!b.signature().extends(*base) || base->size() != b.signature().base_size())
    throw signature_error("reduct target is not the base signature");
  FiniteStructure out(base, b.size(), b.name());
  out.set_labels(b.labels());
  for (std::size_t s = 0; s < base->size(); ++s) {
    auto t = b.table(s);
    out.set_table(s, std::vector<Element>(t.begin(), t.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// DSL rendering

inline std::string signature_to_dsl(const Signature& sig) {
  std::ostringstream os;
  os << "signature " << sig.name() << " {";
  for (const auto& s : sig.symbols())
    os << ' ' << (s.is_function() ? "fn " : "rel ") << s.name << '/' << s.arity << ';';
  os << " }\n";
  return os.str();
}

/// `structure NAME : SIG { universe N; fn f = [...]; rel r = {...}; }`.
/// Function tables print one row per value of all but the last argument.
inline std::string structure_to_dsl(const FiniteStructure& a, std::string name = {},
                                    std::string sig_name = {}) {
  if (name.empty()) name = a.name().empty() ? "S" : a.name();
  if (sig_name.empty()) sig_name = a.signature().name();
  std::ostringstream os;
  os << "structure " << name << " : " << sig_name << " {\n  universe ";
  if (a.labels().empty()) {
    os << a.size();
  } else {
    os << '{';
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? ", " : "") << a.labels()[i];
    os << '}';
  }
  os << ";\n";
  const auto& sig = a.signature();
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const Symbol& sym = sig[s];
    auto t = a.table(s);
    if (sym.is_function()) {
      os << "  fn " << sym.name << " = [";
      const std::size_t row = sym.arity == 0 ? 1 : a.size();
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << (i % row == 0 ? "; " : ", ");
        os << t[i];
      }
      os << "];\n";
    } else {
      os << "  rel " << sym.name << " = {";
      bool first = true;
      for_each_tuple(a.size(), sym.arity, [&](std::span<const Element> args) {
        if (!a.holds(s, args)) return;
        os << (first ? "" : ", ") << '(';
        for (std::size_t i = 0; i < args.size(); ++i) os << (i ? "," : "") << args[i];
        os << ')';
        first = false;
      });
      os << "};\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace fmw

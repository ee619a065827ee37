#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/formula.hpp"
#include "fmw/structure.hpp"

namespace fmw {

struct EnumerationBounds {
  std::size_t max_vars = 2;
  std::size_t max_term_depth = 0;
  std::size_t max_negatives = 0;
};

/// Every atom over the variables x0..x(V-1) with terms of depth at most D,
/// equations oriented (reflexive ones included). Atom ids follow atom order,
/// so comparing ids compares atoms.
class AtomPool {
 public:
  using Id = std::uint32_t;
  static constexpr Id none = static_cast<Id>(-1);

  AtomPool(SigPtr sig, std::size_t vars, std::size_t depth, const Limits& limits = Limits{})
      : sig_(std::move(sig)), vars_(vars) {
    const Signature& s = *sig_;
    const std::uint64_t cap = std::min<std::uint64_t>(limits.max_formulas, 1u << 20);
    std::map<Term, Id> term_id;
    auto add_term = [&](Term t, Node node) {
      if (term_id.emplace(t, static_cast<Id>(terms_.size())).second) {
        terms_.push_back(std::move(t));
        nodes_.push_back(std::move(node));
        if (terms_.size() > cap) throw resource_error("term pool exceeds " + std::to_string(cap) + " terms");
      }
    };
    for (std::size_t v = 0; v < vars; ++v) add_term(Term::variable(v), Node{true, v, {}});
    for (std::size_t f = 0; f < s.size(); ++f)
      if (s[f].is_constant()) add_term(Term::apply(f), Node{false, f, {}});
    std::size_t layer_begin = 0;
    for (std::size_t d = 1; d <= depth; ++d) {
      const std::size_t layer_end = terms_.size();
      for (std::size_t f = 0; f < s.size(); ++f) {
        if (!s[f].is_function() || s[f].arity == 0) continue;
        for_each_tuple(layer_end, s[f].arity, [&](std::span<const Element> idx) {
          // only tuples with an argument from the previous layer give new terms
          if (std::none_of(idx.begin(), idx.end(), [&](Element i) { return i >= layer_begin; })) return;
          std::vector<Term> args;
          std::vector<Id> child;
          for (Element i : idx) {
            args.push_back(terms_[i]);
            child.push_back(static_cast<Id>(i));
          }
          add_term(Term::apply(f, std::move(args)), Node{false, f, std::move(child)});
        });
      }
      layer_begin = layer_end;
    }

    std::vector<std::pair<Atom, std::vector<Id>>> raw;
    const std::size_t nt = terms_.size();
    for (std::size_t r = 0; r < s.size(); ++r) {
      if (!s[r].is_relation()) continue;
      if (checked_pow(nt, s[r].arity) > cap) throw resource_error("atom pool too large");
      for_each_tuple(nt, s[r].arity, [&](std::span<const Element> idx) {
        std::vector<Term> args;
        std::vector<Id> ids;
        for (Element i : idx) {
          args.push_back(terms_[i]);
          ids.push_back(static_cast<Id>(i));
        }
        raw.emplace_back(Atom::relation(r, std::move(args)), std::move(ids));
      });
    }
    if (nt * (nt + 1) / 2 > cap) throw resource_error("atom pool too large");
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        if (terms_[j] < terms_[i]) continue;
        raw.emplace_back(Atom::equation(terms_[i], terms_[j]), std::vector<Id>{static_cast<Id>(i), static_cast<Id>(j)});
      }
    if (raw.size() > cap) throw resource_error("atom pool exceeds " + std::to_string(cap) + " atoms");
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [atom, ids] : raw) {
      atoms_.push_back(std::move(atom));
      atom_terms_.push_back(std::move(ids));
    }
    words_ = (atoms_.size() + 63) / 64;
  }

  const Signature& signature() const { return *sig_; }
  const SigPtr& sig_ptr() const { return sig_; }
  std::size_t vars() const { return vars_; }
  std::size_t size() const { return atoms_.size(); }
  std::size_t words() const { return words_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(Id id) const { return atoms_[id]; }
  const std::vector<Term>& terms() const { return terms_; }

  std::optional<Id> find(const Atom& a) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end() || !(*it == a)) return std::nullopt;
    return static_cast<Id>(it - atoms_.begin());
  }

  /// Values of every pool term under a variable assignment.
  void eval_terms(const FiniteStructure& m, std::span<const Element> asg, std::vector<Element>& out) const {
    if (asg.size() != vars_) throw input_error("assignment arity differs from the pool");
    for (Element a : asg)
      if (a >= m.size()) throw input_error("element " + std::to_string(a) + " out of range");
    out.resize(terms_.size());
    for (std::size_t t = 0; t < nodes_.size(); ++t) {
      const Node& n = nodes_[t];
      out[t] = n.variable ? asg[n.index] : lookup(m, n.index, n.child, out);
    }
  }

  bool truth(const FiniteStructure& m, std::span<const Element> term_values, Id id) const {
    const auto& ids = atom_terms_[id];
    if (atoms_[id].is_equation()) return term_values[ids[0]] == term_values[ids[1]];
    return lookup(m, atoms_[id].symbol, ids, term_values) != 0;
  }

  /// Truth of every atom under one assignment, as a bitset of words() words.
  void truth_bits(const FiniteStructure& m, std::span<const Element> asg, std::vector<Element>& scratch,
                  std::uint64_t* out) const {
    eval_terms(m, asg, scratch);
    std::fill(out, out + words_, 0);
    for (std::size_t a = 0; a < atoms_.size(); ++a)
      if (truth(m, scratch, static_cast<Id>(a))) out[a >> 6] |= std::uint64_t{1} << (a & 63);
  }

  /// For every permutation π of the variables other than the identity, the
  /// table id ↦ id of the atom with variables renamed by π and reoriented.
  const std::vector<std::vector<Id>>& permutation_tables() const {
    if (!perm_ready_) {
      std::vector<std::size_t> pi(vars_);
      std::iota(pi.begin(), pi.end(), 0);
      while (std::next_permutation(pi.begin(), pi.end())) {
        std::vector<Id> table(atoms_.size());
        for (std::size_t a = 0; a < atoms_.size(); ++a) {
          auto id = find(rename_variables(atoms_[a], pi).oriented());
          if (!id) throw error("atom pool not closed under renaming");
          table[a] = *id;
        }
        perms_.push_back(std::move(table));
      }
      perm_ready_ = true;
    }
    return perms_;
  }

  /// The clause as a formula with variables named x, y, z, ...
  HornFormula formula(std::span<const Id> negatives, Id positive) const {
    std::vector<Atom> neg;
    for (Id n : negatives) neg.push_back(atoms_[n]);
    std::optional<Atom> pos;
    if (positive != none) pos = atoms_[positive];
    std::vector<std::string> names;
    for (std::size_t v = 0; v < vars_; ++v) names.push_back(variable_name(v));
    return HornFormula(sig_, std::move(neg), std::move(pos), std::move(names));
  }

 private:
  // Table entry at the given term values; the values are in range by construction.
  static Element lookup(const FiniteStructure& m, std::size_t sym, std::span<const Id> ids,
                        std::span<const Element> values) {
    std::size_t off = 0;
    for (Id i : ids) off = off * m.size() + values[i];
    return m.table(sym)[off];
  }

  struct Node {
    bool variable;
    std::size_t index;  // variable id or function symbol
    std::vector<Id> child;
  };

  SigPtr sig_;
  std::size_t vars_;
  std::vector<Term> terms_;
  std::vector<Node> nodes_;
  std::vector<Atom> atoms_;
  std::vector<std::vector<Id>> atom_terms_;
  std::size_t words_ = 0;
  mutable bool perm_ready_ = false;
  mutable std::vector<std::vector<Id>> perms_;
};

namespace detail {

inline bool kind_admits(HornKind kind, std::size_t negatives, bool strict) {
  switch (kind) {
    case HornKind::any: return true;
    case HornKind::identity: return strict && negatives == 0;
    case HornKind::quasi_identity: return strict;
    case HornKind::non_strict: return !strict;
  }
  return false;
}

/// Whether (negs, pos) is the least clause among its variable renamings.
/// Clauses compare by sorted negatives, then positive with "none" first.
inline bool is_canonical(const AtomPool& pool, std::span<const AtomPool::Id> negs, AtomPool::Id pos,
                         std::vector<AtomPool::Id>& scratch) {
  auto key = [](AtomPool::Id p) { return p == AtomPool::none ? std::int64_t{-1} : std::int64_t{p}; };
  for (const auto& table : pool.permutation_tables()) {
    scratch.resize(negs.size());
    for (std::size_t i = 0; i < negs.size(); ++i) scratch[i] = table[negs[i]];
    std::sort(scratch.begin(), scratch.end());
    auto c = std::lexicographical_compare_three_way(scratch.begin(), scratch.end(), negs.begin(), negs.end());
    if (c < 0) return false;
    if (c == 0 && key(pos == AtomPool::none ? pos : table[pos]) < key(pos)) return false;
  }
  return true;
}

}  // namespace detail

/// Number of raw (negatives, positive) candidates within the bounds.
inline std::uint64_t raw_clause_count(std::size_t atoms, std::size_t max_negatives) {
  std::uint64_t total = 0;
  std::uint64_t choose = 1;  // C(atoms, k)
  for (std::size_t k = 0; k <= max_negatives && k <= atoms; ++k) {
    if (k > 0) choose = checked_mul(choose, atoms - k + 1) / k;
    total += checked_mul(choose, atoms + 1);
  }
  return total;
}

/// Calls visit(negatives, positive) for every canonical clause of the pool
/// with at most max_negatives negatives, in order of negative count, then
/// negatives, then positive ("none" first). visit returns false to stop.
/// Returns the number of clauses visited.
template <class Visit>
std::uint64_t for_each_canonical_clause(const AtomPool& pool, std::size_t max_negatives, HornKind kind, Visit&& visit,
                                        const Limits& limits = Limits{}) {
  const std::size_t n = pool.size();
  if (raw_clause_count(n, max_negatives) / 8 > limits.max_formulas)
    throw resource_error("formula enumeration would examine " + std::to_string(raw_clause_count(n, max_negatives)) +
                         " candidates (cap " + std::to_string(limits.max_formulas * 8) + ")");
  std::uint64_t emitted = 0;
  std::vector<AtomPool::Id> negs;
  std::vector<AtomPool::Id> scratch;
  bool stop = false;

  auto positives = [&]() {
    const bool allow_none = !negs.empty() && detail::kind_admits(kind, negs.size(), false);
    const bool allow_some = detail::kind_admits(kind, negs.size(), true);
    auto offer = [&](AtomPool::Id p) {
      if (!detail::is_canonical(pool, negs, p, scratch)) return;
      if (++emitted > limits.max_formulas)
        throw resource_error("formula enumeration exceeds " + std::to_string(limits.max_formulas) + " formulas");
      if (!visit(std::span<const AtomPool::Id>(negs), p)) stop = true;
    };
    if (allow_none) offer(AtomPool::none);
    if (allow_some)
      for (AtomPool::Id p = 0; p < n && !stop; ++p) offer(p);
  };

  auto rec = [&](auto&& self, std::size_t k, AtomPool::Id from) -> void {
    if (negs.size() == k) {
      positives();
      return;
    }
    for (AtomPool::Id a = from; a < n && !stop; ++a) {
      negs.push_back(a);
      self(self, k, a + 1);
      negs.pop_back();
    }
  };
  for (std::size_t k = 0; k <= max_negatives && !stop; ++k) rec(rec, k, 0);
  return emitted;
}

/// All basic Horn clauses within the bounds, one per renaming class, with
/// variables in first-occurrence order and duplicate negatives removed.
inline std::vector<HornFormula> enumerate_horn(SigPtr sig, const EnumerationBounds& b, HornKind kind = HornKind::any,
                                               const Limits& limits = Limits{}) {
  AtomPool pool(sig, b.max_vars, b.max_term_depth, limits);
  std::vector<HornFormula> out;
  for_each_canonical_clause(
      pool, b.max_negatives, kind,
      [&](std::span<const AtomPool::Id> negs, AtomPool::Id pos) {
        out.push_back(pool.formula(negs, pos));
        return true;
      },
      limits);
  return out;
}

/// The least variant of φ under variable renaming, with negatives sorted and
/// deduplicated and equations oriented.
inline HornFormula canonical_form(const HornFormula& phi) {
  const std::size_t n = phi.arity();
  if (n > 8) throw resource_error("canonical_form supports at most 8 variables");
  std::vector<std::size_t> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::optional<std::pair<std::vector<Atom>, std::optional<Atom>>> best;
  do {
    std::vector<Atom> negs;
    for (const auto& a : phi.negatives()) negs.push_back(rename_variables(a, pi).oriented());
    std::sort(negs.begin(), negs.end());
    negs.erase(std::unique(negs.begin(), negs.end()), negs.end());
    std::optional<Atom> pos;
    if (phi.positive()) pos = rename_variables(*phi.positive(), pi).oriented();
    std::pair<std::vector<Atom>, std::optional<Atom>> cand{std::move(negs), std::move(pos)};
    if (!best || cand < *best) best = std::move(cand);
  } while (std::next_permutation(pi.begin(), pi.end()));
  std::vector<std::string> names;
  for (std::size_t v = 0; v < n; ++v) names.push_back(variable_name(v));
  return HornFormula(phi.sig_ptr(), std::move(best->first), std::move(best->second), std::move(names));
}

/// Truth bitsets of every pool atom under every assignment of the pool's
/// variables in a structure, assignments in lexicographic order.
class TruthTable {
 public:
  TruthTable(const AtomPool& pool, const FiniteStructure& m, const Limits& limits = Limits{})
      : words_(pool.words()), count_(checked_pow(m.size(), pool.vars())) {
    if (count_ > limits.max_assignments)
      throw resource_error("truth table needs " + std::to_string(count_) + " assignments (cap " +
                           std::to_string(limits.max_assignments) + ")");
    bits_.assign(count_ * words_, 0);
    std::vector<Element> scratch;
    std::size_t row = 0;
    for_each_tuple(m.size(), pool.vars(), [&](std::span<const Element> asg) {
      pool.truth_bits(m, asg, scratch, bits_.data() + row * words_);
      ++row;
    });
  }

  std::uint64_t assignments() const { return count_; }
  const std::uint64_t* row(std::uint64_t asg) const { return bits_.data() + asg * words_; }
  static bool test(const std::uint64_t* row, AtomPool::Id a) { return row[a >> 6] >> (a & 63) & 1; }

  /// Whether the clause holds under every assignment.
  bool valid(std::span<const AtomPool::Id> negs, AtomPool::Id pos) const {
    for (std::uint64_t r = 0; r < count_; ++r) {
      const std::uint64_t* t = row(r);
      bool premises = true;
      for (AtomPool::Id n : negs)
        if (!test(t, n)) {
          premises = false;
          break;
        }
      if (premises && (pos == AtomPool::none || !test(t, pos))) return false;
    }
    return true;
  }

 private:
  std::size_t words_;
  std::uint64_t count_;
  std::vector<std::uint64_t> bits_;
};

/// Calls visit(negs, pos) for each canonical clause within the bounds that
/// holds in every member of K. Returns the number of clauses examined.
template <class Visit>
std::uint64_t for_each_valid_clause(const AtomPool& pool, const StructureCatalog& k, std::size_t max_negatives,
                                    HornKind kind, Visit&& visit, const Limits& limits = Limits{}) {
  if (!k.signature().extends(pool.signature()) || !pool.signature().extends(k.signature()))
    throw signature_error("catalog and formula signatures differ");
  std::vector<TruthTable> tables;
  for (const auto& m : k.members()) tables.emplace_back(pool, m, limits);
  return for_each_canonical_clause(
      pool, max_negatives, kind,
      [&](std::span<const AtomPool::Id> negs, AtomPool::Id pos) {
        for (const auto& t : tables)
          if (!t.valid(negs, pos)) return true;
        return visit(negs, pos);
      },
      limits);
}

/// Δ within the bounds: the enumerated clauses that K satisfies.
inline std::vector<HornFormula> valid_formulas(const StructureCatalog& k, const EnumerationBounds& b,
                                               HornKind kind = HornKind::any, const Limits& limits = Limits{}) {
  AtomPool pool(k.sig_ptr(), b.max_vars, b.max_term_depth, limits);
  std::vector<HornFormula> out;
  for_each_valid_clause(
      pool, k, b.max_negatives, kind,
      [&](std::span<const AtomPool::Id> negs, AtomPool::Id pos) {
        out.push_back(pool.formula(negs, pos));
        return true;
      },
      limits);
  return out;
}

}  // namespace fmw

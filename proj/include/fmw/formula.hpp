#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/signature.hpp"

namespace fmw {

/// A term: a variable (by id) or a function symbol applied to arity-many
/// subterms. Variable ids are positions in the owning formula's variable list.
struct Term {
  enum class Kind : std::uint8_t { variable, application };

  Kind kind = Kind::variable;
  std::size_t index = 0;
  std::vector<Term> args;

  static Term variable(std::size_t id) { return Term{Kind::variable, id, {}}; }
  static Term apply(std::size_t symbol, std::vector<Term> args = {}) {
    return Term{Kind::application, symbol, std::move(args)};
  }

  bool is_variable() const { return kind == Kind::variable; }

  std::size_t depth() const {
    if (is_variable() || args.empty()) return 0;
    std::size_t d = 0;
    for (const auto& a : args) d = std::max(d, a.depth());
    return d + 1;
  }

  friend bool operator==(const Term& a, const Term& b) {
    return a.kind == b.kind && a.index == b.index && a.args == b.args;
  }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.index <=> b.index; c != 0) return c;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(),
                                                  b.args.end());
  }
};

/// Relation application r(t1..tk) or equation t1 = t2.
struct Atom {
  enum class Kind : std::uint8_t { relation, equation };

  Kind kind = Kind::relation;
  std::size_t symbol = 0;  // unused for equations
  std::vector<Term> args;

  static Atom relation(std::size_t symbol, std::vector<Term> args) {
    return Atom{Kind::relation, symbol, std::move(args)};
  }
  static Atom equation(Term lhs, Term rhs) {
    std::vector<Term> a;
    a.push_back(std::move(lhs));
    a.push_back(std::move(rhs));
    return Atom{Kind::equation, 0, std::move(a)};
  }

  bool is_equation() const { return kind == Kind::equation; }

  /// Equations with sides in ascending term order; relations unchanged.
  Atom oriented() const {
    Atom a = *this;
    if (a.is_equation() && a.args[1] < a.args[0]) std::swap(a.args[0], a.args[1]);
    return a;
  }

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.kind == b.kind && a.symbol == b.symbol && a.args == b.args;
  }
  friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.symbol <=> b.symbol; c != 0) return c;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(),
                                                  b.args.end());
  }
};

template <class F>
void for_each_variable(const Term& t, F&& f) {
  if (t.is_variable()) {
    f(t.index);
    return;
  }
  for (const auto& a : t.args) for_each_variable(a, f);
}

template <class F>
void for_each_variable(const Atom& a, F&& f) {
  for (const auto& t : a.args) for_each_variable(t, f);
}

inline Term rename_variables(const Term& t, const std::vector<std::size_t>& to) {
  if (t.is_variable()) return Term::variable(to.at(t.index));
  Term out = Term::apply(t.index);
  out.args.reserve(t.args.size());
  for (const auto& a : t.args) out.args.push_back(rename_variables(a, to));
  return out;
}

inline Atom rename_variables(const Atom& a, const std::vector<std::size_t>& to) {
  Atom out{a.kind, a.symbol, {}};
  out.args.reserve(a.args.size());
  for (const auto& t : a.args) out.args.push_back(rename_variables(t, to));
  return out;
}

/// Conventional variable names: x, y, z, w, u, v, then x6, x7, ...
inline std::string variable_name(std::size_t i) {
  static const char* names[] = {"x", "y", "z", "w", "u", "v"};
  if (i < 6) return names[i];
  return "x" + std::to_string(i);
}

inline void check_term(const Term& t, const Signature& sig, std::size_t var_count) {
  if (t.is_variable()) {
    if (t.index >= var_count) throw input_error("unbound variable id " + std::to_string(t.index));
    return;
  }
  if (t.index >= sig.size()) throw input_error("unknown symbol index " + std::to_string(t.index));
  const Symbol& s = sig[t.index];
  if (!s.is_function()) throw input_error("relation '" + s.name + "' used as a term");
  if (s.arity != t.args.size())
    throw input_error("arity mismatch for '" + s.name + "': expected " + std::to_string(s.arity) +
                      ", got " + std::to_string(t.args.size()));
  for (const auto& a : t.args) check_term(a, sig, var_count);
}

inline void check_atom(const Atom& a, const Signature& sig, std::size_t var_count) {
  if (a.is_equation()) {
    if (a.args.size() != 2) throw input_error("equation needs two sides");
  } else {
    if (a.symbol >= sig.size()) throw input_error("unknown symbol index " + std::to_string(a.symbol));
    const Symbol& s = sig[a.symbol];
    if (!s.is_relation()) throw input_error("function '" + s.name + "' used as a relation");
    if (s.arity != a.args.size())
      throw input_error("arity mismatch for '" + s.name + "': expected " + std::to_string(s.arity) +
                        ", got " + std::to_string(a.args.size()));
  }
  for (const auto& t : a.args) check_term(t, sig, var_count);
}

/// Basic Horn clause  ¬φ1 ∨ … ∨ ¬φk ∨ ψ, written  φ1 & … & φk |- ψ.
/// `positive` absent means the conclusion is `false`. The clause must have at
/// least one literal.
///
/// On construction variables are renumbered to first-occurrence order
/// (negatives left to right, then the positive atom) and names of variables
/// that do not occur are dropped, so variables() is exactly the free-variable
/// list x1..xn.
class HornFormula {
 public:
  HornFormula(SigPtr sig, std::vector<Atom> negatives, std::optional<Atom> positive,
              std::vector<std::string> variable_names)
      : sig_(std::move(sig)), negatives_(std::move(negatives)), positive_(std::move(positive)) {
    if (!sig_) throw input_error("formula without signature");
    if (negatives_.empty() && !positive_) throw input_error("empty clause is not a basic Horn formula");
    for (const auto& a : negatives_) check_atom(a, *sig_, variable_names.size());
    if (positive_) check_atom(*positive_, *sig_, variable_names.size());

    constexpr std::size_t unseen = static_cast<std::size_t>(-1);
    std::vector<std::size_t> to(variable_names.size(), unseen);
    std::size_t next = 0;
    auto visit = [&](std::size_t v) {
      if (to[v] == unseen) to[v] = next++;
    };
    for (const auto& a : negatives_) for_each_variable(a, visit);
    if (positive_) for_each_variable(*positive_, visit);
    variables_.resize(next);
    for (std::size_t v = 0; v < to.size(); ++v)
      if (to[v] != unseen) variables_[to[v]] = variable_names[v];
    for (auto& a : negatives_) a = rename_variables(a, to);
    if (positive_) positive_ = rename_variables(*positive_, to);
  }

  const Signature& signature() const { return *sig_; }
  const SigPtr& sig_ptr() const { return sig_; }
  const std::vector<Atom>& negatives() const { return negatives_; }
  const std::optional<Atom>& positive() const { return positive_; }
  const std::vector<std::string>& variables() const { return variables_; }
  std::size_t arity() const { return variables_.size(); }

  bool is_strict() const { return positive_.has_value(); }

  /// Same clause, same variable numbering; names are not compared.
  friend bool operator==(const HornFormula& a, const HornFormula& b) {
    return same_signature(a.sig_, b.sig_) && a.negatives_ == b.negatives_ &&
           a.positive_ == b.positive_;
  }

 private:
  SigPtr sig_;
  std::vector<Atom> negatives_;
  std::optional<Atom> positive_;
  std::vector<std::string> variables_;
};

struct Classification {
  bool basic_horn = true;
  bool strict = false;
  bool identity = false;
  bool quasi_identity = false;
};

/// Identities are atoms (strict, no negatives); quasi-identities are exactly
/// the strict clauses.
inline Classification classify(const HornFormula& phi) {
  Classification c;
  c.strict = phi.is_strict();
  c.quasi_identity = c.strict;
  c.identity = c.strict && phi.negatives().empty();
  return c;
}

enum class HornKind { any, identity, quasi_identity, non_strict };

inline bool has_kind(const HornFormula& phi, HornKind k) {
  switch (k) {
    case HornKind::any: return true;
    case HornKind::identity: return classify(phi).identity;
    case HornKind::quasi_identity: return classify(phi).quasi_identity;
    case HornKind::non_strict: return !phi.is_strict();
  }
  return false;
}

inline std::string kind_name(const HornFormula& phi) {
  auto c = classify(phi);
  if (c.identity) return "identity";
  if (c.quasi_identity) return "quasi-identity";
  return "horn";
}

// ---------------------------------------------------------------------------
// Printing. Output is valid workbench DSL.

inline std::string to_string(const Term& t, const Signature& sig,
                             const std::vector<std::string>& vars) {
  if (t.is_variable()) return t.index < vars.size() ? vars[t.index] : "?" + std::to_string(t.index);
  std::string out = sig[t.index].name;
  if (t.args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) out += ',';
    out += to_string(t.args[i], sig, vars);
  }
  return out + ')';
}

inline std::string to_string(const Atom& a, const Signature& sig,
                             const std::vector<std::string>& vars = {}) {
  if (a.is_equation()) return to_string(a.args[0], sig, vars) + "=" + to_string(a.args[1], sig, vars);
  std::string out = sig[a.symbol].name + '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ',';
    out += to_string(a.args[i], sig, vars);
  }
  return out + ')';
}

inline std::string to_string(const HornFormula& phi) {
  std::string out;
  for (std::size_t i = 0; i < phi.negatives().size(); ++i) {
    if (i) out += " & ";
    out += to_string(phi.negatives()[i], phi.signature(), phi.variables());
  }
  out += out.empty() ? "|- " : " |- ";
  out += phi.positive() ? to_string(*phi.positive(), phi.signature(), phi.variables()) : "false";
  return out;
}

/// ¬ξ for a diagram sentence, e.g. ¬(ȧ0=ȧ1) or ¬r(ȧ0,ȧ1).
inline std::string negated_to_string(const Atom& a, const Signature& sig) {
  if (a.is_equation()) return "\xC2\xAC(" + to_string(a, sig) + ")";
  return "\xC2\xAC" + to_string(a, sig);
}

}  // namespace fmw

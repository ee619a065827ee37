#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fmw/signature.hpp"
#include "fmw/structure.hpp"

namespace fmw {

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// Uniformly random tables; each relation tuple holds with probability p.
inline FiniteStructure random_structure(SigPtr sig, std::size_t n, Rng& rng, std::string name = {}, double p = 0.5) {
  FiniteStructure out(sig, n, std::move(name));
  for (std::size_t s = 0; s < sig->size(); ++s) {
    const Symbol& sym = (*sig)[s];
    std::vector<Element> table(checked_pow(n, sym.arity));
    for (auto& v : table) v = sym.is_function() ? static_cast<Element>(uniform(rng, 0, n - 1)) : coin(rng, p);
    out.set_table(s, std::move(table));
  }
  return out;
}

inline std::vector<Element> random_permutation(std::size_t n, Rng& rng) {
  std::vector<Element> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[uniform(rng, 0, i - 1)]);
  return p;
}

/// Copy of `a` with element e renamed to pi[e].
inline FiniteStructure relabel(const FiniteStructure& a, const std::vector<Element>& pi) {
  FiniteStructure out(a.sig_ptr(), a.size(), a.name());
  const Signature& sig = a.signature();
  Tuple mapped;
  for (std::size_t s = 0; s < sig.size(); ++s) {
    for_each_tuple(a.size(), sig[s].arity, [&](std::span<const Element> args) {
      mapped.resize(args.size());
      for (std::size_t j = 0; j < args.size(); ++j) mapped[j] = pi[args[j]];
      if (sig[s].is_function())
        out.set_value(s, mapped, pi[a.apply(s, args)]);
      else
        out.set_holds(s, mapped, a.holds(s, args));
    });
  }
  return out;
}

/// Signature with one binary relation r and one binary function m.
inline SigPtr binary_signature() {
  Signature s("RM");
  s.add_relation("r", 2);
  s.add_function("m", 2);
  return make_sig(std::move(s));
}

/// Signature with one binary relation r and one unary function f.
inline SigPtr unary_signature() {
  Signature s("RF");
  s.add_relation("r", 2);
  s.add_function("f", 1);
  return make_sig(std::move(s));
}

}  // namespace fmw

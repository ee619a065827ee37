#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fmw/constructions.hpp"
#include "fmw/diagram_method.hpp"
#include "fmw/filter.hpp"
#include "fmw/los.hpp"
#include "fmw/morphism.hpp"
#include "fmw/random.hpp"
#include "fmw/witness.hpp"

namespace fmw::verify {

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  std::size_t cases = 0;
  std::size_t passed = 0;
  std::optional<std::string> first_failure;
  /// Named counters, printed in insertion order.
  std::vector<std::pair<std::string, std::uint64_t>> stats;

  bool ok() const { return passed == cases; }

  void count(const std::string& key, std::uint64_t by = 1) {
    for (auto& [k, v] : stats)
      if (k == key) {
        v += by;
        return;
      }
    stats.emplace_back(key, by);
  }

  std::string text() const {
    std::ostringstream os;
    os << "suite " << suite << " seed " << seed << ": " << passed << "/" << cases << " passed\n";
    for (const auto& [k, v] : stats) os << "  " << k << ": " << v << "\n";
    if (first_failure) os << "first counterexample: " << *first_failure << "\n";
    return os.str();
  }
};

/// Random factor family: 1..max_index factors of 1..max_size elements.
inline std::vector<FiniteStructure> random_family(const SigPtr& sig, Rng& rng, std::size_t max_index = 4,
                                                  std::size_t max_size = 3) {
  std::vector<FiniteStructure> out;
  const std::size_t n = uniform(rng, 1, max_index);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(random_structure(sig, uniform(rng, 1, max_size), rng, "A" + std::to_string(i)));
  return out;
}

namespace detail {

template <class Case>
SuiteResult run(const std::string& name, std::uint64_t seed, std::size_t cases, Case&& one) {
  SuiteResult r{name, seed, cases, 0, std::nullopt, {}};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    std::optional<std::string> failure;
    try {
      failure = one(rng, r);
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    if (!failure) {
      ++r.passed;
    } else if (!r.first_failure) {
      r.first_failure = "case " + std::to_string(c) + ": " + *failure;
    }
  }
  return r;
}

}  // namespace detail

/// Both clauses of the Łoś-type lemma on random families over every proper
/// filter: `horn` selects clause (2) with up to two negatives, otherwise
/// clause (1).
inline SuiteResult los_suite(std::uint64_t seed, std::size_t cases, bool horn, const Limits& limits = Limits{}) {
  const SigPtr sig = binary_signature();
  const EnumerationBounds b{3, 1, 2};
  LosOptions opt;
  opt.check_atomic = !horn;
  opt.check_horn = horn;
  return detail::run(horn ? "horn" : "los", seed, cases, [&](Rng& rng, SuiteResult& r) -> std::optional<std::string> {
    auto family = random_family(sig, rng);
    r.count("factors", family.size());
    for (const auto& f : all_proper_filters(family.size(), limits)) {
      auto rp = reduced_product(family, f, limits);
      auto rep = los_audit(rp, b, limits, opt);
      r.count("filters");
      r.count("assignments", rep.assignments);
      if (horn) r.count("patterns", rep.patterns);
      if (!rep.ok())
        return "filter least " + format_index_set(f.least()) + ": " +
               (rep.violations.empty() ? std::string("violation") : rep.violations.front().to_string());
    }
    return std::nullopt;
  });
}

/// Structure over Σ(A) satisfying diag(A): A copied onto an injective image
/// g(A) inside 0..size-1, everything else random, ȧ ↦ g(a).
struct PlantedDiagram {
  FiniteStructure b;
  std::vector<Element> g;
};

inline PlantedDiagram plant_diagram(const FiniteStructure& a, std::size_t size, Rng& rng, const SigPtr& expanded) {
  FiniteStructure base = random_structure(a.sig_ptr(), size, rng, "B");
  auto perm = random_permutation(size, rng);
  std::vector<Element> g(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(a.size()));
  const Signature& sig = a.signature();
  Tuple mapped;
  for (std::size_t s = 0; s < sig.size(); ++s)
    for_each_tuple(a.size(), sig[s].arity, [&](std::span<const Element> args) {
      mapped.resize(args.size());
      for (std::size_t j = 0; j < args.size(); ++j) mapped[j] = g[args[j]];
      if (sig[s].is_function())
        base.set_value(s, mapped, g[a.apply(s, args)]);
      else
        base.set_holds(s, mapped, a.holds(s, args));
    });
  return {expand_structure(base, expanded, g), g};
}

/// Structure over Σ(A) whose constants generate a cover of A: elements
/// (a, i) project to a, functions commute with the projection, relations
/// hold only above relations of A; extra unreachable elements are random.
/// Every closed-term fact of the cover projects to A, so the full negative
/// diagram holds. `proj` gives the A-value of each covering element.
struct PlantedCover {
  FiniteStructure b;
  std::vector<std::optional<Element>> proj;
};

inline PlantedCover plant_cover(const FiniteStructure& a, std::size_t copies, std::size_t junk, Rng& rng,
                                const SigPtr& expanded) {
  const std::size_t cover = a.size() * copies;
  const std::size_t size = cover + junk;
  FiniteStructure c = random_structure(a.sig_ptr(), size, rng, "B");
  const Signature& sig = a.signature();
  Tuple proj_args;
  for (std::size_t s = 0; s < sig.size(); ++s)
    for_each_tuple(cover, sig[s].arity, [&](std::span<const Element> args) {
      proj_args.resize(args.size());
      for (std::size_t j = 0; j < args.size(); ++j) proj_args[j] = static_cast<Element>(args[j] / copies);
      if (sig[s].is_function()) {
        const Element v = a.apply(s, proj_args);
        c.set_value(s, args, static_cast<Element>(v * copies + uniform(rng, 0, copies - 1)));
      } else {
        c.set_holds(s, args, a.holds(s, proj_args) && coin(rng, 0.7));
      }
    });
  auto pi = random_permutation(size, rng);
  FiniteStructure shuffled = relabel(c, pi);
  std::vector<std::optional<Element>> proj(size);
  for (std::size_t e = 0; e < cover; ++e) proj[pi[e]] = static_cast<Element>(e / copies);
  std::vector<Element> consts(a.size());
  for (std::size_t e = 0; e < a.size(); ++e) consts[e] = pi[e * copies + uniform(rng, 0, copies - 1)];
  return {expand_structure(shuffled, expanded, consts), std::move(proj)};
}

/// Embedding from a planted diagram, the exact sentence reported for a
/// single-sentence mutation, quotients of planted covers, and conflict
/// detection on structures that break the negative diagram.
inline SuiteResult diagram_suite(std::uint64_t seed, std::size_t cases, const Limits& limits = Limits{}) {
  const SigPtr sig = binary_signature();
  const std::size_t r_sym = 0, m_sym = 1;
  return detail::run("diagram", seed, cases, [&](Rng& rng, SuiteResult& r) -> std::optional<std::string> {
    const FiniteStructure a = random_structure(sig, uniform(rng, 1, 3), rng, "A");
    const SigPtr ex = make_sig(expand_signature(*sig, a.size()));

    // embedding
    const std::size_t size = a.size() + uniform(rng, 0, 2);
    PlantedDiagram p = plant_diagram(a, size, rng, ex);
    Morphism h = embed_from_diagram(a, p.b);
    if (h.map != p.g) return std::string("embedding is not a -> constant");
    r.count("embeddings verified");

    // one-sentence mutation: flip a relation fact, or redirect a function
    // fact to an element outside the image
    FiniteStructure mutated = p.b;
    const Element x = static_cast<Element>(uniform(rng, 0, a.size() - 1));
    const Element y = static_cast<Element>(uniform(rng, 0, a.size() - 1));
    const Tuple at{x, y};
    const Tuple gat{p.g[x], p.g[y]};
    Atom expected;
    if (size > a.size() && coin(rng)) {
      std::vector<Element> outside;
      for (Element e = 0; e < size; ++e)
        if (std::find(p.g.begin(), p.g.end(), e) == p.g.end()) outside.push_back(e);
      mutated.set_value(m_sym, gat, outside[uniform(rng, 0, outside.size() - 1)]);
      expected = Atom::equation(Term::apply(m_sym, {constant_term(*ex, x), constant_term(*ex, y)}),
                                constant_term(*ex, a.apply(m_sym, at)));
      r.count("function mutations");
    } else {
      mutated.set_holds(r_sym, gat, !p.b.holds(r_sym, gat));
      expected = Atom::relation(r_sym, {constant_term(*ex, x), constant_term(*ex, y)});
      r.count("relation mutations");
    }
    std::size_t failing = 0;
    for_each_flat_atom(a, *ex, [&](const Atom& s, bool truth) { failing += eval_sentence(mutated, s) != truth; });
    if (failing != 1) return "mutation breaks " + std::to_string(failing) + " sentences";
    try {
      embed_from_diagram(a, mutated);
      return std::string("mutated structure accepted");
    } catch (const diagram_violation& v) {
      if (!(v.sentence() == expected)) return "reported " + v.text() + ", expected " + to_string(expected, *ex);
    }
    r.count("mutations reported exactly");

    // quotient of a planted cover
    PlantedCover cov = plant_cover(a, uniform(rng, 1, 3), uniform(rng, 0, 2), rng, ex);
    auto q = quotient_from_negative_diagram(a, cov.b, limits);
    for (std::size_t i = 0; i < q.sub.elements.size(); ++i)
      if (cov.proj[q.sub.elements[i]] != q.surjection.map[i]) return std::string("surjection disagrees with the cover");
    if (find_violation(q.surjection.map, q.sub.structure, a, MorphismKind::homomorphism))
      return std::string("surjection is not a homomorphism");
    r.count("quotients verified");

    // conflict: redirect one flat function fact to a wrong constant
    if (a.size() >= 2) {
      FiniteStructure broken = cov.b;
      const Element want = a.apply(m_sym, at);
      const Element wrong = static_cast<Element>((want + uniform(rng, 1, a.size() - 1)) % a.size());
      Tuple cat{broken.apply(ex->element_constant(x), {}), broken.apply(ex->element_constant(y), {})};
      broken.set_value(m_sym, cat, broken.apply(ex->element_constant(wrong), {}));
      try {
        quotient_from_negative_diagram(a, broken, limits);
        return std::string("conflict not detected");
      } catch (const quotient_conflict& qc) {
        const FiniteStructure self = self_expansion(a, ex);
        if (!eval_sentence(broken, qc.sentence()) || eval_sentence(self, qc.sentence()))
          return "conflict witness " + qc.text() + " is not true in B and false in A";
      }
      r.count("conflicts detected");
    }
    return std::nullopt;
  });
}

/// A verified substructure of a reduced product of members, when small.
inline std::optional<FiniteStructure> sample_member_of_sp(const StructureCatalog& k, Rng& rng, const Limits& limits) {
  std::vector<FiniteStructure> factors;
  const std::size_t n = uniform(rng, 1, 3);
  for (std::size_t i = 0; i < n; ++i) factors.push_back(k.members()[uniform(rng, 0, k.size() - 1)]);
  auto filters = all_proper_filters(n, limits);
  auto rp = reduced_product(factors, filters[uniform(rng, 0, filters.size() - 1)], limits);
  std::vector<Element> seeds{static_cast<Element>(uniform(rng, 0, rp.carrier.size() - 1))};
  if (coin(rng)) seeds.push_back(static_cast<Element>(uniform(rng, 0, rp.carrier.size() - 1)));
  auto g = generated_substructure(rp.carrier, seeds, limits);
  if (g.structure.size() > 4) return std::nullopt;
  g.structure.set_name("A");
  return std::move(g.structure);
}

/// A homomorphic image of a generated substructure of a product of members.
inline std::optional<FiniteStructure> sample_member_of_hsp(const StructureCatalog& k, Rng& rng, const Limits& limits) {
  std::vector<FiniteStructure> factors;
  const std::size_t n = uniform(rng, 1, 2);
  for (std::size_t i = 0; i < n; ++i) factors.push_back(k.members()[uniform(rng, 0, k.size() - 1)]);
  auto p = direct_product(k.sig_ptr(), factors, limits);
  std::vector<Element> seeds{static_cast<Element>(uniform(rng, 0, p.carrier.size() - 1))};
  if (coin(rng)) seeds.push_back(static_cast<Element>(uniform(rng, 0, p.carrier.size() - 1)));
  auto g = generated_substructure(p.carrier, seeds, limits);
  FiniteStructure image = g.structure;
  if (coin(rng)) {
    const FiniteStructure& m = k.members()[uniform(rng, 0, k.size() - 1)];
    if (auto h = find_morphism(g.structure, m, MorphismKind::homomorphism, limits)) image = image_structure(*h);
  }
  if (image.size() > 4) return std::nullopt;
  image.set_name("A");
  return image;
}

inline SigPtr suite_signature(Rng& rng) {
  if (coin(rng)) return unary_signature();
  Signature s("G");
  s.add_relation("r", 2);
  return make_sig(std::move(s));
}

inline StructureCatalog random_catalog(const SigPtr& sig, Rng& rng) {
  StructureCatalog k(sig);
  const std::size_t n = uniform(rng, 1, 3);
  for (std::size_t i = 0; i < n; ++i) k.add(random_structure(sig, uniform(rng, 1, 3), rng, "M" + std::to_string(i)));
  return k;
}

/// Mal'cev engine on random (A, K); every fourth A is drawn from SP_R(K) and
/// must embed. Every outcome is re-audited from scratch.
inline SuiteResult malcev_suite(std::uint64_t seed, std::size_t cases, const Limits& limits = Limits{}) {
  return detail::run("malcev", seed, cases, [&](Rng& rng, SuiteResult& r) -> std::optional<std::string> {
    const SigPtr sig = suite_signature(rng);
    const StructureCatalog k = random_catalog(sig, rng);
    std::optional<FiniteStructure> a;
    const bool planted = uniform(rng, 0, 3) == 0;
    if (planted) a = sample_member_of_sp(k, rng, limits);
    const bool must_embed = a.has_value();
    if (!a) a = random_structure(sig, uniform(rng, 1, 3), rng, "A");
    auto res = malcev_witness(*a, k, {}, limits);
    if (res.embedded() == res.refutation.has_value()) return std::string("not exactly one outcome");
    if (auto bad = audit_malcev(*a, k, res, {}, limits)) return *bad;
    if (must_embed && !res.embedded()) return std::string("member of SP_R(K) refuted");
    r.count(res.embedded() ? "embedded" : "refuted");
    if (must_embed) r.count("planted members embedded");
    if (res.refutation) r.count(std::string("refuted by ") + res.refutation->kind());
    return std::nullopt;
  });
}

/// Birkhoff engine on random (A, K); every fourth A is drawn from HSP(K)
/// and must be presented as a quotient.
inline SuiteResult birkhoff_suite(std::uint64_t seed, std::size_t cases, const Limits& limits = Limits{}) {
  return detail::run("birkhoff", seed, cases, [&](Rng& rng, SuiteResult& r) -> std::optional<std::string> {
    const SigPtr sig = suite_signature(rng);
    const StructureCatalog k = random_catalog(sig, rng);
    std::optional<FiniteStructure> a;
    const bool planted = uniform(rng, 0, 3) == 0;
    if (planted) a = sample_member_of_hsp(k, rng, limits);
    const bool must_embed = a.has_value();
    if (!a) a = random_structure(sig, uniform(rng, 1, 3), rng, "A");
    auto res = birkhoff_witness(*a, k, limits);
    if (res.embedded() == res.refutation.has_value()) return std::string("not exactly one outcome");
    if (auto bad = audit_birkhoff(*a, k, res, limits)) return *bad;
    if (must_embed && !res.embedded()) return std::string("member of HSP(K) refuted");
    if (res.refutation && !classify(res.refutation->formula).identity) return std::string("refutation is not an identity");
    r.count(res.embedded() ? "quotients" : "refuted");
    if (must_embed) r.count("planted members presented");
    if (res.construction) r.count("refinement factors", res.construction->refinements.size());
    return std::nullopt;
  });
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"los", "horn", "diagram", "malcev", "birkhoff"};
  return names;
}

inline SuiteResult run_suite(const std::string& suite, std::uint64_t seed, std::size_t cases,
                             const Limits& limits = Limits{}) {
  if (suite == "los") return los_suite(seed, cases, false, limits);
  if (suite == "horn") return los_suite(seed, cases, true, limits);
  if (suite == "diagram") return diagram_suite(seed, cases, limits);
  if (suite == "malcev") return malcev_suite(seed, cases, limits);
  if (suite == "birkhoff") return birkhoff_suite(seed, cases, limits);
  throw input_error("unknown suite '" + suite + "' (los, horn, diagram, malcev, birkhoff)");
}

}  // namespace fmw::verify

#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace fmw;

namespace {

const FiniteStructure& S(const char* n) { return oracle::ws().structure(n); }
StructureCatalog K(std::vector<std::string> names) { return oracle::ws().catalog(names); }

std::vector<std::string> strings(const std::vector<HornFormula>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(to_string(f));
  return out;
}

bool contains(const std::vector<HornFormula>& fs, const std::string& text, const SigPtr& sig) {
  const HornFormula want = canonical_form(parse_formula(text, sig));
  return std::find(fs.begin(), fs.end(), want) != fs.end();
}

// All terms over V variables up to depth D, built without the atom pool.
std::vector<Term> terms(const Signature& sig, std::size_t v, std::size_t d) {
  std::vector<Term> out;
  for (std::size_t i = 0; i < v; ++i) out.push_back(Term::variable(i));
  for (std::size_t s = 0; s < sig.size(); ++s)
    if (sig[s].is_constant()) out.push_back(Term::apply(s));
  for (std::size_t depth = 1; depth <= d; ++depth) {
    const std::vector<Term> prev = out;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      if (!sig[s].is_function() || sig[s].arity == 0) continue;
      oracle::tuples(prev.size(), sig[s].arity, [&](const std::vector<Element>& idx) {
        std::vector<Term> args;
        for (Element i : idx) args.push_back(prev[i]);
        Term t = Term::apply(s, std::move(args));
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
      });
    }
  }
  return out;
}

std::vector<Atom> atoms(const Signature& sig, std::size_t v, std::size_t d) {
  const auto ts = terms(sig, v, d);
  std::set<Atom> out;
  for (std::size_t r = 0; r < sig.size(); ++r)
    if (sig[r].is_relation())
      oracle::tuples(ts.size(), sig[r].arity, [&](const std::vector<Element>& idx) {
        std::vector<Term> args;
        for (Element i : idx) args.push_back(ts[i]);
        out.insert(Atom::relation(r, std::move(args)));
      });
  for (const auto& a : ts)
    for (const auto& b : ts) out.insert(Atom::equation(a, b).oriented());
  return {out.begin(), out.end()};
}

// Canonical clause classes by brute force: least form over all renamings.
std::vector<HornFormula> reference_enumeration(const SigPtr& sig, EnumerationBounds b, HornKind kind) {
  const auto pool = atoms(*sig, b.max_vars, b.max_term_depth);
  using Clause = std::pair<std::vector<Atom>, std::optional<Atom>>;
  std::set<Clause> seen;
  std::vector<std::size_t> pi(b.max_vars);
  auto canon = [&](const std::vector<Atom>& negs, const std::optional<Atom>& pos) {
    std::optional<Clause> best;
    std::iota(pi.begin(), pi.end(), 0);
    do {
      Clause c;
      for (const auto& a : negs) c.first.push_back(rename_variables(a, pi).oriented());
      std::sort(c.first.begin(), c.first.end());
      if (pos) c.second = rename_variables(*pos, pi).oriented();
      if (!best || c < *best) best = c;
    } while (std::next_permutation(pi.begin(), pi.end()));
    return *best;
  };
  std::vector<Atom> negs;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    for (int strict = 0; strict < 2; ++strict) {
      if (!strict && negs.empty()) continue;
      bool ok = kind == HornKind::any || (kind == HornKind::identity && strict && negs.empty()) ||
                (kind == HornKind::quasi_identity && strict) || (kind == HornKind::non_strict && !strict);
      if (!ok) continue;
      if (!strict) {
        seen.insert(canon(negs, std::nullopt));
      } else {
        for (const auto& p : pool) seen.insert(canon(negs, p));
      }
    }
    if (negs.size() == b.max_negatives) return;
    for (std::size_t i = from; i < pool.size(); ++i) {
      negs.push_back(pool[i]);
      rec(i + 1);
      negs.pop_back();
    }
  };
  rec(0);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < b.max_vars; ++i) names.push_back(variable_name(i));
  std::vector<HornFormula> out;
  for (const auto& [n, p] : seen) out.emplace_back(sig, n, p, names);
  return out;
}

void expect_same_sets(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

}  // namespace

TEST(Enumeration, GraphIdentities) {
  const auto fs = enumerate_horn(S("P_edge").sig_ptr(), {2, 0, 0}, HornKind::identity);
  EXPECT_EQ(strings(fs), (std::vector<std::string>{"|- r(x,x)", "|- r(x,y)", "|- x=x", "|- x=y"}));
}

TEST(Enumeration, MatchesBruteForceClasses) {
  struct Case {
    SigPtr sig;
    EnumerationBounds b;
    HornKind kind;
  };
  const std::vector<Case> cases{
      {S("P_edge").sig_ptr(), {2, 0, 0}, HornKind::identity},
      {S("P_edge").sig_ptr(), {3, 0, 2}, HornKind::any},
      {S("Z2").sig_ptr(), {2, 1, 1}, HornKind::any},
      {S("Z2").sig_ptr(), {2, 2, 0}, HornKind::identity},
      {S("Z3").sig_ptr(), {2, 2, 1}, HornKind::quasi_identity},
      {unary_signature(), {2, 1, 1}, HornKind::non_strict},
      {binary_signature(), {2, 1, 1}, HornKind::any},
  };
  for (const auto& c : cases) {
    const auto mine = enumerate_horn(c.sig, c.b, c.kind);
    const auto ref = reference_enumeration(c.sig, c.b, c.kind);
    EXPECT_EQ(mine.size(), ref.size()) << c.sig->name() << " " << c.b.max_vars << c.b.max_term_depth
                                       << c.b.max_negatives;
    expect_same_sets(strings(mine), strings(ref));
  }
}

TEST(Enumeration, EmittedClausesAreCanonical) {
  for (const auto& f : enumerate_horn(binary_signature(), {3, 1, 1}, HornKind::any)) {
    ASSERT_EQ(canonical_form(f), f) << to_string(f);
    ASSERT_EQ(to_string(canonical_form(f)), to_string(f));
  }
}

TEST(Enumeration, DeterministicOrder) {
  EXPECT_EQ(strings(enumerate_horn(binary_signature(), {2, 1, 1})),
            strings(enumerate_horn(binary_signature(), {2, 1, 1})));
}

TEST(Enumeration, MagIdentitiesIncludeCommutativity) {
  EXPECT_TRUE(contains(enumerate_horn(S("Z2").sig_ptr(), {2, 1, 0}, HornKind::identity), "|- m(x,y)=m(y,x)",
                       S("Z2").sig_ptr()));
}

TEST(Enumeration, NonStrictWithoutNegativesIsEmpty) {
  EXPECT_TRUE(enumerate_horn(S("P_edge").sig_ptr(), {3, 1, 0}, HornKind::non_strict).empty());
}

TEST(Enumeration, FormulaCap) {
  Limits l;
  l.max_formulas = 10;
  EXPECT_THROW(enumerate_horn(binary_signature(), {3, 1, 2}, HornKind::any, l), resource_error);
}

TEST(ValidFormulas, MatchClassSatisfaction) {
  Rng rng(4);
  const SigPtr sig = unary_signature();
  const auto all = enumerate_horn(sig, {2, 1, 1});
  for (int round = 0; round < 10; ++round) {
    StructureCatalog k(sig);
    const std::size_t n = uniform(rng, 1, 3);
    for (std::size_t i = 0; i < n; ++i) k.add(random_structure(sig, uniform(rng, 1, 3), rng, "M" + std::to_string(i)));
    const auto valid = valid_formulas(k, {2, 1, 1});
    std::vector<std::string> ref;
    for (const auto& f : all) {
      bool holds = true;
      for (const auto& m : k.members()) holds = holds && !oracle::counterexample(m, f);
      if (holds) ref.push_back(to_string(f));
    }
    EXPECT_EQ(strings(valid), ref);
  }
}

TEST(ValidFormulas, Z2Identities) {
  const auto fs = valid_formulas(K({"Z2"}), {2, 2, 0}, HornKind::identity);
  const SigPtr sig = S("Z2").sig_ptr();
  EXPECT_TRUE(contains(fs, "|- m(x,y)=m(y,x)", sig));
  EXPECT_TRUE(contains(fs, "|- m(m(x,y),y)=m(x,m(y,y))", sig));
  EXPECT_TRUE(contains(fs, "|- m(m(x,x),y)=y", sig));
  EXPECT_FALSE(contains(fs, "|- m(x,x)=x", sig));
  EXPECT_TRUE(contains(valid_formulas(K({"Z2"}), {3, 2, 0}, HornKind::identity), "|- m(m(x,y),z)=m(x,m(y,z))", sig));
}

TEST(ValidFormulas, PEdgeHasNonStrictIrreflexivity) {
  EXPECT_TRUE(contains(valid_formulas(K({"P_edge"}), {3, 1, 2}), "r(x,x) |- false", S("P_edge").sig_ptr()));
}

TEST(Strictness, UnitForcesStrictness) {
  for (auto names : std::vector<std::vector<std::string>>{{"Z2"}, {"P_edge"}, {"unit"}, {"S_sym", "Path3"}}) {
    const StrictnessReport r = strictness_audit(K(names), {3, 1, 2});
    EXPECT_TRUE(r.ok()) << names.front();
    EXPECT_GT(r.valid_with_unit, 0u);
  }
  const StrictnessReport p = strictness_audit(K({"P_edge"}), {3, 1, 2});
  EXPECT_TRUE(contains(p.non_strict_without_unit, "r(x,x) |- false", S("P_edge").sig_ptr()));
  EXPECT_TRUE(strictness_audit(K({"unit"}), {3, 1, 2}).non_strict_without_unit.empty());
}

TEST(Los, PEdgeSSymPrincipalAtOne) {
  const auto r = los_audit({S("P_edge"), S("S_sym")}, FilterOnFiniteSet::principal(2, 0b10), {3, 1, 2});
  EXPECT_TRUE(r.ok());
  EXPECT_GT(r.assignments, 0u);
}

TEST(Los, TrivialFilterHasNoViolations) {
  Rng rng(12);
  const SigPtr sig = binary_signature();
  for (int round = 0; round < 20; ++round) {
    const auto fam = verify::random_family(sig, rng, 3, 3);
    EXPECT_TRUE(los_audit(fam, FilterOnFiniteSet::trivial(fam.size()), {3, 1, 2}).ok());
  }
}

TEST(Los, CorruptedCarrierIsDetected) {
  Rng rng(13);
  const SigPtr sig = binary_signature();
  for (int round = 0; round < 20; ++round) {
    const auto fam = verify::random_family(sig, rng, 3, 3);
    auto rp = reduced_product(fam, FilterOnFiniteSet::trivial(fam.size()));
    const Element a = static_cast<Element>(uniform(rng, 0, rp.carrier.size() - 1));
    const Element b = static_cast<Element>(uniform(rng, 0, rp.carrier.size() - 1));
    if (coin(rng)) {
      rp.carrier.set_holds(0, Tuple{a, b}, !rp.carrier.holds(0, Tuple{a, b}));
    } else if (rp.carrier.size() > 1) {
      const Element v = rp.carrier.apply(1, Tuple{a, b});
      rp.carrier.set_value(1, Tuple{a, b}, static_cast<Element>((v + 1) % rp.carrier.size()));
    } else {
      continue;
    }
    const auto atomic = los_audit(rp, {3, 1, 2}, Limits{}, {true, false, 8});
    EXPECT_GT(atomic.atomic_violations, 0u);
    ASSERT_FALSE(atomic.violations.empty());
    EXPECT_EQ(atomic.violations.front().clause, 1);
    const auto horn = los_audit(rp, {3, 1, 2}, Limits{}, {false, true, 8});
    EXPECT_GT(horn.horn_violations, 0u);
  }
}

// Clause (2) checked clause by clause against the pattern-based audit.
TEST(Los, HornAuditMatchesDirectCheck) {
  Rng rng(14);
  const SigPtr sig = binary_signature();
  const EnumerationBounds b{2, 1, 1};
  const auto clauses = enumerate_horn(sig, b);
  int corrupted = 0;
  for (int round = 0; round < 40; ++round) {
    const auto fam = verify::random_family(sig, rng, 3, 2);
    const auto filters = all_proper_filters(fam.size());
    auto rp = reduced_product(fam, filters[uniform(rng, 0, filters.size() - 1)]);
    if (round % 2 && rp.carrier.size() > 1) {
      const Element a = static_cast<Element>(uniform(rng, 0, rp.carrier.size() - 1));
      rp.carrier.set_holds(0, Tuple{a, a}, !rp.carrier.holds(0, Tuple{a, a}));
      ++corrupted;
    }
    bool direct = false;
    for (const auto& phi : clauses) {
      oracle::tuples(rp.carrier.size(), phi.arity(), [&](const std::vector<Element>& asg) {
        if (direct) return;
        IndexSet m = 0;
        for (std::size_t i = 0; i < fam.size(); ++i) {
          std::vector<Element> local;
          for (Element e : asg) local.push_back(rp.class_reps[e][i]);
          if (oracle::clause(fam[i], phi, local)) m |= IndexSet{1} << i;
        }
        if (rp.filter.contains(m) && !oracle::clause(rp.carrier, phi, asg)) direct = true;
      });
      if (direct) break;
    }
    const auto fast = los_audit(rp, b, Limits{}, {false, true, 8});
    EXPECT_EQ(direct, fast.horn_violations > 0) << "round " << round;
  }
  EXPECT_GT(corrupted, 5);
}

TEST(Malcev, MemberEmbeds) {
  for (const char* n : {"Z2", "P_edge", "Path3"}) {
    const auto r = malcev_witness(S(n), K({n}));
    ASSERT_TRUE(r.embedded()) << n;
    EXPECT_FALSE(audit_malcev(S(n), K({n}), r).has_value());
  }
}

TEST(Malcev, AsymmetricEdge) {
  const auto r = malcev_witness(S("P_edge"), K({"S_sym"}));
  ASSERT_TRUE(r.refutation.has_value());
  EXPECT_EQ(to_string(r.refutation->formula), "r(x,y) |- r(y,x)");
  EXPECT_EQ(format_assignment(r.refutation->formula, r.refutation->falsifying), "x=0, y=1");
  EXPECT_EQ(r.refutation->kind(), "quasi-identity");
  EXPECT_FALSE(oracle::clause(S("P_edge"), r.refutation->formula, r.refutation->falsifying));
  EXPECT_FALSE(oracle::counterexample(S("S_sym"), r.refutation->formula).has_value());
  EXPECT_FALSE(audit_malcev(S("P_edge"), K({"S_sym"}), r).has_value());
}

TEST(Malcev, FaithfulModeAgrees) {
  for (auto [a, k] : std::vector<std::pair<const char*, const char*>>{{"P_edge", "S_sym"}, {"P_edge", "Path3"}, {"S_loop", "P_edge"}, {"P_edge", "S_loop"}}) {
    const auto plain = malcev_witness(S(a), K({k}));
    const auto faithful = malcev_witness(S(a), K({k}), {true});
    EXPECT_EQ(plain.embedded(), faithful.embedded()) << a;
    EXPECT_FALSE(audit_malcev(S(a), K({k}), faithful, {true}).has_value()) << a;
  }
}

TEST(Malcev, FaithfulIndexCap) {
  EXPECT_THROW(malcev_witness(S("Z2"), K({"Z4"}), {true}), resource_error);
}

TEST(Malcev, EmbeddingReverifies) {
  const auto r = malcev_witness(S("Z2"), K({"Z4"}));
  ASSERT_TRUE(r.embedded());
  const auto& c = *r.construction;
  EXPECT_EQ(c.embedding.embedding.kind, MorphismKind::embedding);
  EXPECT_NO_THROW(check_morphism(c.embedding.embedding.map, S("Z2"), c.embedding.sub.structure,
                                 MorphismKind::embedding));
  ASSERT_TRUE(c.product.has_value());
  EXPECT_NO_THROW(check_morphism(c.product_embedding->map, S("Z2"), c.product->carrier, MorphismKind::embedding));
}

TEST(Birkhoff, LeftProjagainstZ2) {
  const auto r = birkhoff_witness(S("LeftProj"), K({"Z2"}));
  ASSERT_TRUE(r.refutation.has_value());
  EXPECT_EQ(to_string(r.refutation->formula), "|- m(x,y)=m(y,x)");
  EXPECT_EQ(r.refutation->kind(), "identity");
  EXPECT_FALSE(oracle::clause(S("LeftProj"), r.refutation->formula, r.refutation->falsifying));
  EXPECT_FALSE(audit_birkhoff(S("LeftProj"), K({"Z2"}), r).has_value());
}

TEST(Birkhoff, TwoElementsAgainstUnit) {
  for (const char* n : {"Z2", "LeftProj"}) {
    const auto r = birkhoff_witness(S(n), K({"unit"}));
    ASSERT_TRUE(r.refutation.has_value()) << n;
    EXPECT_EQ(to_string(r.refutation->formula), "|- x=y") << n;
  }
  // S_sym satisfies only trivial identities, so P_edge is presented
  const auto g = birkhoff_witness(S("P_edge"), K({"S_sym"}));
  EXPECT_TRUE(g.embedded());
  EXPECT_FALSE(audit_birkhoff(S("P_edge"), K({"S_sym"}), g).has_value());
}

TEST(Birkhoff, QuotientChainReverifies) {
  const auto r = birkhoff_witness(S("Z2"), K({"Z4"}));
  ASSERT_TRUE(r.embedded());
  const auto& c = *r.construction;
  EXPECT_TRUE(is_surjective(c.quotient.surjection));
  EXPECT_NO_THROW(check_morphism(c.quotient.surjection.map, c.quotient.sub.structure, S("Z2"),
                                 MorphismKind::homomorphism));
  ASSERT_TRUE(c.product.has_value());
  std::vector<Element> inclusion;
  for (const auto& t : c.quotient.sub.elements) {
    const auto it = std::find(c.product->tuples.begin(), c.product->tuples.end(), t);
    ASSERT_NE(it, c.product->tuples.end());
    inclusion.push_back(static_cast<Element>(it - c.product->tuples.begin()));
  }
  EXPECT_NO_THROW(check_morphism(inclusion, c.quotient.sub.structure, c.product->carrier, MorphismKind::embedding));
}

TEST(Birkhoff, HomomorphicImageOfAFactor) {
  const auto r = birkhoff_witness(S("S_loop"), K({"P_edge", "S_sym"}));
  EXPECT_FALSE(audit_birkhoff(S("S_loop"), K({"P_edge", "S_sym"}), r).has_value());
}

TEST(Engines, SignatureMismatch) {
  EXPECT_THROW(malcev_witness(S("Z2"), K({"P_edge"})), signature_error);
  EXPECT_THROW(birkhoff_witness(S("Z2"), K({"P_edge"})), signature_error);
}

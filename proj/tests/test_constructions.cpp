#include <gtest/gtest.h>

#include "support.hpp"

using namespace fmw;

namespace {

const FiniteStructure& S(const char* n) { return oracle::ws().structure(n); }

}  // namespace

TEST(Filters, GeneratedFromIntersectingSets) {
  const IndexSet gens[] = {0b011, 0b110};
  const FilterOnFiniteSet f = filter_from_generators(3, gens);
  EXPECT_EQ(f.members(), (std::vector<IndexSet>{0b010, 0b011, 0b110, 0b111}));
  EXPECT_EQ(f.least(), 0b010u);
}

TEST(Filters, NoGeneratorsGivesTrivialFilter) {
  const FilterOnFiniteSet f = filter_from_generators(3, std::span<const IndexSet>());
  EXPECT_EQ(f.members(), (std::vector<IndexSet>{0b111}));
  EXPECT_EQ(f, FilterOnFiniteSet::trivial(3));
}

TEST(Filters, FipViolation) {
  const IndexSet gens[] = {0b001, 0b010};
  try {
    filter_from_generators(3, gens);
    FAIL();
  } catch (const fip_violation& e) {
    EXPECT_EQ(std::string(e.what()), "FIP violation: {0}\xE2\x88\xA9{1}=\xE2\x88\x85");
  }
}

TEST(Filters, ParseIndexSets) {
  EXPECT_EQ(parse_index_sets("{0};{1,2}", 3), (std::vector<IndexSet>{0b001, 0b110}));
  EXPECT_EQ(parse_index_sets("", 3), std::vector<IndexSet>{});
  EXPECT_EQ(parse_index_sets("{}", 3), std::vector<IndexSet>{0});
  EXPECT_THROW(parse_index_sets("{3}", 3), input_error);
  EXPECT_THROW(parse_index_sets("{0", 3), input_error);
}

TEST(Filters, EnumerationMatchesBruteForce) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto mine = all_proper_filters(n);
    auto ref = oracle::all_filters(n);
    ASSERT_EQ(mine.size(), (std::size_t{1} << n) - 1) << n;
    ASSERT_EQ(mine.size(), ref.size()) << n;
    std::vector<std::vector<IndexSet>> got;
    for (const auto& f : mine) got.push_back(f.members());
    std::sort(got.begin(), got.end());
    std::sort(ref.begin(), ref.end());
    EXPECT_EQ(got, ref) << n;
  }
}

TEST(Filters, FromMembersChecksLaws) {
  EXPECT_THROW(FilterOnFiniteSet::from_members(2, {0b01}), input_error);
  EXPECT_THROW(FilterOnFiniteSet::from_members(2, {0b00, 0b01, 0b10, 0b11}), input_error);
  EXPECT_THROW(FilterOnFiniteSet::from_members(2, {0b01, 0b10, 0b11}), input_error);
  EXPECT_NO_THROW(FilterOnFiniteSet::from_members(2, {0b01, 0b11}));
}

TEST(Filters, IndexCap) {
  Limits l;
  l.max_index = 2;
  EXPECT_THROW(filter_from_generators(3, std::span<const IndexSet>(), l), resource_error);
}

TEST(Products, EmptyProductIsUnit) {
  const ProductStructure p = direct_product(S("P_edge").sig_ptr(), {});
  EXPECT_EQ(p.carrier, unit_structure(S("P_edge").sig_ptr(), "product"));
  EXPECT_TRUE(p.projections.empty());
}

TEST(Products, CardinalityAndProjections) {
  const ProductStructure p = direct_product(S("P_edge").sig_ptr(), {S("P_edge"), S("Path3")});
  EXPECT_EQ(p.carrier.size(), 6u);
  ASSERT_EQ(p.projections.size(), 2u);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_EQ(p.projections[0].map[t], p.tuples[t][0]);
    EXPECT_EQ(p.projections[1].map[t], p.tuples[t][1]);
  }
  // relations hold iff they hold in every coordinate
  oracle::tuples(6, 2, [&](const std::vector<Element>& e) {
    const bool want = S("P_edge").holds(0, Tuple{p.tuples[e[0]][0], p.tuples[e[1]][0]}) &&
                      S("Path3").holds(0, Tuple{p.tuples[e[0]][1], p.tuples[e[1]][1]});
    EXPECT_EQ(p.carrier.holds(0, e), want);
  });
}

TEST(Products, ProductCap) {
  Limits l;
  l.max_product = 15;
  EXPECT_THROW(direct_product(S("Z4").sig_ptr(), {S("Z4"), S("Z4")}, l), resource_error);
}

TEST(Products, GeneratedSubstructures) {
  const auto z2 = generated_substructure(S("Z2"), std::vector<Element>{0});
  EXPECT_EQ(z2.elements, (std::vector<Element>{0}));
  const auto z3 = generated_substructure(S("Z3"), std::vector<Element>{0});
  EXPECT_EQ(z3.elements, (std::vector<Element>{0, 1, 2}));
  const auto all = generated_substructure(S("Z4"), std::vector<Element>{0, 1, 2, 3});
  EXPECT_EQ(all.structure, S("Z4"));
  const auto even = generated_substructure(S("Z4"), std::vector<Element>{2});
  EXPECT_EQ(even.elements, (std::vector<Element>{0, 2}));
  EXPECT_FALSE(inclusion_violation(S("Z4"), even.structure, even.elements).has_value());
}

TEST(ReducedProducts, ExampleRelationAtIndexOne) {
  // factors [P_edge, S_loop], F generated by {1}: r holds iff it holds at index 1
  const IndexSet g[] = {0b10};
  const auto rp = reduced_product({S("P_edge"), S("S_loop")}, filter_from_generators(2, g));
  EXPECT_EQ(rp.carrier.size(), 1u);
  EXPECT_TRUE(rp.carrier.holds(0, Tuple{0, 0}));
  const IndexSet g0[] = {0b01};
  const auto rp0 = reduced_product({S("P_edge"), S("S_loop")}, filter_from_generators(2, g0));
  EXPECT_EQ(rp0.carrier, [] {
    FiniteStructure e = S("P_edge");
    e.set_name("reduced_product");
    return e;
  }());
}

TEST(ReducedProducts, ClassesMatchPairwiseAgreement) {
  Rng rng(3);
  const SigPtr sig = binary_signature();
  for (int round = 0; round < 30; ++round) {
    const auto fam = verify::random_family(sig, rng);
    for (const auto& f : all_proper_filters(fam.size())) {
      const auto rp = reduced_product(fam, f);
      const auto ref = oracle::classes(fam, f.members());
      ASSERT_EQ(rp.class_reps.size(), ref.size());
      // pairwise classes come out in tuple order, so each starts at its least member
      for (const auto& c : ref) {
        auto index = [&](const std::vector<Element>& t) {
          std::size_t idx = 0;
          for (std::size_t i = 0; i < fam.size(); ++i) idx = idx * fam[i].size() + t[i];
          return idx;
        };
        const std::size_t want = rp.quotient[index(c.front())];
        EXPECT_EQ(rp.class_reps[want], c.front());
        for (const auto& t : c) EXPECT_EQ(rp.quotient[index(t)], want);
      }
    }
  }
}

TEST(ReducedProducts, OperationsIndependentOfRepresentatives) {
  Rng rng(5);
  const SigPtr sig = binary_signature();
  for (int round = 0; round < 30; ++round) {
    const auto fam = verify::random_family(sig, rng, 3, 3);
    for (const auto& f : all_proper_filters(fam.size())) {
      const auto rp = reduced_product(fam, f);
      const ReducedProductView view = view_of(rp);
      const auto cls = oracle::classes(fam, f.members());
      // pick arbitrary members of two classes and compare with the carrier
      for (std::size_t a = 0; a < cls.size(); ++a)
        for (std::size_t b = 0; b < cls.size(); ++b) {
          const Tuple x = cls[a][uniform(rng, 0, cls[a].size() - 1)];
          const Tuple y = cls[b][uniform(rng, 0, cls[b].size() - 1)];
          const Tuple args[] = {x, y};
          const Tuple m = view.product().apply(1, args);
          const Tuple canon = view.canonical(m);
          const auto it = std::find(rp.class_reps.begin(), rp.class_reps.end(), canon);
          ASSERT_NE(it, rp.class_reps.end());
          const Element ca = static_cast<Element>(
              std::find(rp.class_reps.begin(), rp.class_reps.end(), view.canonical(x)) - rp.class_reps.begin());
          const Element cb = static_cast<Element>(
              std::find(rp.class_reps.begin(), rp.class_reps.end(), view.canonical(y)) - rp.class_reps.begin());
          EXPECT_EQ(rp.carrier.apply(1, Tuple{ca, cb}), static_cast<Element>(it - rp.class_reps.begin()));
          EXPECT_EQ(rp.carrier.holds(0, Tuple{ca, cb}), f.contains(view.product().holds_at(0, args)));
        }
    }
  }
}

TEST(ReducedProducts, Degenerations) {
  Rng rng(8);
  const SigPtr sig = binary_signature();
  for (int round = 0; round < 25; ++round) {
    const auto fam = verify::random_family(sig, rng, 3, 3);
    const std::size_t n = fam.size();
    EXPECT_TRUE(oracle::trivial_filter_matches_product(fam));
    for (std::size_t j = 0; j < n; ++j) EXPECT_TRUE(oracle::principal_filter_matches_factor(fam, j)) << j;
  }
}

TEST(Diagrams, OrderAndContent) {
  const Diagram d = diagram(S("P_edge"));
  std::vector<std::string> pos, neg;
  for (const auto& a : d.positive) pos.push_back(to_string(a, *d.expanded));
  for (const auto& a : d.negative) neg.push_back(negated_to_string(a, *d.expanded));
  const std::string c0 = "\xC8\xA7" "0", c1 = "\xC8\xA7" "1";
  EXPECT_EQ(pos, (std::vector<std::string>{"r(" + c0 + "," + c1 + ")"}));
  EXPECT_EQ(neg, (std::vector<std::string>{"\xC2\xAC(" + c0 + "=" + c1 + ")", "\xC2\xAC" "r(" + c0 + "," + c0 + ")",
                                           "\xC2\xAC" "r(" + c1 + "," + c0 + ")", "\xC2\xAC" "r(" + c1 + "," + c1 + ")"}));
}

TEST(Diagrams, FlatAtomCount) {
  for (const char* n : {"P_edge", "Z2", "Z4", "Path3", "Z3"}) {
    const Diagram d = diagram(S(n));
    EXPECT_EQ(d.positive.size() + d.negative.size(), count_flat_atoms(S(n).signature(), S(n).size())) << n;
  }
}

TEST(Diagrams, SelfExpansionSatisfiesDiagram) {
  for (const char* n : {"P_edge", "Z2", "Z4", "Path3", "Z3"}) {
    const Diagram d = diagram(S(n));
    const FiniteStructure self = self_expansion(S(n), d.expanded);
    for (const auto& a : d.positive) EXPECT_TRUE(eval_sentence(self, a));
    for (const auto& a : d.negative) EXPECT_FALSE(eval_sentence(self, a));
  }
}

TEST(Diagrams, Z4ExpansionSatisfiesNegativeDiagramOfZ2) {
  const Diagram d = diagram(S("Z2"));
  const FiniteStructure b = expand_structure(S("Z4"), d.expanded, std::vector<Element>{0, 1});
  ASSERT_EQ(d.negative.size(), 5u);
  for (const auto& a : d.negative) EXPECT_FALSE(eval_sentence(b, a)) << to_string(a, *d.expanded);
}

TEST(Diagrams, ExpansionErrors) {
  const SigPtr ex = make_sig(expand_signature(S("Z2").signature(), 2));
  EXPECT_THROW(expand_structure(S("Z4"), ex, std::vector<Element>{0}), input_error);
  EXPECT_THROW(expand_structure(S("Z4"), ex, std::vector<Element>{0, 4}), input_error);
}

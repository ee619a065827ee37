#include <gtest/gtest.h>

#include "support.hpp"

using namespace fmw;

namespace {

const FiniteStructure& S(const char* n) { return oracle::ws().structure(n); }

std::vector<Element> identity(std::size_t n) {
  std::vector<Element> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Element>(i);
  return v;
}

const std::string c0 = "\xC8\xA7" "0";
const std::string c1 = "\xC8\xA7" "1";

}  // namespace

TEST(Morphisms, IdentityIsIso) {
  for (const char* n : {"P_edge", "Z4", "Z3", "Path3"})
    EXPECT_NO_THROW(check_morphism(identity(S(n).size()), S(n), S(n), MorphismKind::isomorphism)) << n;
}

TEST(Morphisms, ModTwoIsHom) {
  const Morphism h = check_morphism({0, 1, 0, 1}, S("Z4"), S("Z2"), MorphismKind::homomorphism);
  EXPECT_TRUE(is_surjective(h));
  EXPECT_THROW(check_morphism({0, 1, 0, 1}, S("Z4"), S("Z2"), MorphismKind::embedding), morphism_error);
}

TEST(Morphisms, ConstantMapViolation) {
  try {
    check_morphism({0, 0}, S("P_edge"), S("P_edge"), MorphismKind::homomorphism);
    FAIL();
  } catch (const morphism_error& e) {
    EXPECT_EQ(e.violation().symbol, "r");
    EXPECT_EQ(e.violation().args, (Tuple{0, 1}));
  }
}

TEST(Morphisms, SearchExamples) {
  const auto zero = find_morphism(S("Z4"), S("Z4"), MorphismKind::homomorphism);
  ASSERT_TRUE(zero.has_value());
  EXPECT_EQ(zero->map, (std::vector<Element>{0, 0, 0, 0}));
  for (auto k : {MorphismKind::embedding, MorphismKind::isomorphism}) {
    const auto h = find_morphism(S("Z4"), S("Z4"), k);
    ASSERT_TRUE(h.has_value());
    EXPECT_EQ(h->map, identity(4));
  }
  const auto to_loop = find_morphism(S("P_edge"), S("S_loop"), MorphismKind::homomorphism);
  ASSERT_TRUE(to_loop.has_value());
  EXPECT_EQ(to_loop->map, (std::vector<Element>{0, 0}));
  EXPECT_FALSE(find_morphism(S("S_loop"), S("P_edge"), MorphismKind::homomorphism).has_value());
}

TEST(Morphisms, SearchIsCompleteAndLexOrdered) {
  Rng rng(21);
  const SigPtr sig = unary_signature();
  for (int round = 0; round < 60; ++round) {
    const FiniteStructure a = random_structure(sig, uniform(rng, 1, 3), rng, "A", 0.3);
    const FiniteStructure b = random_structure(sig, uniform(rng, 1, 4), rng, "B", 0.7);
    for (auto k : {MorphismKind::homomorphism, MorphismKind::embedding, MorphismKind::isomorphism}) {
      std::vector<std::vector<Element>> got;
      for_each_morphism(a, b, k, [&](const std::vector<Element>& h) {
        got.push_back(h);
        return true;
      });
      EXPECT_EQ(got, oracle::all_morphisms(a, b, k)) << to_string(k);
    }
  }
}

TEST(Morphisms, SearchCap) {
  Limits l;
  l.max_search = 3;
  Signature s("E");
  const SigPtr e = make_sig(s);
  const FiniteStructure a(e, 4, "A"), b(e, 4, "B");
  EXPECT_THROW(find_morphism(a, b, MorphismKind::isomorphism, l), resource_error);
}

TEST(Morphisms, ImageStructure) {
  const Morphism id = check_morphism(identity(4), S("Z4"), S("Z4"), MorphismKind::homomorphism);
  EXPECT_EQ(image_structure(id, "Z4"), S("Z4"));
  const Morphism mod2 = check_morphism({0, 1, 0, 1}, S("Z4"), S("Z2"), MorphismKind::homomorphism);
  EXPECT_EQ(image_structure(mod2, "Z2"), S("Z2"));
  const Morphism emb = check_morphism({0, 2}, S("Z2"), S("Z4"), MorphismKind::homomorphism);
  const FiniteStructure img = image_structure(emb);
  EXPECT_EQ(img.size(), 2u);
  const Morphism onto = corestriction(emb, img);
  EXPECT_TRUE(is_surjective(onto));
}

TEST(Morphisms, EmbeddingImageIsIsomorphicToSource) {
  const ProductStructure p = direct_product(S("Z2").sig_ptr(), {S("Z2"), S("Z2")});
  const Morphism diag = check_morphism({0, 3}, S("Z2"), p.carrier, MorphismKind::embedding);
  EXPECT_TRUE(oracle::isomorphic(image_structure(diag), S("Z2")));
}

TEST(DiagramMethod, SelfExpansionEmbedsByIdentity) {
  for (const char* n : {"P_edge", "Z4", "Z3", "Path3"}) {
    const Morphism h = embed_from_diagram(S(n), self_expansion(S(n)));
    EXPECT_EQ(h.map, identity(S(n).size())) << n;
  }
}

TEST(DiagramMethod, EmbedsOntoCopyBesideIsolatedPoint) {
  // P_edge plus an isolated point 0, with the copy at {1,2}
  FiniteStructure b(S("P_edge").sig_ptr(), 3, "B");
  b.set_holds(0, Tuple{1, 2}, true);
  const SigPtr ex = make_sig(expand_signature(S("P_edge").signature(), 2));
  const Morphism h = embed_from_diagram(S("P_edge"), expand_structure(b, ex, std::vector<Element>{1, 2}));
  EXPECT_EQ(h.map, (std::vector<Element>{1, 2}));
}

TEST(DiagramMethod, CollapsedConstantsCiteInequality) {
  const SigPtr ex = make_sig(expand_signature(S("P_edge").signature(), 2));
  try {
    embed_from_diagram(S("P_edge"), expand_structure(S("S_loop"), ex, std::vector<Element>{0, 0}));
    FAIL();
  } catch (const diagram_violation& v) {
    EXPECT_EQ(v.text(), "\xC2\xAC(" + c0 + "=" + c1 + ")");
    EXPECT_TRUE(v.negated());
  }
}

TEST(DiagramMethod, MissingRelationCitesPositiveSentence) {
  const SigPtr ex = make_sig(expand_signature(S("P_edge").signature(), 2));
  FiniteStructure b(S("P_edge").sig_ptr(), 2, "B");
  try {
    embed_from_diagram(S("P_edge"), expand_structure(b, ex, std::vector<Element>{0, 1}));
    FAIL();
  } catch (const diagram_violation& v) {
    EXPECT_EQ(v.text(), "r(" + c0 + "," + c1 + ")");
    EXPECT_FALSE(v.negated());
  }
}

TEST(DiagramMethod, EmbeddingIntoReducedProduct) {
  // Z2 x Z4 by the filter at {0} collapses onto the Z2 coordinate
  const IndexSet g[] = {0b01};
  const SigPtr ex = make_sig(expand_signature(S("Z2").signature(), 2));
  const auto rp = reduced_product({S("Z2"), S("Z4")}, filter_from_generators(2, g));
  const FiniteStructure b = expand_structure(rp.carrier, ex, std::vector<Element>{0, 1});
  const Morphism h = embed_from_diagram(S("Z2"), b);
  EXPECT_EQ(h.map, (std::vector<Element>{0, 1}));
}

TEST(DiagramMethod, QuotientZ4OverZ2) {
  const SigPtr ex = make_sig(expand_signature(S("Z2").signature(), 2));
  const auto q = quotient_from_negative_diagram(S("Z2"), expand_structure(S("Z4"), ex, std::vector<Element>{0, 1}));
  EXPECT_EQ(q.sub.elements, (std::vector<Element>{0, 1, 2, 3}));
  EXPECT_EQ(q.surjection.map, (std::vector<Element>{0, 1, 0, 1}));
  EXPECT_EQ(q.sub.structure.size(), 4u);
  EXPECT_TRUE(is_surjective(q.surjection));
}

TEST(DiagramMethod, QuotientOfSelfIsIdentity) {
  for (const char* n : {"P_edge", "Z4", "Z3", "Path3"}) {
    const auto q = quotient_from_negative_diagram(S(n), self_expansion(S(n)));
    EXPECT_EQ(q.surjection.map, identity(S(n).size())) << n;
  }
}

TEST(DiagramMethod, QuotientConflictWitnessSeparates) {
  const SigPtr ex = make_sig(expand_signature(S("Z2").signature(), 2));
  const FiniteStructure lp = expand_structure(S("LeftProj"), ex, std::vector<Element>{0, 1});
  try {
    quotient_from_negative_diagram(S("Z2"), lp);
    FAIL();
  } catch (const quotient_conflict& c) {
    EXPECT_TRUE(eval_sentence(lp, c.sentence()));
    EXPECT_FALSE(eval_sentence(self_expansion(S("Z2"), ex), c.sentence()));
    EXPECT_NE(c.text().find("m("), std::string::npos);
  }
}

TEST(DiagramMethod, QuotientRejectsExtraRelation) {
  const SigPtr ex = make_sig(expand_signature(S("P_edge").signature(), 2));
  try {
    quotient_from_negative_diagram(S("P_edge"), expand_structure(S("S_sym"), ex, std::vector<Element>{0, 1}));
    FAIL();
  } catch (const quotient_conflict& c) {
    EXPECT_EQ(c.text(), "\xC2\xAC" "r(" + c1 + "," + c0 + ")");
  }
}

TEST(DiagramMethod, QuotientConflictCitesSentence) {
  // m(ȧ1,ȧ1)=ȧ1 in B while m(1,1)=0 in Z2
  FiniteStructure b = S("Z2");
  b.set_value(0, Tuple{1, 1}, 1);
  const SigPtr ex = make_sig(expand_signature(S("Z2").signature(), 2));
  try {
    quotient_from_negative_diagram(S("Z2"), expand_structure(b, ex, std::vector<Element>{0, 1}));
    FAIL();
  } catch (const quotient_conflict& c) {
    EXPECT_EQ(c.text(), "\xC2\xAC(m(" + c1 + "," + c1 + ")=" + c1 + ")");
  }
}

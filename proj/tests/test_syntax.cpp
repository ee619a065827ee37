#include <gtest/gtest.h>

#include "support.hpp"

using namespace fmw;

namespace {

SigPtr graph() { return oracle::ws().signature("Graph"); }
SigPtr mag() { return oracle::ws().signature("Mag"); }

}  // namespace

TEST(Syntax, ParsesStrictClause) {
  const HornFormula f = parse_formula("r(x,y) |- r(y,x)", graph());
  ASSERT_EQ(f.negatives().size(), 1u);
  ASSERT_TRUE(f.positive().has_value());
  EXPECT_TRUE(f.is_strict());
  EXPECT_EQ(f.variables(), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(to_string(f), "r(x,y) |- r(y,x)");
}

TEST(Syntax, ParsesIdentityAndNonStrict) {
  const HornFormula comm = parse_formula("|- m(x,y) = m(y,x)", mag());
  EXPECT_TRUE(comm.negatives().empty());
  EXPECT_TRUE(comm.positive()->is_equation());
  EXPECT_EQ(to_string(comm), "|- m(x,y)=m(y,x)");

  const HornFormula irr = parse_formula("r(x,x) |- false", graph());
  EXPECT_FALSE(irr.is_strict());
  EXPECT_EQ(to_string(irr), "r(x,x) |- false");
}

TEST(Syntax, Classification) {
  auto c = classify(parse_formula("|- m(x,y)=m(y,x)", mag()));
  EXPECT_TRUE(c.strict && c.identity && c.quasi_identity);
  c = classify(parse_formula("r(x,y) & r(y,z) |- r(x,z)", graph()));
  EXPECT_TRUE(c.strict && c.quasi_identity);
  EXPECT_FALSE(c.identity);
  c = classify(parse_formula("r(x,x) |- false", graph()));
  EXPECT_FALSE(c.strict);
  EXPECT_FALSE(c.quasi_identity);
  EXPECT_EQ(kind_name(parse_formula("r(x,x) |- false", graph())), "horn");
  EXPECT_EQ(kind_name(parse_formula("r(x,y) |- r(y,x)", graph())), "quasi-identity");
  EXPECT_EQ(kind_name(parse_formula("|- x=y", graph())), "identity");
}

TEST(Syntax, RejectsMalformedInput) {
  EXPECT_THROW(parse_formula("|- false", graph()), input_error);
  EXPECT_THROW(parse_formula("r(x) |- false", graph()), input_error);
  EXPECT_THROW(parse_formula("q(x,y) |- false", graph()), input_error);
  EXPECT_THROW(parse_formula("m(x,y) |- false", mag()), input_error);
  EXPECT_THROW(parse_formula("r(x,y) r(y,x)", graph()), parse_error);
  EXPECT_THROW(parse_formula("r(x,y |- false", graph()), parse_error);
}

TEST(Syntax, ParseErrorsCarryPosition) {
  try {
    parse_workspace("signature G { rel r/2; }\nstructure A : G { universe 2; rel r = {(0,5)}; }\n");
    FAIL() << "expected an error";
  } catch (const input_error& e) {
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos);
  }
  try {
    parse_workspace("signature G { rel r/2 }\n");
    FAIL() << "expected a parse error";
  } catch (const parse_error& e) {
    EXPECT_NE(std::string(e.what()).find("1:"), std::string::npos);
  }
}

TEST(Syntax, VariablesRenumberedByFirstOccurrence) {
  const HornFormula f = parse_formula("r(z,x) |- r(x,z)", graph());
  EXPECT_EQ(f.variables(), (std::vector<std::string>{"z", "x"}));
  EXPECT_EQ(f.negatives()[0].args[0], Term::variable(0));
  EXPECT_EQ(f.negatives()[0].args[1], Term::variable(1));
}

TEST(Syntax, PrintParseRoundTrip) {
  for (const auto& name : oracle::ws().formula_order) {
    const HornFormula& f = oracle::ws().formula(name);
    const HornFormula again = parse_formula(to_string(f), f.sig_ptr());
    EXPECT_EQ(again, f) << name;
    EXPECT_EQ(to_string(again), to_string(f)) << name;
  }
}

TEST(Syntax, ExpandSignature) {
  const Signature ex = expand_signature(*graph(), 2);
  EXPECT_TRUE(ex.is_expanded());
  EXPECT_EQ(ex.base_size(), 1u);
  EXPECT_EQ(ex.expansion_size(), 2u);
  EXPECT_EQ(ex[ex.element_constant(0)].name, "\xC8\xA7" "0");
  EXPECT_EQ(ex[ex.element_constant(1)].name, "\xC8\xA7" "1");
  EXPECT_EQ(ex.element_of(ex.element_constant(1)), std::optional<std::size_t>(1));
  EXPECT_EQ(ex.element_of(0), std::nullopt);
  EXPECT_TRUE(ex.extends(*graph()));
}

TEST(Syntax, ExpandEmptySignature) {
  const Signature ex = expand_signature(Signature("Empty"), 1);
  EXPECT_EQ(ex.size(), 1u);
  EXPECT_TRUE(ex[0].is_constant());
}

TEST(Syntax, ExpansionAvoidsCollisionsDeterministically) {
  Signature s("C");
  s.add_function("\xC8\xA7" "0", 0);
  const Signature a = expand_signature(s, 2);
  const Signature b = expand_signature(s, 2);
  EXPECT_EQ(a[a.element_constant(0)].name, "\xC8\xA7" "0'");
  EXPECT_EQ(a[a.element_constant(1)].name, "\xC8\xA7" "1");
  EXPECT_EQ(a, b);
}

TEST(Syntax, ExpandedSignatureIsFrozen) {
  Signature ex = expand_signature(*graph(), 1);
  EXPECT_THROW(ex.add_relation("q", 1), signature_error);
}

TEST(Syntax, TermOrderAndDepth) {
  const Term x = Term::variable(0);
  const Term app = Term::apply(0, {x, x});
  EXPECT_LT(x, app);
  EXPECT_EQ(x.depth(), 0u);
  EXPECT_EQ(app.depth(), 1u);
  EXPECT_EQ(Term::apply(0, {app, x}).depth(), 2u);
}

TEST(Syntax, VariableNames) {
  EXPECT_EQ(variable_name(0), "x");
  EXPECT_EQ(variable_name(1), "y");
  EXPECT_EQ(variable_name(2), "z");
  EXPECT_NE(variable_name(6), variable_name(7));
}

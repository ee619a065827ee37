#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmw/constructions.hpp"
#include "fmw/filter.hpp"
#include "fmw/formula.hpp"
#include "fmw/los.hpp"
#include "fmw/morphism.hpp"
#include "fmw/structure.hpp"
#include "fmw/witness.hpp"

namespace fmw::report {

using json = nlohmann::ordered_json;

inline json structure_json(const FiniteStructure& a, const std::string& name = {}) {
  const std::string n = name.empty() ? a.name() : name;
  return {{"name", n}, {"signature", a.signature().name()}, {"size", a.size()}, {"dsl", structure_to_dsl(a, n)}};
}

inline json morphism_json(const Morphism& h) {
  return {{"kind", to_string(h.kind)}, {"source", h.source.name()}, {"target", h.target.name()}, {"map", h.map}};
}

inline json formula_json(const HornFormula& phi) {
  const auto c = classify(phi);
  return {{"dsl", to_string(phi)},
          {"kind", kind_name(phi)},
          {"strict", c.strict},
          {"identity", c.identity},
          {"quasi_identity", c.quasi_identity},
          {"variables", phi.variables()}};
}

inline json assignment_json(const HornFormula& phi, const Assignment& asg) {
  json out = json::object();
  for (std::size_t i = 0; i < phi.arity() && i < asg.size(); ++i) out[phi.variables()[i]] = asg[i];
  return out;
}

inline json filter_json(const FilterOnFiniteSet& f) {
  json members = json::array();
  for (IndexSet m : f.members()) members.push_back(format_index_set(m));
  return {{"index_size", f.index_size()}, {"least", format_index_set(f.least())}, {"members", members}};
}

inline json refutation_json(const Refutation& r) {
  json validity = json::array();
  for (const auto& [member, checked] : r.validity) validity.push_back({{"member", member}, {"assignments", checked}});
  return {{"formula", formula_json(r.formula)},
          {"falsifying", assignment_json(r.formula, r.falsifying)},
          {"validity", validity},
          {"reason", r.reason}};
}

inline json indices_json(const std::vector<IndexChoice>& indices, const StructureCatalog& k) {
  json out = json::array();
  for (const auto& i : indices)
    out.push_back({{"sentences", i.sentences}, {"member", k.members()[i.member].name()}, {"map", i.map}, {"factor", i.factor}});
  return out;
}

inline json factors_json(const std::vector<Factor>& factors, const StructureCatalog& k) {
  json out = json::array();
  for (const auto& f : factors) out.push_back({{"member", k.members()[f.member].name()}, {"map", f.map}});
  return out;
}

/// A workbench file declaring the signature and the given structures, so a
/// report can be parsed back and its maps re-checked.
inline std::string workspace_dsl(const Signature& sig, const std::vector<std::pair<std::string, const FiniteStructure*>>& s) {
  std::string out = signature_to_dsl(sig);
  for (const auto& [name, a] : s) out += structure_to_dsl(*a, name, sig.name());
  return out;
}

inline json malcev_json(const FiniteStructure& a, const StructureCatalog& k, const MalcevResult& r) {
  json out = {{"command", "malcev"}, {"structure", a.name()}, {"outcome", r.embedded() ? "embedded" : "refuted"}};
  out["indices"] = indices_json(r.indices, k);
  if (r.refutation) {
    out["refutation"] = refutation_json(*r.refutation);
    return out;
  }
  const auto& c = *r.construction;
  out["factors"] = factors_json(c.factors, k);
  out["filter"] = filter_json(c.filter);
  json images = json::array();
  for (const auto& t : c.embedding.images) images.push_back(t);
  json elements = json::array();
  for (const auto& t : c.embedding.sub.elements) elements.push_back(t);
  out["embedding"] = {{"images", images}, {"map", c.embedding.embedding.map}};
  out["substructure"] = {{"elements", elements}, {"structure", structure_json(c.embedding.sub.structure, "C_sub")}};
  std::vector<std::pair<std::string, const FiniteStructure*>> decl{{"A_" + a.name(), &a},
                                                                    {"C_sub", &c.embedding.sub.structure}};
  if (c.product) {
    out["product"] = {{"size", c.product->carrier.size()}, {"embedding", c.product_embedding->map}};
    decl.emplace_back("P_product", &c.product->carrier);
  }
  out["workspace"] = workspace_dsl(a.signature(), decl);
  return out;
}

inline json birkhoff_json(const FiniteStructure& a, const StructureCatalog& k, const BirkhoffResult& r) {
  json out = {{"command", "birkhoff"}, {"structure", a.name()}, {"outcome", r.embedded() ? "embedded" : "refuted"}};
  out["indices"] = indices_json(r.indices, k);
  if (r.refutation) {
    out["refutation"] = refutation_json(*r.refutation);
    return out;
  }
  const auto& c = *r.construction;
  out["factors"] = factors_json(c.factors, k);
  out["refinements"] = c.refinements;
  json elements = json::array();
  for (const auto& t : c.quotient.sub.elements) elements.push_back(t);
  json terms = json::array();
  const Signature ex = expand_signature(a.signature(), a.size());
  for (const auto& t : c.quotient.terms) terms.push_back(to_string(t, ex, {}));
  out["substructure"] = {{"elements", elements}, {"terms", terms}, {"structure", structure_json(c.quotient.sub.structure, "C_sub")}};
  out["surjection"] = c.quotient.surjection.map;
  std::vector<std::pair<std::string, const FiniteStructure*>> decl{{"A_" + a.name(), &a},
                                                                    {"C_sub", &c.quotient.sub.structure}};
  if (c.product) {
    out["product"] = {{"size", c.product->carrier.size()}};
    decl.emplace_back("P_product", &c.product->carrier);
  }
  out["workspace"] = workspace_dsl(a.signature(), decl);
  return out;
}

inline json los_json(const LosReport& r) {
  json v = json::array();
  for (const auto& x : r.violations) v.push_back(x.to_string());
  return {{"atoms", r.atoms},
          {"assignments", r.assignments},
          {"patterns", r.patterns},
          {"atomic_violations", r.atomic_violations},
          {"horn_violations", r.horn_violations},
          {"violations", v}};
}

}  // namespace fmw::report

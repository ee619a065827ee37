#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fmw/constructions.hpp"
#include "fmw/diagram_method.hpp"
#include "fmw/enumerate.hpp"
#include "fmw/error.hpp"
#include "fmw/filter.hpp"
#include "fmw/los.hpp"
#include "fmw/morphism.hpp"
#include "fmw/parser.hpp"
#include "fmw/report.hpp"
#include "fmw/structure.hpp"
#include "fmw/verify.hpp"
#include "fmw/witness.hpp"

namespace fmw::cli {

enum Exit : int { ok = 0, fails = 1, usage = 2, resource = 3 };

using report::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<Element> parse_elements(const std::string& text, const FiniteStructure& in) {
  std::vector<Element> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw input_error("empty entry in element list '" + text + "'");
    auto lab = std::find(in.labels().begin(), in.labels().end(), item);
    if (lab != in.labels().end()) {
      out.push_back(static_cast<Element>(lab - in.labels().begin()));
      continue;
    }
    if (!std::all_of(item.begin(), item.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw input_error("'" + item + "' is not an element of " + in.name());
    const unsigned long v = std::stoul(item);
    if (v >= in.size()) throw input_error("element " + item + " out of range for " + in.name());
    out.push_back(static_cast<Element>(v));
  }
  return out;
}

inline std::string join_elements(const std::vector<Element>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

inline std::string tuple_text(const Tuple& t) { return "(" + join_elements(t) + ")"; }

struct Options {
  bool json = false;
  Limits limits;
  std::string file;
  std::string structure, target, source, formula, signature, kind = "hom", map, constants, gens, suite = "los",
                                                              form = "any";
  std::vector<std::string> klass, factors;
  std::size_t n = 0, vars = 3, depth = 1, negatives = 2, cases = 100;
  std::uint64_t seed = 1;
  bool faithful = false, atomic_only = false, horn_only = false;
};

class Runner {
 public:
  Runner(Options& o, std::ostream& out) : o_(o), out_(out) {}

  Workspace& ws() {
    if (!ws_) ws_ = parse_workspace(read_file(o_.file));
    return *ws_;
  }

  /// A formula name from the workspace, or clause text over `sig`.
  HornFormula formula(const SigPtr& sig) {
    if (o_.formula.find("|-") != std::string::npos) return parse_formula(o_.formula, sig);
    return ws().formula(o_.formula);
  }

  EnumerationBounds bounds() const { return {o_.vars, o_.depth, o_.negatives}; }

  int emit(const json& j, const std::string& text, int code) {
    if (o_.json) {
      out_ << j.dump(2) << "\n";
    } else {
      out_ << text;
    }
    return code;
  }

  int check() {
    const FiniteStructure& a = ws().structure(o_.structure);
    const HornFormula phi = formula(a.sig_ptr());
    const Satisfaction s = satisfies(a, phi, o_.limits);
    json j{{"command", "check"}, {"structure", a.name()}, {"formula", report::formula_json(phi)}, {"holds", s.holds},
           {"assignments", s.assignments_checked}};
    std::string text = s.holds ? "holds\n" : "fails at " + format_assignment(phi, *s.witness) + "\n";
    if (!s.holds) j["witness"] = report::assignment_json(phi, *s.witness);
    return emit(j, text, s.holds ? ok : fails);
  }

  int class_check() {
    const StructureCatalog k = ws().catalog(o_.klass);
    const HornFormula phi = formula(k.sig_ptr());
    const ClassSatisfaction s = class_satisfies(k, phi, o_.limits);
    json j{{"command", "class-check"}, {"class", o_.klass}, {"formula", report::formula_json(phi)}, {"holds", s.holds}};
    std::string text = "holds\n";
    if (!s.holds) {
      j["failing_member"] = *s.failing_member;
      j["witness"] = report::assignment_json(phi, *s.witness);
      text = "fails in " + *s.failing_member + " at " + format_assignment(phi, *s.witness) + "\n";
    }
    return emit(j, text, s.holds ? ok : fails);
  }

  int unit() {
    const SigPtr sig = ws().signature(o_.signature);
    const FiniteStructure u = unit_structure(sig);
    return emit({{"command", "unit"}, {"structure", report::structure_json(u)}}, structure_to_dsl(u, "unit"), ok);
  }

  std::vector<FiniteStructure> factor_list() {
    std::vector<FiniteStructure> out;
    for (const auto& f : o_.factors) out.push_back(ws().structure(f));
    return out;
  }

  SigPtr factor_signature() {
    if (!o_.factors.empty()) return ws().structure(o_.factors.front()).sig_ptr();
    if (o_.signature.empty()) throw input_error("an empty product needs --signature");
    return ws().signature(o_.signature);
  }

  int product() {
    const SigPtr sig = factor_signature();
    auto fs = factor_list();
    for (const auto& f : fs)
      if (!same_signature(f.sig_ptr(), sig)) throw signature_error("factors have different signatures");
    const ProductStructure p = direct_product(sig, fs, o_.limits);
    json tuples = json::array();
    std::string text = structure_to_dsl(p.carrier, "product");
    text += "# elements\n";
    for (std::size_t i = 0; i < p.tuples.size(); ++i) {
      tuples.push_back(p.tuples[i]);
      text += "#   " + std::to_string(i) + " = " + tuple_text(p.tuples[i]) + "\n";
    }
    text += "# " + std::to_string(p.projections.size()) + " projections verified\n";
    return emit({{"command", "product"},
                 {"factors", o_.factors},
                 {"tuples", tuples},
                 {"projections_verified", p.projections.size()},
                 {"structure", report::structure_json(p.carrier)}},
                text, ok);
  }

  FilterOnFiniteSet filter_for(std::size_t n) {
    const auto gens = parse_index_sets(o_.gens, n);
    return filter_from_generators(n, gens, o_.limits);
  }

  int rprod() {
    auto fs = factor_list();
    if (fs.empty()) throw input_error("rprod needs at least one factor");
    const FilterOnFiniteSet f = filter_for(fs.size());
    const ReducedProductStructure rp = reduced_product(fs, f, o_.limits);
    json reps = json::array();
    std::string text = structure_to_dsl(rp.carrier, "reduced_product");
    text += "# filter generated by " + format_index_set(f.least()) + "\n# classes\n";
    for (std::size_t i = 0; i < rp.class_reps.size(); ++i) {
      reps.push_back(rp.class_reps[i]);
      text += "#   " + std::to_string(i) + " = " + tuple_text(rp.class_reps[i]) + "\n";
    }
    return emit({{"command", "rprod"},
                 {"factors", o_.factors},
                 {"filter", report::filter_json(f)},
                 {"class_reps", reps},
                 {"structure", report::structure_json(rp.carrier)}},
                text, ok);
  }

  int filter() {
    if (o_.n == 0) throw input_error("--n must be positive");
    const FilterOnFiniteSet f = filter_for(o_.n);
    std::string text;
    for (IndexSet m : f.members()) text += format_index_set(m) + "\n";
    return emit({{"command", "filter"}, {"filter", report::filter_json(f)}}, text, ok);
  }

  int diagram() {
    const FiniteStructure& a = ws().structure(o_.structure);
    const Diagram d = fmw::diagram(a);
    json pos = json::array(), neg = json::array();
    std::string text;
    for (const auto& s : d.positive) {
      pos.push_back(to_string(s, *d.expanded));
      text += to_string(s, *d.expanded) + "\n";
    }
    for (const auto& s : d.negative) {
      const std::string t = negated_to_string(s, *d.expanded);
      neg.push_back(t);
      text += t + "\n";
    }
    return emit({{"command", "diagram"}, {"structure", a.name()}, {"positive", pos}, {"negative", neg}}, text, ok);
  }

  int hom() {
    const FiniteStructure& a = ws().structure(o_.source);
    const FiniteStructure& b = ws().structure(o_.target);
    const MorphismKind kind = parse_morphism_kind(o_.kind);
    json j{{"command", "hom"}, {"source", a.name()}, {"target", b.name()}, {"kind", to_string(kind)}};
    if (!o_.map.empty()) {
      const auto h = parse_elements(o_.map, b);
      if (h.size() != a.size()) throw input_error("map has " + std::to_string(h.size()) + " entries, source has " +
                                                  std::to_string(a.size()));
      if (auto v = find_violation(h, a, b, kind)) {
        j["verified"] = false;
        j["violation"] = v->to_string();
        return emit(j, "not a " + std::string(to_string(kind)) + ": " + v->to_string() + "\n", fails);
      }
      j["verified"] = true;
      j["map"] = h;
      return emit(j, "verified " + std::string(to_string(kind)) + " " + join_elements(h) + "\n", ok);
    }
    const auto h = find_morphism(a, b, kind, o_.limits);
    j["found"] = h.has_value();
    if (!h) return emit(j, "none\n", fails);
    j["map"] = h->map;
    return emit(j, "found " + std::string(to_string(kind)) + " " + join_elements(h->map) + "\n", ok);
  }

  FiniteStructure expanded_target(const SigPtr& ex) {
    const FiniteStructure& b = ws().structure(o_.target);
    return expand_structure(b, ex, parse_elements(o_.constants, b));
  }

  int embed() {
    const FiniteStructure& a = ws().structure(o_.structure);
    const SigPtr ex = make_sig(expand_signature(a.signature(), a.size()));
    const FiniteStructure b = expanded_target(ex);
    json j{{"command", "embed"}, {"structure", a.name()}, {"target", o_.target}};
    try {
      const Morphism h = embed_from_diagram(a, b);
      j["embedded"] = true;
      j["map"] = h.map;
      return emit(j, "embedding " + join_elements(h.map) + "\n", ok);
    } catch (const diagram_violation& v) {
      j["embedded"] = false;
      j["sentence"] = v.text();
      return emit(j, "diagram sentence fails: " + v.text() + "\n", fails);
    }
  }

  int quotient() {
    const FiniteStructure& a = ws().structure(o_.structure);
    const SigPtr ex = make_sig(expand_signature(a.signature(), a.size()));
    const FiniteStructure b = expanded_target(ex);
    json j{{"command", "quotient"}, {"structure", a.name()}, {"target", o_.target}};
    try {
      const auto q = quotient_from_negative_diagram(a, b, o_.limits);
      json terms = json::array();
      std::string text;
      for (std::size_t i = 0; i < q.sub.elements.size(); ++i) {
        const std::string t = to_string(q.terms[i], *ex, {});
        terms.push_back(t);
        text += std::to_string(q.sub.elements[i]) + " = " + t + " -> " + std::to_string(q.surjection.map[i]) + "\n";
      }
      j["presented"] = true;
      j["elements"] = q.sub.elements;
      j["terms"] = terms;
      j["surjection"] = q.surjection.map;
      return emit(j, text, ok);
    } catch (const quotient_conflict& c) {
      j["presented"] = false;
      j["sentence"] = c.text();
      return emit(j, std::string(c.what()) + "\n", fails);
    }
  }

  int axiomatize() {
    const StructureCatalog k = ws().catalog(o_.klass);
    const HornKind kind = parse_kind(o_.form);
    const auto fs = valid_formulas(k, bounds(), kind, o_.limits);
    json list = json::array();
    std::string text;
    for (const auto& f : fs) {
      list.push_back(to_string(f));
      text += to_string(f) + "\n";
    }
    return emit({{"command", "axiomatize"}, {"class", o_.klass}, {"count", fs.size()}, {"formulas", list}}, text, ok);
  }

  static HornKind parse_kind(const std::string& s) {
    if (s == "any" || s == "horn") return HornKind::any;
    if (s == "identity") return HornKind::identity;
    if (s == "quasi-identity") return HornKind::quasi_identity;
    if (s == "non-strict") return HornKind::non_strict;
    throw input_error("unknown formula kind '" + s + "' (any, identity, quasi-identity, non-strict)");
  }

  static std::string refutation_text(const Refutation& r) {
    std::string out = "refuted (" + r.kind() + "): " + to_string(r.formula) + "\n";
    out += "falsified at " + format_assignment(r.formula, r.falsifying) + "\n";
    out += "no model for " + r.reason + "\n";
    for (const auto& [m, n] : r.validity) out += "valid in " + m + " (" + std::to_string(n) + " assignments)\n";
    return out;
  }

  static std::string factors_text(const std::vector<Factor>& fs, const StructureCatalog& k) {
    std::string out;
    for (std::size_t i = 0; i < fs.size(); ++i)
      out += "factor " + std::to_string(i) + ": " + k.members()[fs[i].member].name() + " via " +
             join_elements(fs[i].map) + "\n";
    return out;
  }

  int malcev() {
    const FiniteStructure& a = ws().structure(o_.structure);
    const StructureCatalog k = ws().catalog(o_.klass);
    const MalcevResult r = malcev_witness(a, k, {o_.faithful}, o_.limits);
    if (auto bad = audit_malcev(a, k, r, {o_.faithful}, o_.limits)) throw error("audit failed: " + *bad);
    const json j = report::malcev_json(a, k, r);
    if (r.refutation) return emit(j, refutation_text(*r.refutation), fails);
    const auto& c = *r.construction;
    std::string text = "embedded\n" + factors_text(c.factors, k);
    text += "filter generated by " + format_index_set(c.filter.least()) + " over " +
            std::to_string(c.filter.index_size()) + " indices\n";
    for (Element e = 0; e < a.size(); ++e)
      text += "  " + std::to_string(e) + " -> " + tuple_text(c.embedding.images[e]) + "\n";
    if (c.product)
      text += "reduced product of " + std::to_string(c.product->carrier.size()) + " classes, embedding " +
              join_elements(c.product_embedding->map) + "\n";
    return emit(j, text, ok);
  }

  int birkhoff() {
    const FiniteStructure& a = ws().structure(o_.structure);
    const StructureCatalog k = ws().catalog(o_.klass);
    const BirkhoffResult r = birkhoff_witness(a, k, o_.limits);
    if (auto bad = audit_birkhoff(a, k, r, o_.limits)) throw error("audit failed: " + *bad);
    const json j = report::birkhoff_json(a, k, r);
    if (r.refutation) return emit(j, refutation_text(*r.refutation), fails);
    const auto& c = *r.construction;
    std::string text = "homomorphic image of a substructure of a product\n" + factors_text(c.factors, k);
    for (const auto& s : c.refinements) text += "refined by " + s + "\n";
    for (std::size_t i = 0; i < c.quotient.sub.elements.size(); ++i)
      text += "  " + tuple_text(c.quotient.sub.elements[i]) + " -> " + std::to_string(c.quotient.surjection.map[i]) +
              "\n";
    return emit(j, text, ok);
  }

  int los() {
    auto fs = factor_list();
    if (fs.empty()) throw input_error("los-audit needs at least one factor");
    const FilterOnFiniteSet f = filter_for(fs.size());
    LosOptions opt;
    opt.check_atomic = !o_.horn_only;
    opt.check_horn = !o_.atomic_only;
    const LosReport r = los_audit(fs, f, bounds(), o_.limits, opt);
    std::string text = "atoms " + std::to_string(r.atoms) + ", assignments " + std::to_string(r.assignments) +
                       ", patterns " + std::to_string(r.patterns) + "\n";
    text += "atomic violations " + std::to_string(r.atomic_violations) + ", horn violations " +
            std::to_string(r.horn_violations) + "\n";
    for (const auto& v : r.violations) text += v.to_string() + "\n";
    json j = report::los_json(r);
    j["command"] = "los-audit";
    return emit(j, text, r.ok() ? ok : fails);
  }

  int strict() {
    const StructureCatalog k = ws().catalog(o_.klass);
    const StrictnessReport r = strictness_audit(k, bounds(), o_.limits);
    json with = json::array(), without = json::array();
    std::string text = "with unit: " + std::to_string(r.valid_with_unit) + " valid, " +
                       std::to_string(r.non_strict_with_unit.size()) + " non-strict\n";
    for (const auto& f : r.non_strict_with_unit) {
      with.push_back(to_string(f));
      text += "  " + to_string(f) + "\n";
    }
    text += "without unit: " + std::to_string(r.valid_without_unit) + " valid, " +
            std::to_string(r.non_strict_without_unit.size()) + " non-strict\n";
    for (const auto& f : r.non_strict_without_unit) {
      without.push_back(to_string(f));
      text += "  " + to_string(f) + "\n";
    }
    return emit({{"command", "strict-audit"},
                 {"class", o_.klass},
                 {"valid_with_unit", r.valid_with_unit},
                 {"non_strict_with_unit", with},
                 {"valid_without_unit", r.valid_without_unit},
                 {"non_strict_without_unit", without}},
                text, r.ok() ? ok : fails);
  }

  int verify() {
    const auto r = verify::run_suite(o_.suite, o_.seed, o_.cases, o_.limits);
    json stats = json::object();
    for (const auto& [k, v] : r.stats) stats[k] = v;
    json j{{"command", "verify"}, {"suite", r.suite}, {"seed", r.seed}, {"cases", r.cases}, {"passed", r.passed},
           {"stats", stats}};
    if (r.first_failure) j["first_failure"] = *r.first_failure;
    return emit(j, r.text(), r.ok() ? ok : fails);
  }

 private:
  Options& o_;
  std::ostream& out_;
  std::optional<Workspace> ws_;
};

/// Parses the command line and runs one subcommand. `args` excludes the
/// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Finite model theory workbench", "fmw"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", o.json, "Machine-readable output");
  app.add_option("--max-assignments", o.limits.max_assignments, "Cap on enumerated assignments");
  app.add_option("--max-product", o.limits.max_product, "Cap on product cardinality");
  app.add_option("--max-search", o.limits.max_search, "Cap on morphism search nodes");

  Runner runner(o, out);
  std::function<int()> action;

  auto sub = [&](const char* name, const char* help, int (Runner::*fn)(), bool needs_file = true) {
    CLI::App* s = app.add_subcommand(name, help);
    if (needs_file) s->add_option("file", o.file, "Workspace file")->required();
    s->callback([&, fn] { action = [&, fn] { return (runner.*fn)(); }; });
    return s;
  };
  auto bounds = [&](CLI::App* s) {
    s->add_option("--vars", o.vars, "Variables")->capture_default_str();
    s->add_option("--depth", o.depth, "Term depth")->capture_default_str();
    s->add_option("--negatives", o.negatives, "Negated atoms")->capture_default_str();
  };

  auto* check = sub("check", "Does a structure satisfy a formula", &Runner::check);
  check->add_option("--structure", o.structure)->required();
  check->add_option("--formula", o.formula, "Formula name or clause text")->required();

  auto* cc = sub("class-check", "Does every member of a class satisfy a formula", &Runner::class_check);
  cc->add_option("--class", o.klass)->required()->delimiter(',');
  cc->add_option("--formula", o.formula, "Formula name or clause text")->required();

  sub("unit", "Unit structure of a signature", &Runner::unit)->add_option("--signature", o.signature)->required();

  auto* prod = sub("product", "Direct product", &Runner::product);
  prod->add_option("--factors", o.factors)->delimiter(',');
  prod->add_option("--signature", o.signature, "Signature of the empty product");

  auto* rp = sub("rprod", "Reduced product by a generated filter", &Runner::rprod);
  rp->add_option("--factors", o.factors)->required()->delimiter(',');
  rp->add_option("--gens", o.gens, "Filter generators such as \"{0,1};{1}\"");

  auto* fil = sub("filter", "Filter generated by index sets", &Runner::filter, false);
  fil->add_option("--n", o.n, "Index set size")->required();
  fil->add_option("--gens", o.gens, "Generators such as \"{0,1};{1}\"");

  sub("diagram", "Flat diagram of a structure", &Runner::diagram)->add_option("--structure", o.structure)->required();

  auto* hom = sub("hom", "Find or check a morphism", &Runner::hom);
  hom->add_option("--source", o.source)->required();
  hom->add_option("--target", o.target)->required();
  hom->add_option("--kind", o.kind, "hom, embedding or iso")->capture_default_str();
  hom->add_option("--map", o.map, "Candidate map as comma-separated targets");

  for (auto [name, help, fn] : {std::tuple{"embed", "Embedding from a model of the diagram", &Runner::embed},
                                std::tuple{"quotient", "Quotient from a model of the negative diagram",
                                           &Runner::quotient}}) {
    auto* s = sub(name, help, fn);
    s->add_option("--structure", o.structure)->required();
    s->add_option("--target", o.target)->required();
    s->add_option("--constants", o.constants, "Interpretation of each element constant")->required();
  }

  auto* ax = sub("axiomatize", "Bounded valid Horn formulas of a class", &Runner::axiomatize);
  ax->add_option("--class", o.klass)->required()->delimiter(',');
  ax->add_option("--kind", o.form, "any, identity, quasi-identity or non-strict")->capture_default_str();
  bounds(ax);

  auto* mc = sub("malcev", "Embed into a reduced product of members or refute by a Horn formula", &Runner::malcev);
  mc->add_option("--structure", o.structure)->required();
  mc->add_option("--class", o.klass)->required()->delimiter(',');
  mc->add_flag("--faithful", o.faithful, "Index by every finite subset of the diagram");

  auto* bk = sub("birkhoff", "Present as an image of a substructure of a product or refute by an identity",
                 &Runner::birkhoff);
  bk->add_option("--structure", o.structure)->required();
  bk->add_option("--class", o.klass)->required()->delimiter(',');

  auto* la = sub("los-audit", "Check both clauses of the Los lemma on a reduced product", &Runner::los);
  la->add_option("--factors", o.factors)->required()->delimiter(',');
  la->add_option("--gens", o.gens, "Filter generators");
  la->add_flag("--atomic-only", o.atomic_only);
  la->add_flag("--horn-only", o.horn_only);
  bounds(la);

  auto* sa = sub("strict-audit", "Non-strict valid formulas with and without the unit", &Runner::strict);
  sa->add_option("--class", o.klass)->required()->delimiter(',');
  bounds(sa);

  auto* ve = sub("verify", "Run a randomized property suite", &Runner::verify, false);
  ve->add_option("--suite", o.suite, "los, horn, diagram, malcev or birkhoff")->required();
  ve->add_option("--seed", o.seed)->capture_default_str();
  ve->add_option("--cases", o.cases)->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }
  try {
    return action();
  } catch (const resource_error& e) {
    err << "resource cap: " << e.what() << "\n";
    return resource;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace fmw::cli

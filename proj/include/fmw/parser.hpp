#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/formula.hpp"
#include "fmw/signature.hpp"
#include "fmw/structure.hpp"

namespace fmw {

/// Grammar of workbench files:
///
///   file        := (sig_decl | struct_decl | formula_decl)*
///   sig_decl    := "signature" NAME "{" (("fn"|"rel") NAME "/" NAT ";")* "}"
///   struct_decl := "structure" NAME ":" SIG "{" "universe" (NAT | "{" NAME,* "}") ";"
///                  ("fn" NAME "=" table ";" | "rel" NAME "=" "{" tuple,* "}" ";")* "}"
///   formula_decl:= "formula" NAME ":" SIG "=" clause [";"]
///   clause      := [atom ("&" atom)*] "|-" (atom | "false")
///   atom        := NAME "(" term,+ ")" | term "=" term
///   term        := VAR | NAME | NAME "(" term,+ ")"
///
/// Tables list values in lexicographic argument order; brackets may nest and
/// rows may be separated by ";". Omitted relations are empty. Comments run
/// from "#" or "//" to the end of the line.
namespace detail {

struct Token {
  enum class Kind { ident, number, punct, end };
  Kind kind = Kind::end;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (is_ident_start(c)) {
        t.kind = Token::Kind::ident;
        while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_])))
          t.text += take();
      } else if (std::isdigit(c)) {
        t.kind = Token::Kind::number;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          t.text += take();
      } else if (c == '|' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
        t.kind = Token::Kind::punct;
        t.text = "|-";
        take();
        take();
      } else if (std::string_view("{}()[],;:=/&").find(static_cast<char>(c)) != std::string_view::npos) {
        t.kind = Token::Kind::punct;
        t.text = std::string(1, take());
      } else {
        throw parse_error(std::string("unexpected character '") + static_cast<char>(c) + "'", line_, col_);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
  static bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80;
  }

  char take() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') take();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class TokenStream {
 public:
  explicit TokenStream(std::string_view src) : toks_(Lexer(src).tokenize()) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::end; }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is(std::string_view punct_or_kw, std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind != Token::Kind::end && t.kind != Token::Kind::number && t.text == punct_or_kw;
  }
  bool accept(std::string_view p) {
    if (!is(p)) return false;
    next();
    return true;
  }
  Token expect(std::string_view p) {
    if (!is(p)) fail("expected '" + std::string(p) + "'");
    return next();
  }
  std::string ident(const char* what = "identifier") {
    if (peek().kind != Token::Kind::ident) fail(std::string("expected ") + what);
    return next().text;
  }
  std::size_t number() {
    if (peek().kind != Token::Kind::number) fail("expected a number");
    const Token t = next();
    try {
      return static_cast<std::size_t>(std::stoull(t.text));
    } catch (const std::exception&) {
      throw parse_error("number out of range", t.line, t.column);
    }
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == Token::Kind::end ? "end of input" : "'" + t.text + "'";
    throw parse_error(msg + ", found " + found, t.line, t.column);
  }
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
    throw parse_error(msg, t.line, t.column);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

class ClauseParser {
 public:
  ClauseParser(TokenStream& ts, SigPtr sig) : ts_(ts), sig_(std::move(sig)) {}

  HornFormula parse() {
    std::vector<Atom> negatives;
    if (!ts_.is("|-")) {
      negatives.push_back(atom());
      while (ts_.accept("&")) negatives.push_back(atom());
    }
    ts_.expect("|-");
    std::optional<Atom> positive;
    if (ts_.peek().kind == Token::Kind::ident && ts_.peek().text == "false" && !sig_->find("false")) {
      ts_.next();
    } else {
      positive = atom();
    }
    if (negatives.empty() && !positive) ts_.fail("empty clause '|- false' is not a basic Horn formula");
    return HornFormula(sig_, std::move(negatives), std::move(positive), vars_);
  }

 private:
  Atom atom() {
    const Token& t = ts_.peek();
    if (t.kind == Token::Kind::ident) {
      if (auto idx = sig_->find(t.text); idx && (*sig_)[*idx].is_relation()) {
        const Token name = ts_.next();
        std::vector<Term> args;
        if (ts_.accept("(")) {
          if (!ts_.is(")")) {
            args.push_back(term());
            while (ts_.accept(",")) args.push_back(term());
          }
          ts_.expect(")");
        }
        if (args.size() != (*sig_)[*idx].arity)
          ts_.fail_at(name, "arity mismatch for '" + name.text + "': expected " +
                                std::to_string((*sig_)[*idx].arity) + ", got " + std::to_string(args.size()));
        return Atom::relation(*idx, std::move(args));
      }
    }
    Term lhs = term();
    ts_.expect("=");
    Term rhs = term();
    return Atom::equation(std::move(lhs), std::move(rhs));
  }

  Term term() {
    const Token name = ts_.peek();
    if (name.kind != Token::Kind::ident) ts_.fail("expected a term");
    ts_.next();
    auto idx = sig_->find(name.text);
    if (ts_.is("(")) {
      if (!idx) ts_.fail_at(name, "unknown symbol '" + name.text + "'");
      const Symbol& s = (*sig_)[*idx];
      if (!s.is_function()) ts_.fail_at(name, "relation '" + name.text + "' used as a term");
      ts_.next();
      std::vector<Term> args;
      if (!ts_.is(")")) {
        args.push_back(term());
        while (ts_.accept(",")) args.push_back(term());
      }
      ts_.expect(")");
      if (args.size() != s.arity)
        ts_.fail_at(name, "arity mismatch for '" + name.text + "': expected " + std::to_string(s.arity) +
                              ", got " + std::to_string(args.size()));
      return Term::apply(*idx, std::move(args));
    }
    if (idx) {
      const Symbol& s = (*sig_)[*idx];
      if (s.is_constant()) return Term::apply(*idx);
      if (s.is_relation()) ts_.fail_at(name, "relation '" + name.text + "' used as a term");
      ts_.fail_at(name, "arity mismatch for '" + name.text + "': expected " + std::to_string(s.arity) +
                            ", got 0");
    }
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name.text) return Term::variable(i);
    vars_.push_back(name.text);
    return Term::variable(vars_.size() - 1);
  }

  TokenStream& ts_;
  SigPtr sig_;
  std::vector<std::string> vars_;
};

}  // namespace detail

/// Parses one clause, e.g. "r(x,y) & r(y,z) |- r(x,z)" or "|- m(x,y)=m(y,x)".
inline HornFormula parse_formula(std::string_view text, SigPtr sig) {
  detail::TokenStream ts(text);
  HornFormula phi = detail::ClauseParser(ts, std::move(sig)).parse();
  ts.accept(";");
  if (!ts.at_end()) ts.fail("trailing input after formula");
  return phi;
}

/// Named signatures, structures and formulas of one or more workbench files.
struct Workspace {
  std::map<std::string, SigPtr> signatures;
  std::map<std::string, FiniteStructure> structures;
  std::map<std::string, HornFormula> formulas;
  std::vector<std::string> signature_order;
  std::vector<std::string> structure_order;
  std::vector<std::string> formula_order;

  SigPtr signature(const std::string& name) const {
    auto it = signatures.find(name);
    if (it == signatures.end()) throw input_error("unknown signature '" + name + "'");
    return it->second;
  }
  const FiniteStructure& structure(const std::string& name) const {
    auto it = structures.find(name);
    if (it == structures.end()) throw input_error("unknown structure '" + name + "'");
    return it->second;
  }
  const HornFormula& formula(const std::string& name) const {
    auto it = formulas.find(name);
    if (it == formulas.end()) throw input_error("unknown formula '" + name + "'");
    return it->second;
  }
  /// Catalog of the named structures, in the given order.
  StructureCatalog catalog(const std::vector<std::string>& names) const {
    if (names.empty()) throw input_error("empty class");
    StructureCatalog k(structure(names.front()).sig_ptr());
    for (const auto& n : names) k.add(structure(n));
    return k;
  }
};

namespace detail {

class WorkspaceParser {
 public:
  WorkspaceParser(std::string_view text, Workspace& ws) : ts_(text), ws_(ws) {}

  void parse() {
    while (!ts_.at_end()) {
      if (ts_.is("signature")) {
        signature();
      } else if (ts_.is("structure")) {
        structure();
      } else if (ts_.is("formula")) {
        formula();
      } else {
        ts_.fail("expected 'signature', 'structure' or 'formula'");
      }
    }
  }

 private:
  void signature() {
    ts_.expect("signature");
    const Token at = ts_.peek();
    std::string name = ts_.ident("signature name");
    if (ws_.signatures.count(name)) ts_.fail_at(at, "duplicate signature '" + name + "'");
    Signature sig(name);
    ts_.expect("{");
    while (!ts_.accept("}")) {
      bool fn;
      if (ts_.accept("fn")) {
        fn = true;
      } else if (ts_.accept("rel")) {
        fn = false;
      } else {
        ts_.fail("expected 'fn' or 'rel'");
      }
      const Token sym_at = ts_.peek();
      std::string sym = ts_.ident("symbol name");
      ts_.expect("/");
      std::size_t arity = ts_.number();
      ts_.expect(";");
      try {
        fn ? sig.add_function(sym, arity) : sig.add_relation(sym, arity);
      } catch (const signature_error& e) {
        ts_.fail_at(sym_at, e.what());
      }
    }
    ts_.accept(";");
    ws_.signatures.emplace(name, make_sig(std::move(sig)));
    ws_.signature_order.push_back(name);
  }

  void structure() {
    ts_.expect("structure");
    const Token at = ts_.peek();
    std::string name = ts_.ident("structure name");
    if (ws_.structures.count(name)) ts_.fail_at(at, "duplicate structure '" + name + "'");
    ts_.expect(":");
    const Token sig_at = ts_.peek();
    std::string sig_name = ts_.ident("signature name");
    auto sit = ws_.signatures.find(sig_name);
    if (sit == ws_.signatures.end()) ts_.fail_at(sig_at, "unknown signature '" + sig_name + "'");
    const SigPtr sig = sit->second;
    ts_.expect("{");
    ts_.expect("universe");
    std::size_t n = 0;
    std::vector<std::string> labels;
    const Token size_at = ts_.peek();
    if (ts_.accept("{")) {
      if (!ts_.is("}")) {
        labels.push_back(ts_.ident("label"));
        while (ts_.accept(",")) labels.push_back(ts_.ident("label"));
      }
      ts_.expect("}");
      n = labels.size();
    } else {
      n = ts_.number();
    }
    if (n == 0) ts_.fail_at(size_at, "structures must have a nonempty universe");
    ts_.expect(";");
    FiniteStructure a(sig, n, name);
    a.set_labels(labels);
    std::vector<bool> seen(sig->size(), false);
    while (!ts_.accept("}")) {
      bool fn;
      if (ts_.accept("fn")) {
        fn = true;
      } else if (ts_.accept("rel")) {
        fn = false;
      } else {
        ts_.fail("expected 'fn', 'rel' or '}'");
      }
      const Token sym_at = ts_.peek();
      std::string sym = ts_.ident("symbol name");
      auto idx = sig->find(sym);
      if (!idx) ts_.fail_at(sym_at, "unknown symbol '" + sym + "'");
      if ((*sig)[*idx].is_function() != fn)
        ts_.fail_at(sym_at, "'" + sym + "' is declared as a " + (fn ? "relation" : "function"));
      if (seen[*idx]) ts_.fail_at(sym_at, "duplicate table for '" + sym + "'");
      seen[*idx] = true;
      ts_.expect("=");
      try {
        if (fn) {
          a.set_table(*idx, values());
        } else {
          relation(a, *idx);
        }
      } catch (const parse_error&) {
        throw;
      } catch (const error& e) {
        ts_.fail_at(sym_at, e.what());
      }
      ts_.expect(";");
    }
    ts_.accept(";");
    for (std::size_t s = 0; s < sig->size(); ++s)
      if ((*sig)[s].is_function() && !seen[s])
        ts_.fail_at(at, "structure '" + name + "' has no table for '" + (*sig)[s].name + "'");
    ws_.structures.emplace(name, std::move(a));
    ws_.structure_order.push_back(name);
  }

  std::vector<Element> values() {
    std::vector<Element> out;
    if (ts_.peek().kind == Token::Kind::number) {
      out.push_back(static_cast<Element>(ts_.number()));
      return out;
    }
    ts_.expect("[");
    int depth = 1;
    while (depth > 0) {
      if (ts_.accept("[")) {
        ++depth;
      } else if (ts_.accept("]")) {
        --depth;
      } else if (ts_.accept(",") || ts_.accept(";")) {
      } else {
        out.push_back(static_cast<Element>(ts_.number()));
      }
    }
    return out;
  }

  void relation(FiniteStructure& a, std::size_t sym) {
    const std::size_t arity = a.signature()[sym].arity;
    ts_.expect("{");
    auto one = [&] {
      const Token at = ts_.peek();
      Tuple t;
      if (ts_.accept("(")) {
        if (!ts_.is(")")) {
          t.push_back(static_cast<Element>(ts_.number()));
          while (ts_.accept(",")) t.push_back(static_cast<Element>(ts_.number()));
        }
        ts_.expect(")");
      } else {
        t.push_back(static_cast<Element>(ts_.number()));
      }
      if (t.size() != arity)
        ts_.fail_at(at, "tuple of length " + std::to_string(t.size()) + " for relation of arity " +
                            std::to_string(arity));
      for (Element e : t)
        if (e >= a.size()) ts_.fail_at(at, "element " + std::to_string(e) + " out of range");
      a.set_holds(sym, t, true);
    };
    if (!ts_.is("}")) {
      one();
      while (ts_.accept(",")) one();
    }
    ts_.expect("}");
  }

  void formula() {
    ts_.expect("formula");
    const Token at = ts_.peek();
    std::string name = ts_.ident("formula name");
    if (ws_.formulas.count(name)) ts_.fail_at(at, "duplicate formula '" + name + "'");
    ts_.expect(":");
    const Token sig_at = ts_.peek();
    std::string sig_name = ts_.ident("signature name");
    auto sit = ws_.signatures.find(sig_name);
    if (sit == ws_.signatures.end()) ts_.fail_at(sig_at, "unknown signature '" + sig_name + "'");
    ts_.expect("=");
    HornFormula phi = ClauseParser(ts_, sit->second).parse();
    ts_.accept(";");
    ws_.formulas.emplace(name, std::move(phi));
    ws_.formula_order.push_back(name);
  }

  TokenStream ts_;
  Workspace& ws_;
};

}  // namespace detail

/// Parses a workbench file into `ws` (declarations accumulate).
inline void parse_into(Workspace& ws, std::string_view text) {
  detail::WorkspaceParser(text, ws).parse();
}

inline Workspace parse_workspace(std::string_view text) {
  Workspace ws;
  parse_into(ws, text);
  return ws;
}

}  // namespace fmw

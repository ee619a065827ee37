#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fmw/error.hpp"

namespace fmw {

enum class SymbolKind { function, relation };

/// A function or relation symbol. Constants are functions of arity 0.
struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::function;
  std::size_t arity = 0;

  bool is_function() const { return kind == SymbolKind::function; }
  bool is_relation() const { return kind == SymbolKind::relation; }
  bool is_constant() const { return is_function() && arity == 0; }

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// Finite first-order signature. Symbols keep their declaration order and are
/// addressed by index everywhere else in the library.
///
/// A signature produced by expand_signature() carries one extra constant per
/// element of some universe, appended after the base symbols, so base symbol
/// indices stay valid in the expansion and every structure over the expansion
/// can be read as a structure over the base.
class Signature {
 public:
  Signature() = default;
  explicit Signature(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  std::size_t add(Symbol s) {
    if (is_expanded()) throw signature_error("cannot add symbols to an expanded signature");
    if (s.name.empty()) throw signature_error("empty symbol name");
    if (index_.count(s.name)) throw signature_error("duplicate symbol '" + s.name + "'");
    index_.emplace(s.name, symbols_.size());
    symbols_.push_back(std::move(s));
    return symbols_.size() - 1;
  }
  std::size_t add_function(std::string name, std::size_t arity) {
    return add(Symbol{std::move(name), SymbolKind::function, arity});
  }
  std::size_t add_relation(std::string name, std::size_t arity) {
    return add(Symbol{std::move(name), SymbolKind::relation, arity});
  }

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  const Symbol& operator[](std::size_t i) const { return symbols_.at(i); }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw input_error("unknown symbol '" + std::string(name) + "'");
  }

  bool is_expanded() const { return base_size_.has_value(); }
  /// Number of symbols that belong to the base signature.
  std::size_t base_size() const { return base_size_.value_or(symbols_.size()); }
  /// Number of element constants added by expansion.
  std::size_t expansion_size() const { return symbols_.size() - base_size(); }
  std::size_t element_constant(std::size_t element) const {
    if (element >= expansion_size()) throw input_error("element has no constant in this expansion");
    return base_size() + element;
  }
  std::optional<std::size_t> element_of(std::size_t symbol) const {
    if (!is_expanded() || symbol < base_size() || symbol >= symbols_.size()) return std::nullopt;
    return symbol - base_size();
  }

  /// The base signature (the signature itself when not expanded).
  Signature base() const {
    Signature b(base_name_.value_or(name_));
    for (std::size_t i = 0; i < base_size(); ++i) b.add(symbols_[i]);
    return b;
  }

  /// True when `other`'s symbols are a prefix of this signature's symbols.
  bool extends(const Signature& other) const {
    if (other.size() > size()) return false;
    for (std::size_t i = 0; i < other.size(); ++i)
      if (!(symbols_[i] == other.symbols_[i])) return false;
    return true;
  }

  std::vector<std::size_t> functions() const { return select(SymbolKind::function); }
  std::vector<std::size_t> relations() const { return select(SymbolKind::relation); }
  bool has_constant() const {
    for (const auto& s : symbols_)
      if (s.is_constant()) return true;
    return false;
  }

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.symbols_ == b.symbols_ && a.base_size_ == b.base_size_;
  }

 private:
  friend Signature expand_signature(const Signature&, std::size_t, std::string_view);

  std::vector<std::size_t> select(SymbolKind k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < symbols_.size(); ++i)
      if (symbols_[i].kind == k) out.push_back(i);
    return out;
  }

  std::string name_;
  std::vector<Symbol> symbols_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::optional<std::size_t> base_size_;
  std::optional<std::string> base_name_;
};

using SigPtr = std::shared_ptr<const Signature>;

inline SigPtr make_sig(Signature s) { return std::make_shared<const Signature>(std::move(s)); }

inline bool same_signature(const SigPtr& a, const SigPtr& b) { return a == b || *a == *b; }

/// Default prefix of the element constants of Σ(A): "ȧ" in UTF-8.
inline constexpr std::string_view default_constant_hint = "\xC8\xA7";

/// Σ(A): appends one fresh constant per element 0..universe_size-1.
/// Names are hint+index; a name that collides with an existing symbol gets
/// primes appended until it is fresh.
inline Signature expand_signature(const Signature& sig, std::size_t universe_size,
                                  std::string_view hint = default_constant_hint) {
  if (universe_size == 0) throw input_error("expansion needs a nonempty universe");
  Signature out(sig.name() + "_expanded");
  for (const auto& s : sig.symbols()) out.add(s);
  out.base_name_ = sig.name();
  for (std::size_t a = 0; a < universe_size; ++a) {
    std::string name = std::string(hint) + std::to_string(a);
    while (out.find(name)) name += '\'';
    out.add_function(name, 0);
  }
  out.base_size_ = sig.size();
  return out;
}

}  // namespace fmw

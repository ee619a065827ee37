#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmw/error.hpp"

namespace fmw {

/// Subset of an index set {0..n-1}, n ≤ 64, as a bitmask.
using IndexSet = std::uint64_t;

inline constexpr std::size_t max_index_bits = 64;

inline IndexSet full_index_set(std::size_t n) {
  return n >= 64 ? ~IndexSet{0} : (IndexSet{1} << n) - 1;
}

/// "{0,2}" style rendering.
inline std::string format_index_set(IndexSet s) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < 64; ++i) {
    if (!(s >> i & 1)) continue;
    if (!first) out += ',';
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

/// Parses a generator list such as "{0,1};{1,2}". An empty string or "{}"
/// entries denote the empty set.
inline std::vector<IndexSet> parse_index_sets(std::string_view text, std::size_t n) {
  std::vector<IndexSet> out;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  skip();
  while (i < text.size()) {
    if (text[i] != '{') throw input_error("index set must start with '{' in \"" + std::string(text) + "\"");
    ++i;
    IndexSet s = 0;
    skip();
    while (i < text.size() && text[i] != '}') {
      std::size_t v = 0;
      bool digits = false;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
        v = v * 10 + static_cast<std::size_t>(text[i] - '0');
        digits = true;
        ++i;
        if (v >= 1000) break;
      }
      if (!digits) throw input_error("expected an index in \"" + std::string(text) + "\"");
      if (v >= n) throw input_error("index " + std::to_string(v) + " outside {0.." + std::to_string(n - 1) + "}");
      s |= IndexSet{1} << v;
      skip();
      if (i < text.size() && text[i] == ',') ++i;
      skip();
    }
    if (i >= text.size()) throw input_error("unterminated index set in \"" + std::string(text) + "\"");
    ++i;
    out.push_back(s);
    skip();
    if (i < text.size() && text[i] == ';') ++i;
    skip();
  }
  return out;
}

/// Returns a description of the first violated filter law, if any:
/// full set present, proper, upward closed, closed under intersection.
inline std::optional<std::string> filter_law_violation(std::size_t n, std::span<const IndexSet> members) {
  const IndexSet full = full_index_set(n);
  auto has = [&](IndexSet s) { return std::binary_search(members.begin(), members.end(), s); };
  if (!std::is_sorted(members.begin(), members.end())) return "members not sorted";
  for (IndexSet m : members)
    if (m & ~full) return "member " + format_index_set(m) + " outside the index set";
  if (!has(full)) return "full set missing";
  if (has(0)) return "empty set present (not proper)";
  for (IndexSet a : members)
    for (IndexSet b : members)
      if (!has(a & b)) return "not closed under intersection: " + format_index_set(a) + " and " + format_index_set(b);
  for (IndexSet a : members) {
    // every one-element extension of a member must be a member
    for (std::size_t i = 0; i < n; ++i)
      if (!has(a | (IndexSet{1} << i))) return "not upward closed above " + format_index_set(a);
  }
  return std::nullopt;
}

/// Proper filter over a finite index set, stored extensionally as the sorted
/// list of its members.
class FilterOnFiniteSet {
 public:
  /// Validates the filter laws.
  static FilterOnFiniteSet from_members(std::size_t n, std::vector<IndexSet> members) {
    if (n == 0 || n > max_index_bits) throw input_error("index size must be in 1..64");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (auto v = filter_law_violation(n, members)) throw input_error("not a proper filter: " + *v);
    return FilterOnFiniteSet(n, std::move(members));
  }

  /// All supersets of a nonempty generator set.
  static FilterOnFiniteSet principal(std::size_t n, IndexSet generator, const Limits& limits = Limits{}) {
    if (n == 0 || n > max_index_bits) throw input_error("index size must be in 1..64");
    const IndexSet full = full_index_set(n);
    if (generator & ~full) throw input_error("generator outside the index set");
    if (generator == 0) throw input_error("the filter generated by the empty set is not proper");
    const IndexSet free = full & ~generator;
    const std::size_t free_bits = static_cast<std::size_t>(std::popcount(free));
    if (free_bits >= 63 || (std::uint64_t{1} << free_bits) > limits.max_filter_members)
      throw resource_error("filter would have 2^" + std::to_string(free_bits) + " members (cap " +
                           std::to_string(limits.max_filter_members) + ")");
    std::vector<IndexSet> members;
    members.reserve(std::size_t{1} << free_bits);
    // enumerate subsets of `free`
    IndexSet sub = 0;
    do {
      members.push_back(generator | sub);
      sub = (sub - free) & free;
    } while (sub != 0);
    std::sort(members.begin(), members.end());
    return FilterOnFiniteSet(n, std::move(members));
  }

  /// {I}.
  static FilterOnFiniteSet trivial(std::size_t n) {
    if (n == 0 || n > max_index_bits) throw input_error("index size must be in 1..64");
    return FilterOnFiniteSet(n, {full_index_set(n)});
  }

  std::size_t index_size() const { return n_; }
  const std::vector<IndexSet>& members() const { return members_; }
  IndexSet full() const { return full_index_set(n_); }
  bool contains(IndexSet s) const { return std::binary_search(members_.begin(), members_.end(), s & full()); }

  /// Intersection of all members; itself a member, and every member contains
  /// it, because the index set is finite.
  IndexSet least() const {
    IndexSet g = full();
    for (IndexSet m : members_) g &= m;
    return g;
  }

  friend bool operator==(const FilterOnFiniteSet&, const FilterOnFiniteSet&) = default;

 private:
  FilterOnFiniteSet(std::size_t n, std::vector<IndexSet> members) : n_(n), members_(std::move(members)) {}

  std::size_t n_;
  std::vector<IndexSet> members_;
};

/// The generators lack the finite intersection property.
class fip_violation : public input_error {
 public:
  explicit fip_violation(std::vector<IndexSet> subfamily)
      : input_error(describe(subfamily)), subfamily_(std::move(subfamily)) {}
  const std::vector<IndexSet>& subfamily() const { return subfamily_; }

 private:
  static std::string describe(const std::vector<IndexSet>& f) {
    std::string out = "FIP violation: ";
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += "\xE2\x88\xA9";  // ∩
      out += format_index_set(f[i]);
    }
    return out + "=\xE2\x88\x85";  // ∅
  }
  std::vector<IndexSet> subfamily_;
};

/// Filter generated by `gens`: all supersets of intersections of finite
/// subfamilies (the empty subfamily contributes the full set). Throws
/// fip_violation with a minimal subfamily whose intersection is empty.
inline FilterOnFiniteSet filter_from_generators(std::size_t n, std::span<const IndexSet> gens,
                                                const Limits& limits = Limits{}) {
  if (n == 0 || n > max_index_bits) throw input_error("index size must be in 1..64");
  if (n > limits.max_index)
    throw resource_error("index set of size " + std::to_string(n) + " exceeds cap " + std::to_string(limits.max_index));
  const IndexSet full = full_index_set(n);
  IndexSet meet = full;
  std::vector<IndexSet> used;
  for (IndexSet g : gens) {
    if (g & ~full) throw input_error("generator " + format_index_set(g) + " outside the index set");
    meet &= g;
    used.push_back(g);
    if (meet == 0) {
      // shrink to a minimal subfamily that still has empty intersection
      for (std::size_t i = used.size(); i-- > 0;) {
        IndexSet rest = full;
        for (std::size_t j = 0; j < used.size(); ++j)
          if (j != i) rest &= used[j];
        if (rest == 0 && used.size() > 1) used.erase(used.begin() + static_cast<std::ptrdiff_t>(i));
      }
      throw fip_violation(used);
    }
  }
  return FilterOnFiniteSet::principal(n, meet, limits);
}

/// Every proper filter over {0..n-1}. Over a finite set these are exactly
/// the principal filters of nonempty subsets; ordered by generator.
inline std::vector<FilterOnFiniteSet> all_proper_filters(std::size_t n, const Limits& limits = Limits{}) {
  std::vector<FilterOnFiniteSet> out;
  for (IndexSet g = 1; g <= full_index_set(n) && g != 0; ++g) {
    out.push_back(FilterOnFiniteSet::principal(n, g, limits));
    if (g == full_index_set(n)) break;
  }
  return out;
}

}  // namespace fmw

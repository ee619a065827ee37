#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmw/constructions.hpp"
#include "fmw/enumerate.hpp"
#include "fmw/error.hpp"
#include "fmw/filter.hpp"
#include "fmw/formula.hpp"
#include "fmw/structure.hpp"

namespace fmw {

struct LosViolation {
  /// 1: an atom whose carrier truth disagrees with filter membership.
  /// 2: a Horn clause true on a filter set of indices but false in the carrier.
  int clause = 1;
  std::string formula;
  /// Carrier elements for the pool variables x, y, z, ...
  Assignment assignment;
  IndexSet indices = 0;
  bool carrier_truth = false;

  std::string to_string() const {
    std::string out = "(" + std::to_string(clause) + ") " + formula + " at [";
    for (std::size_t i = 0; i < assignment.size(); ++i) out += (i ? "," : "") + std::to_string(assignment[i]);
    out += "]: indices " + format_index_set(indices) + ", carrier " + (carrier_truth ? "true" : "false");
    return out;
  }
};

struct LosReport {
  std::size_t atoms = 0;
  std::uint64_t assignments = 0;
  /// Distinct per-assignment patterns of (index set, carrier truth) pairs;
  /// every bounded clause instance is decided by one of them.
  std::uint64_t patterns = 0;
  std::uint64_t atomic_violations = 0;
  std::uint64_t horn_violations = 0;
  std::vector<LosViolation> violations;  // first few of each kind

  bool ok() const { return atomic_violations == 0 && horn_violations == 0; }
};

struct LosOptions {
  bool check_atomic = true;
  bool check_horn = true;
  std::size_t keep = 8;
};

/// Audits both clauses of the Łoś-type lemma on a materialized reduced
/// product, for all atoms over the bounded variables and term depth and
/// every assignment of carrier elements:
///   (1) carrier ⊨ α[ā/F]  ⇔  {i : A_i ⊨ α[a_i]} ∈ F;
///   (2) {i : A_i ⊨ φ[a_i]} ∈ F  ⇒  carrier ⊨ φ[ā/F], for every basic Horn
///       clause φ with at most max_negatives negatives.
/// Factor truth is read from per-factor truth tables at the components of
/// each class representative; carrier truth from the carrier's own tables.
/// A clause's index set is ∪ ~m(negatives) ∪ m(positive) and its carrier
/// truth is determined by the atoms' carrier truths, so (2) is decided by
/// the set of distinct (m, truth) pairs occurring at an assignment; each
/// distinct set is checked against every combination once.
inline LosReport los_audit(const ReducedProductStructure& rp, const EnumerationBounds& b,
                           const Limits& limits = Limits{}, const LosOptions& opt = {}) {
  const FiniteStructure& carrier = rp.carrier;
  const std::size_t n = rp.factors.size();
  const FilterOnFiniteSet& f = rp.filter;
  if (n == 0 || n > limits.max_index) throw resource_error("index set outside 1.." + std::to_string(limits.max_index));
  if (rp.class_reps.size() != carrier.size()) throw input_error("class representatives do not match the carrier");
  AtomPool pool(carrier.sig_ptr(), b.max_vars, b.max_term_depth, limits);
  const std::size_t v = pool.vars();
  const std::uint64_t total = checked_pow(carrier.size(), v);
  if (total > limits.max_assignments)
    throw resource_error("audit needs " + std::to_string(total) + " assignments (cap " +
                         std::to_string(limits.max_assignments) + ")");

  std::vector<std::uint8_t> in_f(std::size_t{1} << n);
  for (IndexSet m = 0; m < in_f.size(); ++m) in_f[m] = f.contains(m);
  std::vector<TruthTable> local;
  for (const auto& a : rp.factors) local.emplace_back(pool, a, limits);

  LosReport report;
  report.atoms = pool.size();
  const std::size_t atoms = pool.size();
  const std::size_t keys = std::size_t{2} << n;
  std::set<std::vector<std::uint64_t>> seen;
  std::vector<std::uint64_t> pattern((keys + 63) / 64);
  std::vector<std::size_t> witness(keys);  // an atom carrying each key
  std::vector<Element> scratch;
  std::vector<std::uint64_t> carrier_bits(pool.words());
  std::vector<const std::uint64_t*> rows(n);
  const std::size_t words = pool.words();
  const IndexSet least = f.least();
  std::vector<std::uint64_t> tail(words, ~std::uint64_t{0});
  if (atoms % 64) tail.back() = (std::uint64_t{1} << (atoms % 64)) - 1;
  std::vector<std::uint64_t> scratch_sets(2 * n * words);  // one pair per level
  std::vector<std::uint64_t> top(2 * words);
  std::vector<std::string> names;
  for (std::size_t x = 0; x < v; ++x) names.push_back(variable_name(x));

  auto record = [&](LosViolation viol) {
    if (report.violations.size() < opt.keep * 2) report.violations.push_back(std::move(viol));
  };

  for_each_tuple(carrier.size(), v, [&](std::span<const Element> asg) {
    ++report.assignments;
    pool.truth_bits(carrier, asg, scratch, carrier_bits.data());
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t r = 0;
      for (std::size_t j = 0; j < v; ++j) r = r * rp.factors[i].size() + rp.class_reps[asg[j]][i];
      rows[i] = local[i].row(r);
    }
    // every filter here is principal at G, so {i : ...} ∈ F iff it covers G,
    // and clause (1) compares the carrier word with the AND of the G rows
    if (opt.check_atomic)
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t expect = tail[w];
        for (std::size_t i = 0; i < n; ++i)
          if (least >> i & 1) expect &= rows[i][w];
        for (std::uint64_t diff = (carrier_bits[w] ^ expect) & tail[w]; diff; diff &= diff - 1) {
          const auto id = static_cast<AtomPool::Id>(w * 64 + static_cast<std::size_t>(std::countr_zero(diff)));
          IndexSet m = 0;
          for (std::size_t i = 0; i < n; ++i) m |= static_cast<IndexSet>(TruthTable::test(rows[i], id)) << i;
          ++report.atomic_violations;
          record({1, to_string(pool.atom(id), pool.signature(), names), Assignment(asg.begin(), asg.end()), m,
                  TruthTable::test(carrier_bits.data(), id)});
        }
      }
    if (!opt.check_horn) return;
    // split the atoms by carrier truth, then by truth in each factor; the
    // nonempty leaves are the (m, truth) keys present at this assignment
    std::fill(pattern.begin(), pattern.end(), 0);
    auto split = [&](auto&& self, std::size_t level, std::size_t key, const std::uint64_t* set) -> void {
      bool any = false;
      for (std::size_t w = 0; w < words && !any; ++w) any = set[w] != 0;
      if (!any) return;
      if (level == n) {
        pattern[key >> 6] |= std::uint64_t{1} << (key & 63);
        std::size_t w = 0;
        while (set[w] == 0) ++w;
        witness[key] = w * 64 + static_cast<std::size_t>(std::countr_zero(set[w]));
        return;
      }
      std::uint64_t* on = scratch_sets.data() + (2 * level) * words;
      std::uint64_t* off = on + words;
      for (std::size_t w = 0; w < words; ++w) {
        on[w] = set[w] & rows[level][w];
        off[w] = set[w] & ~rows[level][w];
      }
      self(self, level + 1, key | (std::size_t{1} << (level + 1)), on);
      self(self, level + 1, key, off);
    };
    for (std::size_t w = 0; w < words; ++w) {
      top[w] = carrier_bits[w] & tail[w];
      top[words + w] = ~carrier_bits[w] & tail[w];
    }
    split(split, 0, 1, top.data());
    split(split, 0, 0, top.data() + words);
    if (!seen.insert(pattern).second) return;
    ++report.patterns;
    std::vector<std::size_t> present;
    for (std::size_t k = 0; k < keys; ++k)
      if (pattern[k >> 6] >> (k & 63) & 1) present.push_back(k);
    std::vector<std::size_t> premises;  // keys with carrier truth 1
    std::vector<std::size_t> conclusions;  // keys with carrier truth 0
    for (std::size_t k : present) (k & 1 ? premises : conclusions).push_back(k);
    const IndexSet full = f.full();
    // a violation needs every negative true and the positive false in the carrier
    auto check = [&](std::span<const std::size_t> negs, std::optional<std::size_t> pos) {
      IndexSet m = pos ? static_cast<IndexSet>(*pos >> 1) : 0;
      for (std::size_t k : negs) m |= ~static_cast<IndexSet>(k >> 1) & full;
      if (!in_f[m]) return;
      ++report.horn_violations;
      std::vector<AtomPool::Id> ids;
      for (std::size_t k : negs) ids.push_back(static_cast<AtomPool::Id>(witness[k]));
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      const AtomPool::Id p = pos ? static_cast<AtomPool::Id>(witness[*pos]) : AtomPool::none;
      if (ids.empty() && p == AtomPool::none) return;
      record({2, fmw::to_string(pool.formula(ids, p)), Assignment(asg.begin(), asg.end()), m, false});
    };
    std::vector<std::size_t> chosen;
    auto rec = [&](auto&& self, std::size_t from) -> void {
      if (!chosen.empty()) check(chosen, std::nullopt);
      for (std::size_t c : conclusions) check(chosen, c);
      if (chosen.size() == b.max_negatives) return;
      for (std::size_t i = from; i < premises.size(); ++i) {
        chosen.push_back(premises[i]);
        self(self, i);
        chosen.pop_back();
      }
    };
    rec(rec, 0);
  });
  return report;
}

inline LosReport los_audit(std::vector<FiniteStructure> factors, FilterOnFiniteSet filter, const EnumerationBounds& b,
                           const Limits& limits = Limits{}, const LosOptions& opt = {}) {
  return los_audit(reduced_product(std::move(factors), std::move(filter), limits), b, limits, opt);
}

}  // namespace fmw

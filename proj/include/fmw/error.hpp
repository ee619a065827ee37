#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fmw {

/// Base of every exception thrown by the workbench.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: DSL syntax, unknown names, arity mismatches, bad flags.
class input_error : public error {
 public:
  using error::error;
};

class parse_error : public input_error {
 public:
  parse_error(const std::string& what, std::size_t line, std::size_t column)
      : input_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Two objects that must share a signature do not.
class signature_error : public input_error {
 public:
  using input_error::input_error;
};

/// A configured resource cap would be exceeded.
class resource_error : public error {
 public:
  using error::error;
};

/// Resource caps shared by every construction and search.
struct Limits {
  std::uint64_t max_assignments = 1'000'000;
  std::uint64_t max_product = 4096;
  std::uint64_t max_search = 10'000'000;
  std::size_t max_index = 16;
  std::uint64_t max_filter_members = std::uint64_t{1} << 16;
  std::uint64_t max_formulas = 2'000'000;
  std::uint64_t max_table = std::uint64_t{1} << 24;
};

/// Saturating product used for cap checks.
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

inline std::uint64_t checked_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

}  // namespace fmw

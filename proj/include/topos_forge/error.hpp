#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace topos {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments have the wrong shape for the requested construction
/// (non-parallel pair, non-cospan, mismatched ambients, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of a theorem-level check fails on the given input.
class HypothesisError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// An enumeration exceeded its configured cap.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t cap)
      : Error(what + " (cap " + std::to_string(cap) + ")"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// Lexical or syntax error in formula or workspace text.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Ill-sorted term or formula; the message names the offending symbol.
class SortError : public Error {
 public:
  SortError(const std::string& msg, std::string symbol) : Error(msg), symbol_(std::move(symbol)) {}
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

/// A context is not suitable for a term or formula, or does not match
/// the codomain of a generalized element.
class ContextError : public Error {
 public:
  using Error::Error;
};

/// Violations found by a validator. Violations are data, not errors.
struct Report {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
  void add(std::string v) { violations.push_back(std::move(v)); }
  void merge(const Report& other, const std::string& prefix = {}) {
    for (const auto& v : other.violations) violations.push_back(prefix + v);
  }
};

}  // namespace topos

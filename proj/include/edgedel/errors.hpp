#pragma once

#include <stdexcept>
#include <string>

namespace edgedel {

/// Malformed input text (network file, evidence file, plan file).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A structural or numeric invariant of a network/factor/evidence is violated.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// The given evidence has probability zero under the queried network.
/// Signaled distinctly so callers never see it as a NaN or a division by zero.
class ZeroEvidenceError : public std::runtime_error {
 public:
  explicit ZeroEvidenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A table or enumeration would exceed its configured size cap
/// (oracle scale guard, bucket-table overflow guard).
class ScaleError : public std::runtime_error {
 public:
  explicit ScaleError(const std::string& what) : std::runtime_error(what) {}
};

/// Edge selection cannot satisfy the requested size threshold.
class PlanError : public std::runtime_error {
 public:
  explicit PlanError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace edgedel

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "edgedel/types.hpp"

namespace edgedel {

/// Nonnegative dense table over an ordered variable scope.
/// Row-major layout, the LAST scope variable varies fastest.
struct Factor {
  std::vector<VarId> scope;
  std::vector<double> table;

  Factor() = default;
  Factor(std::vector<VarId> s, std::vector<double> t)
      : scope(std::move(s)), table(std::move(t)) {}

  /// Scalar factor with value 1 (multiplicative identity).
  static Factor unit() { return Factor({}, {1.0}); }

  bool has(VarId v) const {
    return std::find(scope.begin(), scope.end(), v) != scope.end();
  }

  bool scalar() const { return scope.empty(); }
  double value() const { return table[0]; }
};

/// Number of table entries implied by a scope under the given cardinalities.
std::size_t table_size(std::span<const VarId> scope, const std::vector<int>& cards);

/// Per-scope-position strides for the canonical layout (last fastest).
std::vector<std::size_t> strides(std::span<const VarId> scope,
                                 const std::vector<int>& cards);

}  // namespace edgedel

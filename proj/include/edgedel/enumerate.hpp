#pragma once

#include <cstdint>
#include <vector>

#include "edgedel/network.hpp"
#include "edgedel/types.hpp"

namespace edgedel {

/// Full posterior over the worlds consistent with some evidence, produced by
/// exhaustive enumeration. Worlds are indexed over the free (non-evidence)
/// variables in ascending id order, row-major, last variable fastest.
struct JointDistribution {
  std::vector<VarId> free_vars;
  std::vector<double> posterior;  // sums to 1
  double pe = 0.0;                // Pr(e)
  double log_pe = 0.0;            // ln Pr(e)

  /// Posterior marginal of one variable; point mass for evidence variables.
  std::vector<double> marginal(VarId v, const BayesianNetwork& net,
                               const Evidence& e) const;
};

inline constexpr std::uint64_t kDefaultEnumerationGuard = 1ull << 24;

/// Materializes Pr(.|e) and Pr(e) by walking every consistent world.
/// Throws ScaleError when the product of all cardinalities exceeds the guard
/// and ZeroEvidenceError when Pr(e) = 0.
JointDistribution joint_enumerate(const BayesianNetwork& net, const Evidence& e,
                                  std::uint64_t guard = kDefaultEnumerationGuard);

}  // namespace edgedel

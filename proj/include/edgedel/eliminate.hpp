#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgedel/kernels.hpp"
#include "edgedel/network.hpp"
#include "edgedel/order.hpp"

namespace edgedel {

/// Posterior marginals for every variable plus the evidence probability.
/// Evidence variables carry point masses on their observed state.
struct MarginalSet {
  std::vector<std::vector<double>> marginals;
  double log_pe = 0.0;
};

struct EngineOptions {
  /// Abort with ScaleError when a bucket table would exceed this many
  /// entries: the network is too hard for exact inference at this order.
  std::uint64_t max_table_entries = 1ull << 28;
  KernelConfig kernels;
};

/// Bucket elimination along `order`, with a downward pass over the bucket
/// tree so every variable's posterior comes out of one run. Pr(e) is
/// accumulated in log space with one max-entry rescaling per bucket, so
/// evidence probabilities far below double range stay representable.
MarginalSet eliminate(const BayesianNetwork& net, const Evidence& e,
                      const EliminationOrder& order,
                      const EngineOptions& opts = {});

/// Joint posterior Pr(targets | e) as a factor over `targets` in the given
/// order. Evidence variables among the targets become point-mass axes.
Factor joint_marginal(const BayesianNetwork& net, const Evidence& e,
                      std::span<const VarId> targets,
                      const EliminationOrder& order,
                      const EngineOptions& opts = {});

}  // namespace edgedel

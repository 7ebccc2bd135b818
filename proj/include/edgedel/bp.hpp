#pragma once

#include <cstdint>
#include <vector>

#include "edgedel/network.hpp"
#include "edgedel/types.hpp"

namespace edgedel {

struct BPOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
  double damping = 0.0;  // 0 = plain sum-product updates
  bool parallel = true;
};

struct BPResult {
  // Per-variable marginals; evidence variables are point masses.
  std::vector<std::vector<double>> marginals;
  int iterations = 0;
  bool converged = false;
  // Largest absolute marginal change at the final iteration.
  double max_residual = 0.0;
};

// Loopy belief propagation on the CPT factor graph, flooding schedule.
// One iteration updates every message once; convergence is declared when
// every marginal coordinate moves less than `tolerance` between iterations.
// Non-convergence is reported, never thrown.
BPResult loopy_bp(const BayesianNetwork& net, const Evidence& e,
                  const BPOptions& opts = {});

}  // namespace edgedel

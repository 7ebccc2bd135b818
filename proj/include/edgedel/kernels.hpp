#pragma once

#include <span>
#include <vector>

#include "edgedel/factor.hpp"
#include "edgedel/types.hpp"

namespace edgedel {

/// Controls the OpenMP kernels. Tables smaller than `grain` entries run the
/// serial path; larger ones are split over threads. Every output entry is
/// computed by exactly one thread with a fixed per-entry operation order, so
/// parallel results are bit-identical to the serial reference.
struct KernelConfig {
  bool parallel = true;
  std::size_t grain = 1u << 14;
};

/// Pointwise product. Result scope is f's scope followed by the variables of
/// g not already in f, in g's order.
Factor multiply(const Factor& f, const Factor& g, const std::vector<int>& cards,
                const KernelConfig& cfg = {});

/// Marginalizes variable v out of f. v must be in f's scope.
Factor sum_out(const Factor& f, VarId v, const std::vector<int>& cards,
               const KernelConfig& cfg = {});

/// Drops evidence variables from the scope, keeping the consistent slices.
Factor restrict(const Factor& f, const Evidence& e, const std::vector<int>& cards);

/// Permutes f's axes into the requested scope order (same variable set).
Factor reorder(const Factor& f, std::span<const VarId> new_scope,
               const std::vector<int>& cards);

namespace ref {

// Serial reference implementations, kept for correctness tests and as the
// baseline in the kernel benchmark.
Factor multiply(const Factor& f, const Factor& g, const std::vector<int>& cards);
Factor sum_out(const Factor& f, VarId v, const std::vector<int>& cards);

}  // namespace ref

}  // namespace edgedel

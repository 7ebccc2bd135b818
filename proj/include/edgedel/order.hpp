#pragma once

#include <string>
#include <vector>

#include "edgedel/network.hpp"

namespace edgedel {

enum class OrderHeuristic { MinFill, MinSize, Explicit };

struct EliminationOrder {
  std::vector<VarId> order;  // elimination sequence, a permutation of all ids
  OrderHeuristic heuristic = OrderHeuristic::MinFill;
};

/// Greedy elimination order on the moral graph. MinFill picks the variable
/// adding the fewest fill edges, MinSize the one with the smallest
/// neighborhood table; ties go to the lowest variable id.
EliminationOrder compute_order(const BayesianNetwork& net, OrderHeuristic h);

/// Wraps a caller-supplied sequence; throws unless it is a permutation of
/// all variable ids.
EliminationOrder explicit_order(const BayesianNetwork& net,
                                std::vector<VarId> order);

/// Bucket sizes induced by running elimination symbolically (scopes only)
/// over an arbitrary set of factor scopes.
struct SymbolicBuckets {
  // Indexed by order position. Empty buckets hold entries = 0, log2 = 0.
  std::vector<double> entries;
  std::vector<double> log2_entries;
  // Input scope indices assigned to each bucket at processing time.
  std::vector<std::vector<int>> assigned;
  double normalized_max = 0.0;  // log2 entries of the largest bucket
};

SymbolicBuckets simulate_buckets(const std::vector<std::vector<VarId>>& scopes,
                                 const std::vector<int>& cards,
                                 const std::vector<VarId>& order);

/// Bucket-table sizes induced by eliminating the network's CPTs along the
/// order. A function of structure and order only; CPT values never matter.
struct ClusterStats {
  std::vector<double> bucket_entries;  // per order position
  double normalized_max = 0.0;         // log2 of the largest bucket table
};

ClusterStats cluster_stats(const BayesianNetwork& net,
                           const EliminationOrder& order);

std::string to_string(OrderHeuristic h);

}  // namespace edgedel

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "edgedel/eliminate.hpp"
#include "edgedel/network.hpp"
#include "edgedel/order.hpp"
#include "edgedel/types.hpp"

namespace edgedel {

struct EdgeRef {
  VarId parent = -1;
  VarId child = -1;

  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

/// A set of edges to delete plus, once known, the distribution over each
/// parent's states that replaces it in the child's CPT rewrite.
struct DeletionPlan {
  std::vector<EdgeRef> edges;
  // Parallel to edges; an empty inner vector means not yet filled.
  std::vector<std::vector<double>> replacements;
  bool at_most_one_per_child = true;
};

struct FixedPointTrace {
  int iterations = 0;
  bool converged = false;
  std::vector<std::vector<double>> final_replacements;
  // Largest replacement coordinate change at each fixed-point comparison.
  std::vector<double> max_changes;
};

/// Removes parent Y from child X and rewrites X's CPT as the dist-weighted
/// mixture of its Y-slices. Every other CPT is untouched.
BayesianNetwork delete_edge(const BayesianNetwork& net, EdgeRef edge,
                            std::span<const double> dist);

/// The same rewrite expressed structurally: a fresh root with CPT = dist is
/// substituted for the parent in the child's parent list. Summing the fresh
/// root out reproduces delete_edge's CPT; kept as a test witness for that
/// equivalence.
BayesianNetwork auxiliary_root_form(const BayesianNetwork& net, EdgeRef edge,
                                    std::span<const double> dist);

/// Applies every plan edge in order via delete_edge. All replacements must
/// be filled, nonnegative, and sum to 1 within 1e-9.
BayesianNetwork apply_plan(const BayesianNetwork& net,
                           const DeletionPlan& plan);

/// Walks buckets along the order; whenever a bucket's table would exceed
/// 2^threshold entries, greedily deletes edges among the CPTs assigned to
/// that bucket (largest bucket-entry reduction first, ties by smaller parent
/// cardinality then lowest (parent, child) pair) until it fits. Replacements
/// are left unset. Throws PlanError naming the blocking bucket when no
/// deletable edge can fit it.
DeletionPlan select_edges(const BayesianNetwork& net,
                          const EliminationOrder& order,
                          double threshold_log2_entries,
                          bool at_most_one_per_child = true);

/// Fills the plan's replacements with the true posteriors Pr(parent | e)
/// computed in the original network, then applies the plan. Requires the
/// original network to be exactly solvable under `order`.
BayesianNetwork exact_posterior_deletion(const BayesianNetwork& net,
                                         const Evidence& e, DeletionPlan& plan,
                                         const EliminationOrder& order,
                                         const EngineOptions& opts = {});

struct FixedPointOptions {
  double epsilon = 1e-8;
  int max_iterations = 100;
  // Order used on the deleted network; computed by this heuristic unless an
  // explicit order is supplied.
  OrderHeuristic heuristic = OrderHeuristic::MinFill;
  const EliminationOrder* order = nullptr;
  EngineOptions engine;
};

/// Fixed-point iteration of the deletion parameters: replacements start
/// uniform; each round runs exact inference on the current approximate
/// network and rebuilds the deleted CPTs from the parents' new posteriors.
/// Converged at iteration t means the posteriors of round t+1 matched those
/// of round t in every coordinate within epsilon; the returned network is
/// the one built from round t's posteriors, so one further round changes no
/// replacement coordinate by more than epsilon. At most max_iterations
/// inference rounds are spent. Requires the DELETED network to be exactly
/// solvable; the original may be intractable.
std::pair<BayesianNetwork, FixedPointTrace> fixed_point_deletion(
    const BayesianNetwork& net, const Evidence& e, const DeletionPlan& plan,
    const FixedPointOptions& opts = {});

/// Evidence-insensitive arc removal for comparison: each plan child's CPT
/// becomes Pr(child | remaining parents), computed in the original network
/// with no evidence. Replacement distributions play no role.
BayesianNetwork prior_arc_removal(const BayesianNetwork& net,
                                  const DeletionPlan& plan,
                                  const EliminationOrder& order,
                                  const EngineOptions& opts = {});

}  // namespace edgedel

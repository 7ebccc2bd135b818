#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgedel/edge_delete.hpp"
#include "edgedel/eliminate.hpp"
#include "edgedel/network.hpp"

namespace edgedel {

/// KL(p, q) in nats. Terms with p = 0 contribute nothing; p > 0 where q = 0
/// yields +infinity as a distinguished value, never an FP exception.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Shannon entropy in nats, with 0 ln 0 = 0.
double entropy(std::span<const double> dist);

/// True iff every CPT entry is 0 or 1 within 1e-12 and, for each fixed
/// configuration of the other parents and each child state, at most one
/// parent state maps to that child state with probability 1. Parity CPTs
/// pass; an OR gate fails (two parent states share an outcome).
bool deterministic_in_parent(const Factor& cpt, VarId parent,
                             const std::vector<int>& cards);

/// Rewrites `reduced` (same variables, each parent set a subset of the
/// reference's) onto the reference network's CPT scopes by replicating
/// tables across the missing parents. Values are unchanged as functions.
BayesianNetwork lift_to_scopes(const BayesianNetwork& reference,
                               const BayesianNetwork& reduced);

/// Exact KL(Pr(.|e), Pr'(.|e)) between two networks with identical CPT
/// scopes, via the local decomposition
///   ln(Pr'(e)/Pr(e)) - sum over changed CPT cells of Pr(cell|e) ln(t'/t).
/// Needs only Pr(e), Pr'(e) and one small joint per changed CPT, never the
/// full joint. +infinity when some positive-posterior cell has t' = 0.
double exact_posterior_kl(const BayesianNetwork& net,
                          const BayesianNetwork& approx, const Evidence& e,
                          const EngineOptions& opts = {});

/// Same quantity by the second decomposition, valid when every changed CPT
/// is 0/1-valued:
///   ln(Pr'(e)/Pr(e)) + sum over parent rows of Pr(row|e) KL(row, row').
double exact_posterior_kl_deterministic(const BayesianNetwork& net,
                                        const BayesianNetwork& approx,
                                        const Evidence& e,
                                        const EngineOptions& opts = {});

/// Quality certificate for a deletion: the guaranteed KL budget
/// ln(Pr'(e)/Pr(e)) + sum of deleted parents' posterior entropies, the
/// exact divergence when cheap enough to verify, and whether the equality
/// conditions hold so the budget is known to be tight.
struct BoundReport {
  double log_ratio = 0.0;    // ln(Pr'(e)/Pr(e))
  double entropy_sum = 0.0;  // nats, one term per deleted edge's parent
  double bound = 0.0;        // log_ratio + entropy_sum
  std::optional<double> exact_kl;
  bool equality_certified = false;
  // The bound is a theorem only for one-deletion-per-child plans whose
  // replacements are the original network's true posteriors. Otherwise it
  // is reported as a heuristic and this flag is false.
  bool hypothesis_met = true;
  std::string hypothesis_note;
};

/// Builds the report for a deletion plan. `approx` must be the plan applied
/// to `net`. exact_kl is filled only when compute_exact is set and the
/// joint state space is within oracle scale (2^24).
BoundReport bound_report(const BayesianNetwork& net,
                         const BayesianNetwork& approx,
                         const DeletionPlan& plan, const Evidence& e,
                         bool compute_exact, const EngineOptions& opts = {});

/// Three-variable witness that the KL budget has no network-independent
/// cap: Y a root, X a copy of Y, Z a noisy equality test of X and Y,
/// evidence Z = true. As theta_y approaches 0 the deleted parent's entropy
/// vanishes while ln(Pr'(e)/Pr(e)) grows without bound. theta_zxy defaults
/// to (2 theta_y (1-theta_y))^2, the choice that forces the effect.
std::pair<BayesianNetwork, Evidence> make_vanishing_entropy_network(
    double theta_y, std::optional<double> theta_zxy = std::nullopt);

}  // namespace edgedel

#pragma once

#include <string>
#include <vector>

#include "edgedel/factor.hpp"
#include "edgedel/types.hpp"

namespace edgedel {

/// DAG of discrete variables with one CPT per variable.
/// CPT scope is [parents..., child], child last; rows (one per parent
/// configuration) are contiguous and sum to 1.
///
/// Networks are treated as immutable once validated; all engine operations
/// take them by const reference and return fresh networks.
struct BayesianNetwork {
  std::string name;
  std::vector<Variable> variables;
  std::vector<std::vector<VarId>> parents;
  std::vector<Factor> cpts;

  int num_vars() const { return static_cast<int>(variables.size()); }

  std::vector<int> cards() const {
    std::vector<int> c(variables.size());
    for (std::size_t i = 0; i < variables.size(); ++i) c[i] = variables[i].card();
    return c;
  }

  /// -1 when no variable has that name.
  VarId find(const std::string& var_name) const;

  /// Ids of childless variables, ascending.
  std::vector<VarId> leaves() const;

  bool has_edge(VarId parent, VarId child) const;

  std::size_t edge_count() const;

  /// Parents-before-children order; throws ValidationError on a cycle.
  std::vector<VarId> topological_order() const;

  /// Checks every structural invariant: contiguous ids, distinct state
  /// labels, cardinality >= 2, acyclicity, CPT scopes [parents..., child],
  /// table lengths, nonnegative finite entries, row sums within row_tol of 1.
  void validate(double row_tol = 1e-9) const;
};

/// Throws ValidationError if e names unknown variables, out-of-range states,
/// or (structurally impossible with a map) duplicate assignments.
void validate_evidence(const BayesianNetwork& net, const Evidence& e);

}  // namespace edgedel

#include "edgedel/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "edgedel/errors.hpp"

namespace edgedel {

VarId BayesianNetwork::find(const std::string& var_name) const {
  for (const Variable& v : variables)
    if (v.name == var_name) return v.id;
  return -1;
}

std::vector<VarId> BayesianNetwork::leaves() const {
  std::vector<bool> has_child(variables.size(), false);
  for (std::size_t child = 0; child < parents.size(); ++child)
    for (VarId p : parents[child]) has_child[p] = true;
  std::vector<VarId> out;
  for (std::size_t v = 0; v < variables.size(); ++v)
    if (!has_child[v]) out.push_back(static_cast<VarId>(v));
  return out;
}

bool BayesianNetwork::has_edge(VarId parent, VarId child) const {
  const auto& ps = parents[child];
  return std::find(ps.begin(), ps.end(), parent) != ps.end();
}

std::size_t BayesianNetwork::edge_count() const {
  std::size_t n = 0;
  for (const auto& ps : parents) n += ps.size();
  return n;
}

std::vector<VarId> BayesianNetwork::topological_order() const {
  const std::size_t n = variables.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<VarId>> children(n);
  for (std::size_t child = 0; child < n; ++child) {
    indegree[child] = static_cast<int>(parents[child].size());
    for (VarId p : parents[child]) children[p].push_back(static_cast<VarId>(child));
  }
  std::vector<VarId> frontier, order;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) frontier.push_back(static_cast<VarId>(v));
  while (!frontier.empty()) {
    // Lowest id first for a deterministic order.
    std::sort(frontier.begin(), frontier.end(), std::greater<VarId>());
    VarId v = frontier.back();
    frontier.pop_back();
    order.push_back(v);
    for (VarId c : children[v])
      if (--indegree[c] == 0) frontier.push_back(c);
  }
  if (order.size() != n)
    throw ValidationError("network contains a directed cycle");
  return order;
}

void BayesianNetwork::validate(double row_tol) const {
  const std::size_t n = variables.size();
  if (parents.size() != n || cpts.size() != n)
    throw ValidationError("variable/parent/cpt list sizes disagree");
  for (std::size_t i = 0; i < n; ++i) {
    const Variable& v = variables[i];
    if (v.id != static_cast<VarId>(i))
      throw ValidationError("variable ids must be contiguous 0..n-1");
    if (v.card() < 2)
      throw ValidationError("variable '" + v.name + "' needs at least 2 states");
    std::set<std::string> labels(v.states.begin(), v.states.end());
    if (labels.size() != v.states.size())
      throw ValidationError("variable '" + v.name + "' has duplicate state labels");
  }
  topological_order();  // throws on cycles

  const auto cs = cards();
  for (std::size_t i = 0; i < n; ++i) {
    const Factor& cpt = cpts[i];
    std::vector<VarId> want = parents[i];
    want.push_back(static_cast<VarId>(i));
    if (cpt.scope != want)
      throw ValidationError("CPT scope of '" + variables[i].name +
                            "' must be [parents..., child]");
    if (cpt.table.size() != table_size(cpt.scope, cs))
      throw ValidationError("CPT table length mismatch for '" +
                            variables[i].name + "'");
    for (double x : cpt.table)
      if (!(x >= 0.0) || !std::isfinite(x))
        throw ValidationError("CPT of '" + variables[i].name +
                              "' has a negative or non-finite entry");
    const std::size_t row = static_cast<std::size_t>(cs[i]);
    for (std::size_t r = 0; r < cpt.table.size(); r += row) {
      double s = 0.0;
      for (std::size_t j = 0; j < row; ++j) s += cpt.table[r + j];
      if (std::fabs(s - 1.0) > row_tol)
        throw ValidationError("CPT row of '" + variables[i].name +
                              "' sums to " + std::to_string(s) + ", not 1");
    }
  }
}

void validate_evidence(const BayesianNetwork& net, const Evidence& e) {
  for (const auto& [v, s] : e.assignments) {
    if (v < 0 || v >= net.num_vars())
      throw ValidationError("evidence names unknown variable id " +
                            std::to_string(v));
    if (s < 0 || s >= net.variables[v].card())
      throw ValidationError("evidence state out of range for '" +
                            net.variables[v].name + "'");
  }
}

}  // namespace edgedel

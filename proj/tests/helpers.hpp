#pragma once

// Fixtures and random-instance generators shared by the unit and acceptance
// suites. Everything is seeded through edgedel::Rng so failures reproduce.

#include <algorithm>
#include <cmath>
#include <vector>

#include "edgedel/divergence.hpp"
#include "edgedel/enumerate.hpp"
#include "edgedel/errors.hpp"
#include "edgedel/harness.hpp"
#include "edgedel/network.hpp"
#include "edgedel/types.hpp"

namespace testutil {

using namespace edgedel;

inline std::vector<double> random_row(Rng& rng, int k) {
  std::vector<double> row(k);
  double sum = 0.0;
  for (double& x : row) {
    x = rng.uniform() + 0.05;  // strictly positive
    sum += x;
  }
  for (double& x : row) x /= sum;
  return row;
}

inline Factor random_cpt(Rng& rng, const std::vector<VarId>& parents,
                         VarId child, const std::vector<int>& cards) {
  Factor f;
  f.scope = parents;
  f.scope.push_back(child);
  std::size_t rows = 1;
  for (VarId p : parents) rows *= static_cast<std::size_t>(cards[p]);
  f.table.reserve(rows * cards[child]);
  for (std::size_t r = 0; r < rows; ++r)
    for (double x : random_row(rng, cards[child])) f.table.push_back(x);
  return f;
}

inline BayesianNetwork assemble(std::vector<int> cards,
                                std::vector<std::vector<VarId>> parents,
                                Rng& rng) {
  BayesianNetwork net;
  net.name = "generated";
  for (std::size_t i = 0; i < cards.size(); ++i) {
    Variable v;
    v.id = static_cast<VarId>(i);
    v.name = "V" + std::to_string(i);
    for (int s = 0; s < cards[i]; ++s)
      v.states.push_back("s" + std::to_string(s));
    net.variables.push_back(std::move(v));
  }
  net.parents = std::move(parents);
  for (std::size_t i = 0; i < cards.size(); ++i)
    net.cpts.push_back(
        random_cpt(rng, net.parents[i], static_cast<VarId>(i), cards));
  net.validate();
  return net;
}

/// Random DAG, variables numbered in topological order, strictly positive
/// CPTs. Parent counts are capped so the joint stays enumerable.
inline BayesianNetwork random_dag(Rng& rng, int min_vars = 4, int max_vars = 8,
                                  int min_card = 2, int max_card = 4,
                                  double edge_prob = 0.45,
                                  int max_parents = 3) {
  const int n = min_vars + rng.below(max_vars - min_vars + 1);
  std::vector<int> cards(n);
  for (int& c : cards) c = min_card + rng.below(max_card - min_card + 1);
  std::vector<std::vector<VarId>> parents(n);
  for (int i = 1; i < n; ++i)
    for (int j = i - 1; j >= 0; --j) {
      if (static_cast<int>(parents[i].size()) >= max_parents) break;
      if (rng.uniform() < edge_prob) parents[i].push_back(j);
    }
  for (auto& ps : parents) std::sort(ps.begin(), ps.end());
  return assemble(std::move(cards), std::move(parents), rng);
}

/// Random polytree: the undirected skeleton is a tree, each edge oriented
/// by a coin flip, so nodes may have several parents.
inline BayesianNetwork random_polytree(Rng& rng, int min_vars = 4,
                                       int max_vars = 8, int min_card = 2,
                                       int max_card = 3) {
  const int n = min_vars + rng.below(max_vars - min_vars + 1);
  std::vector<int> cards(n);
  for (int& c : cards) c = min_card + rng.below(max_card - min_card + 1);
  std::vector<std::vector<VarId>> parents(n);
  for (int i = 1; i < n; ++i) {
    const int j = rng.below(i);
    if (rng.next() & 1)
      parents[i].push_back(j);
    else
      parents[j].push_back(i);
  }
  for (auto& ps : parents) std::sort(ps.begin(), ps.end());
  return assemble(std::move(cards), std::move(parents), rng);
}

/// Evidence assigning each variable independently with probability p_assign.
inline Evidence random_evidence(Rng& rng, const BayesianNetwork& net,
                                double p_assign = 0.35) {
  Evidence e;
  for (VarId v = 0; v < net.num_vars(); ++v)
    if (rng.uniform() < p_assign) e.set(v, rng.below(net.variables[v].card()));
  return e;
}

/// Like random_evidence but resampled until Pr(e) > 0 (needed once networks
/// contain deterministic CPTs). Callers keep networks within oracle scale.
inline Evidence random_positive_evidence(Rng& rng, const BayesianNetwork& net,
                                         double p_assign = 0.35) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Evidence e = random_evidence(rng, net, p_assign);
    try {
      joint_enumerate(net, e);
      return e;
    } catch (const ZeroEvidenceError&) {
    }
  }
  return {};  // empty evidence always has Pr(e) = 1
}

/// Binary random DAG in which `child_out` has at least one parent and its
/// CPT is the parity (XOR) of its parents.
inline BayesianNetwork random_parity_child_dag(Rng& rng, VarId* child_out,
                                               int min_vars = 4,
                                               int max_vars = 7) {
  const int n = min_vars + rng.below(max_vars - min_vars + 1);
  std::vector<int> cards(n, 2);
  std::vector<std::vector<VarId>> parents(n);
  for (int i = 1; i < n; ++i)
    for (int j = i - 1; j >= 0; --j) {
      if (parents[i].size() >= 3) break;
      if (rng.uniform() < 0.5) parents[i].push_back(j);
    }
  if (parents[n - 1].empty()) parents[n - 1].push_back(0);
  for (auto& ps : parents) std::sort(ps.begin(), ps.end());

  std::vector<VarId> candidates;
  for (int i = 0; i < n; ++i)
    if (!parents[i].empty()) candidates.push_back(i);
  const VarId child = candidates[rng.below(static_cast<int>(candidates.size()))];

  BayesianNetwork net = assemble(std::move(cards), std::move(parents), rng);
  Factor& cpt = net.cpts[child];
  const std::size_t rows = cpt.table.size() / 2;
  const std::size_t np = cpt.scope.size() - 1;
  // Child state 1 iff an odd number of parents are in state 1.
  for (std::size_t r = 0; r < rows; ++r) {
    int ones = 0;
    for (std::size_t k = 0; k < np; ++k) ones += static_cast<int>(r >> k) & 1;
    const int x = ones & 1;
    cpt.table[2 * r + x] = 1.0;
    cpt.table[2 * r + (x ^ 1)] = 0.0;
  }
  net.validate();
  *child_out = child;
  return net;
}

/// Binary chain A -> B -> C with fixed CPTs.
inline BayesianNetwork chain3() {
  BayesianNetwork net;
  net.name = "chain3";
  net.variables = {Variable{0, "A", {"a0", "a1"}},
                   Variable{1, "B", {"b0", "b1"}},
                   Variable{2, "C", {"c0", "c1"}}};
  net.parents = {{}, {0}, {1}};
  net.cpts = {Factor({0}, {0.6, 0.4}),
              Factor({0, 1}, {0.9, 0.1, 0.3, 0.7}),
              Factor({1, 2}, {0.2, 0.8, 0.75, 0.25})};
  net.validate();
  return net;
}

/// Binary diamond A -> B, A -> C, B -> D, C -> D with fixed CPTs.
inline BayesianNetwork diamond4() {
  BayesianNetwork net;
  net.name = "diamond4";
  net.variables = {Variable{0, "A", {"a0", "a1"}},
                   Variable{1, "B", {"b0", "b1"}},
                   Variable{2, "C", {"c0", "c1"}},
                   Variable{3, "D", {"d0", "d1"}}};
  net.parents = {{}, {0}, {0}, {1, 2}};
  net.cpts = {Factor({0}, {0.35, 0.65}),
              Factor({0, 1}, {0.8, 0.2, 0.25, 0.75}),
              Factor({0, 2}, {0.6, 0.4, 0.1, 0.9}),
              Factor({1, 2, 3}, {0.95, 0.05, 0.4, 0.6,
                                 0.5, 0.5, 0.15, 0.85})};
  net.validate();
  return net;
}

/// Three independent variables, no edges.
inline BayesianNetwork independent3() {
  BayesianNetwork net;
  net.name = "independent3";
  net.variables = {Variable{0, "A", {"a0", "a1"}},
                   Variable{1, "B", {"b0", "b1", "b2"}},
                   Variable{2, "C", {"c0", "c1"}}};
  net.parents = {{}, {}, {}};
  net.cpts = {Factor({0}, {0.3, 0.7}), Factor({1}, {0.2, 0.5, 0.3}),
              Factor({2}, {0.9, 0.1})};
  net.validate();
  return net;
}

/// Per-variable posterior marginals straight from the enumeration oracle.
inline std::vector<std::vector<double>> enum_marginals(
    const BayesianNetwork& net, const Evidence& e) {
  const JointDistribution jd = joint_enumerate(net, e);
  std::vector<std::vector<double>> out;
  for (VarId v = 0; v < net.num_vars(); ++v)
    out.push_back(jd.marginal(v, net, e));
  return out;
}

/// Brute-force KL(Pr(.|e), Pr'(.|e)) over complete worlds. Both networks
/// must share the variable set so world indexing lines up.
inline double enum_world_kl(const BayesianNetwork& net,
                            const BayesianNetwork& approx, const Evidence& e) {
  const JointDistribution p = joint_enumerate(net, e);
  const JointDistribution q = joint_enumerate(approx, e);
  return kl_divergence(p.posterior, q.posterior);
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Deletion plan with up to max_edges edges, one per distinct child.
inline DeletionPlan random_plan(Rng& rng, const BayesianNetwork& net,
                                int max_edges = 3) {
  std::vector<VarId> children;
  for (VarId v = 0; v < net.num_vars(); ++v)
    if (!net.parents[v].empty()) children.push_back(v);
  DeletionPlan plan;
  if (children.empty()) return plan;
  for (std::size_t i = children.size(); i > 1; --i)
    std::swap(children[i - 1], children[rng.below(static_cast<int>(i))]);
  const int k = 1 + rng.below(std::min<int>(max_edges,
                                            static_cast<int>(children.size())));
  for (int i = 0; i < k; ++i) {
    const VarId c = children[i];
    const auto& ps = net.parents[c];
    plan.edges.push_back({ps[rng.below(static_cast<int>(ps.size()))], c});
  }
  return plan;
}

}  // namespace testutil

#include "edgedel/edge_delete.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "edgedel/errors.hpp"

namespace edgedel {
namespace {

constexpr double kDistTol = 1e-9;

void check_dist(std::span<const double> dist, int card) {
  if (static_cast<int>(dist.size()) != card)
    throw ValidationError("replacement distribution has wrong dimension");
  double s = 0.0;
  for (double x : dist) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ValidationError("replacement distribution has a bad entry");
    s += x;
  }
  if (std::abs(s - 1.0) > kDistTol)
    throw ValidationError("replacement distribution does not sum to 1");
}

int parent_axis(const BayesianNetwork& net, EdgeRef edge) {
  if (edge.child < 0 || edge.child >= net.num_vars() || edge.parent < 0 ||
      edge.parent >= net.num_vars())
    throw ValidationError("edge references an unknown variable");
  const auto& ps = net.parents[edge.child];
  auto it = std::find(ps.begin(), ps.end(), edge.parent);
  if (it == ps.end())
    throw ValidationError("edge " + net.variables[edge.parent].name + " -> " +
                          net.variables[edge.child].name + " is not present");
  return static_cast<int>(it - ps.begin());
}

void check_plan_children(const DeletionPlan& plan) {
  if (!plan.at_most_one_per_child) return;
  std::set<VarId> seen;
  for (const EdgeRef& ed : plan.edges)
    if (!seen.insert(ed.child).second)
      throw ValidationError("plan deletes two parents of one child but is "
                            "marked one-per-child");
}

}  // namespace

BayesianNetwork delete_edge(const BayesianNetwork& net, EdgeRef edge,
                            std::span<const double> dist) {
  const int a = parent_axis(net, edge);
  const auto cards = net.cards();
  check_dist(dist, cards[edge.parent]);

  const Factor& old = net.cpts[edge.child];
  Factor neu;
  neu.scope = old.scope;
  neu.scope.erase(neu.scope.begin() + a);
  neu.table.assign(table_size(neu.scope, cards), 0.0);

  const auto ostr = strides(old.scope, cards);
  const auto nstr = strides(neu.scope, cards);
  const std::size_t ystr = ostr[a];
  const int ycard = cards[edge.parent];
  for (std::size_t i = 0; i < neu.table.size(); ++i) {
    std::size_t base = 0;
    for (std::size_t j = 0; j < neu.scope.size(); ++j) {
      const std::size_t digit =
          (i / nstr[j]) % static_cast<std::size_t>(cards[neu.scope[j]]);
      base += digit * ostr[j < static_cast<std::size_t>(a) ? j : j + 1];
    }
    double acc = 0.0;
    for (int y = 0; y < ycard; ++y)
      acc += old.table[base + static_cast<std::size_t>(y) * ystr] * dist[y];
    neu.table[i] = acc;
  }

  BayesianNetwork out = net;
  out.parents[edge.child].erase(out.parents[edge.child].begin() + a);
  out.cpts[edge.child] = std::move(neu);
  return out;
}

BayesianNetwork auxiliary_root_form(const BayesianNetwork& net, EdgeRef edge,
                                    std::span<const double> dist) {
  const int a = parent_axis(net, edge);
  check_dist(dist, net.variables[edge.parent].card());

  BayesianNetwork out = net;
  const VarId aux = out.num_vars();

  std::set<std::string> names;
  for (const Variable& v : out.variables) names.insert(v.name);
  std::string name = out.variables[edge.parent].name + "_prime";
  while (names.count(name)) name += "_";

  Variable v;
  v.id = aux;
  v.name = name;
  v.states = out.variables[edge.parent].states;
  out.variables.push_back(std::move(v));
  out.parents.emplace_back();
  out.cpts.push_back(Factor({aux}, {dist.begin(), dist.end()}));

  out.parents[edge.child][a] = aux;
  out.cpts[edge.child].scope[a] = aux;
  out.validate();
  return out;
}

BayesianNetwork apply_plan(const BayesianNetwork& net,
                           const DeletionPlan& plan) {
  if (plan.replacements.size() != plan.edges.size())
    throw ValidationError("plan replacements are not filled");
  check_plan_children(plan);
  BayesianNetwork cur = net;
  for (std::size_t i = 0; i < plan.edges.size(); ++i)
    cur = delete_edge(cur, plan.edges[i], plan.replacements[i]);
  return cur;
}

DeletionPlan select_edges(const BayesianNetwork& net,
                          const EliminationOrder& order,
                          double threshold_log2_entries,
                          bool at_most_one_per_child) {
  constexpr double kTol = 1e-9;
  const auto cards = net.cards();
  std::vector<std::vector<VarId>> scopes;
  scopes.reserve(net.cpts.size());
  for (const Factor& f : net.cpts) scopes.push_back(f.scope);

  DeletionPlan plan;
  plan.at_most_one_per_child = at_most_one_per_child;
  std::vector<bool> child_used(net.num_vars(), false);

  for (;;) {
    const SymbolicBuckets sim =
        simulate_buckets(scopes, cards, order.order);
    int p = -1;
    for (std::size_t q = 0; q < sim.log2_entries.size(); ++q)
      if (sim.log2_entries[q] > threshold_log2_entries + kTol) {
        p = static_cast<int>(q);
        break;
      }
    if (p < 0) break;

    EdgeRef best;
    double best_new = std::numeric_limits<double>::infinity();
    for (int idx : sim.assigned[p]) {
      const VarId child = idx;  // scope i is variable i's CPT
      if (at_most_one_per_child && child_used[child]) continue;
      for (VarId parent : scopes[idx]) {
        if (parent == child) continue;
        auto trial = scopes;
        auto& sc = trial[idx];
        sc.erase(std::find(sc.begin(), sc.end(), parent));
        const double cand =
            simulate_buckets(trial, cards, order.order).log2_entries[p];
        bool better = cand < best_new - kTol;
        if (!better && cand < best_new + kTol && best.parent >= 0) {
          // Equal reduction: smaller parent cardinality, then lowest ids.
          if (cards[parent] != cards[best.parent])
            better = cards[parent] < cards[best.parent];
          else
            better = std::pair(parent, child) <
                     std::pair(best.parent, best.child);
        }
        if (better) {
          best = EdgeRef{parent, child};
          best_new = cand;
        }
      }
    }
    if (best.parent < 0 || best_new > sim.log2_entries[p] - kTol)
      throw PlanError(
          "threshold unreachable: bucket for variable " +
          net.variables[order.order[p]].name + " (position " +
          std::to_string(p) + ") needs " +
          std::to_string(sim.log2_entries[p]) +
          " log2 entries and no deletable edge reduces it");

    auto& sc = scopes[best.child];
    sc.erase(std::find(sc.begin(), sc.end(), best.parent));
    child_used[best.child] = true;
    plan.edges.push_back(best);
  }
  plan.replacements.assign(plan.edges.size(), {});
  return plan;
}

BayesianNetwork exact_posterior_deletion(const BayesianNetwork& net,
                                         const Evidence& e, DeletionPlan& plan,
                                         const EliminationOrder& order,
                                         const EngineOptions& opts) {
  check_plan_children(plan);
  const MarginalSet ms = eliminate(net, e, order, opts);
  plan.replacements.resize(plan.edges.size());
  for (std::size_t i = 0; i < plan.edges.size(); ++i)
    plan.replacements[i] = ms.marginals[plan.edges[i].parent];
  return apply_plan(net, plan);
}

std::pair<BayesianNetwork, FixedPointTrace> fixed_point_deletion(
    const BayesianNetwork& net, const Evidence& e, const DeletionPlan& plan,
    const FixedPointOptions& opts) {
  if (opts.max_iterations < 1)
    throw ValidationError("max_iterations must be positive");
  check_plan_children(plan);
  const auto cards = net.cards();

  DeletionPlan work = plan;
  work.replacements.clear();
  for (const EdgeRef& ed : plan.edges) {
    const int c = cards[ed.parent];
    work.replacements.emplace_back(c, 1.0 / c);
  }
  BayesianNetwork cur = apply_plan(net, work);
  const EliminationOrder order =
      opts.order ? *opts.order : compute_order(cur, opts.heuristic);

  auto posteriors = [&](int round) {
    try {
      const MarginalSet ms = eliminate(cur, e, order, opts.engine);
      std::vector<std::vector<double>> r(plan.edges.size());
      for (std::size_t i = 0; i < plan.edges.size(); ++i)
        r[i] = ms.marginals[plan.edges[i].parent];
      return r;
    } catch (const ZeroEvidenceError&) {
      throw ZeroEvidenceError(
          "approximate network gives the evidence probability zero at "
          "iteration " +
          std::to_string(round));
    }
  };

  FixedPointTrace trace;
  std::vector<std::vector<double>> r_cur = posteriors(1);
  work.replacements = r_cur;
  cur = apply_plan(net, work);

  for (int round = 2; round <= opts.max_iterations; ++round) {
    const std::vector<std::vector<double>> r_next = posteriors(round);
    double delta = 0.0;
    for (std::size_t i = 0; i < r_next.size(); ++i)
      for (std::size_t s = 0; s < r_next[i].size(); ++s)
        delta = std::max(delta, std::abs(r_next[i][s] - r_cur[i][s]));
    trace.max_changes.push_back(delta);
    if (delta < opts.epsilon) {
      trace.converged = true;
      trace.iterations = round - 1;
      trace.final_replacements = r_cur;
      return {std::move(cur), std::move(trace)};
    }
    r_cur = r_next;
    work.replacements = r_cur;
    cur = apply_plan(net, work);
  }
  trace.converged = false;
  trace.iterations = opts.max_iterations;
  trace.final_replacements = r_cur;
  return {std::move(cur), std::move(trace)};
}

BayesianNetwork prior_arc_removal(const BayesianNetwork& net,
                                  const DeletionPlan& plan,
                                  const EliminationOrder& order,
                                  const EngineOptions& opts) {
  const auto cards = net.cards();
  std::map<VarId, std::set<VarId>> removed;
  for (const EdgeRef& ed : plan.edges) {
    parent_axis(net, ed);
    if (!removed[ed.child].insert(ed.parent).second)
      throw ValidationError("plan lists the same edge twice");
  }
  check_plan_children(plan);

  BayesianNetwork out = net;
  const Evidence none;
  for (const auto& [child, gone] : removed) {
    std::vector<VarId> targets;
    for (VarId u : net.parents[child])
      if (!gone.count(u)) targets.push_back(u);
    targets.push_back(child);

    const Factor joint = joint_marginal(net, none, targets, order, opts);
    Factor cpt = joint;
    const int xc = cards[child];
    for (std::size_t row = 0; row < cpt.table.size();
         row += static_cast<std::size_t>(xc)) {
      double s = 0.0;
      for (int x = 0; x < xc; ++x) s += cpt.table[row + x];
      if (s > 0.0)
        for (int x = 0; x < xc; ++x) cpt.table[row + x] /= s;
      else
        for (int x = 0; x < xc; ++x) cpt.table[row + x] = 1.0 / xc;
    }
    targets.pop_back();
    out.parents[child] = targets;
    out.cpts[child] = std::move(cpt);
  }
  return out;
}

}  // namespace edgedel

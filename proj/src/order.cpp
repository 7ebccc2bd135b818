#include "edgedel/order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "edgedel/errors.hpp"

namespace edgedel {
namespace {

std::vector<std::set<VarId>> moral_graph(const BayesianNetwork& net) {
  std::vector<std::set<VarId>> adj(net.num_vars());
  for (VarId x = 0; x < net.num_vars(); ++x) {
    std::vector<VarId> family = net.parents[x];
    family.push_back(x);
    for (std::size_t i = 0; i < family.size(); ++i)
      for (std::size_t j = i + 1; j < family.size(); ++j) {
        adj[family[i]].insert(family[j]);
        adj[family[j]].insert(family[i]);
      }
  }
  return adj;
}

}  // namespace

EliminationOrder compute_order(const BayesianNetwork& net, OrderHeuristic h) {
  if (h == OrderHeuristic::Explicit)
    throw ValidationError("compute_order needs minfill or minsize");
  const int n = net.num_vars();
  const auto cs = net.cards();
  auto adj = moral_graph(net);
  std::vector<bool> gone(n, false);

  EliminationOrder out;
  out.heuristic = h;
  out.order.reserve(n);

  for (int step = 0; step < n; ++step) {
    VarId best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (VarId v = 0; v < n; ++v) {
      if (gone[v]) continue;
      double score;
      if (h == OrderHeuristic::MinFill) {
        // Missing edges among the remaining neighbors of v.
        int fill = 0;
        std::vector<VarId> nb(adj[v].begin(), adj[v].end());
        for (std::size_t i = 0; i < nb.size(); ++i)
          for (std::size_t j = i + 1; j < nb.size(); ++j)
            if (!adj[nb[i]].count(nb[j])) ++fill;
        score = fill;
      } else {
        double prod = cs[v];
        for (VarId u : adj[v]) prod *= cs[u];
        score = prod;
      }
      if (score < best_score) {  // ties keep the lowest id
        best_score = score;
        best = v;
      }
    }
    out.order.push_back(best);
    gone[best] = true;
    // Connect the neighborhood, then remove v.
    std::vector<VarId> nb(adj[best].begin(), adj[best].end());
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        adj[nb[i]].insert(nb[j]);
        adj[nb[j]].insert(nb[i]);
      }
    for (VarId u : nb) adj[u].erase(best);
    adj[best].clear();
  }
  return out;
}

EliminationOrder explicit_order(const BayesianNetwork& net,
                                std::vector<VarId> order) {
  std::vector<bool> seen(net.num_vars(), false);
  if (order.size() != static_cast<std::size_t>(net.num_vars()))
    throw ValidationError("elimination order must list every variable once");
  for (VarId v : order) {
    if (v < 0 || v >= net.num_vars() || seen[v])
      throw ValidationError("elimination order is not a permutation of ids");
    seen[v] = true;
  }
  return EliminationOrder{std::move(order), OrderHeuristic::Explicit};
}

SymbolicBuckets simulate_buckets(const std::vector<std::vector<VarId>>& scopes,
                                 const std::vector<int>& cards,
                                 const std::vector<VarId>& order) {
  const std::size_t n = order.size();
  std::vector<int> pos(cards.size(), -1);
  for (std::size_t p = 0; p < n; ++p) pos[order[p]] = static_cast<int>(p);

  auto earliest = [&](const std::set<VarId>& scope) {
    int e = std::numeric_limits<int>::max();
    for (VarId v : scope) e = std::min(e, pos[v]);
    return e;
  };

  SymbolicBuckets out;
  out.entries.assign(n, 0.0);
  out.log2_entries.assign(n, 0.0);
  out.assigned.resize(n);

  // Bucket contents as scope sets; originals carry their input index.
  std::vector<std::vector<std::set<VarId>>> bucket(n);
  for (std::size_t i = 0; i < scopes.size(); ++i) {
    std::set<VarId> s(scopes[i].begin(), scopes[i].end());
    if (s.empty()) continue;
    int p = earliest(s);
    out.assigned[p].push_back(static_cast<int>(i));
    bucket[p].push_back(std::move(s));
  }

  for (std::size_t p = 0; p < n; ++p) {
    if (bucket[p].empty()) continue;
    std::set<VarId> cluster;
    for (const auto& s : bucket[p]) cluster.insert(s.begin(), s.end());
    double entries = 1.0, lg = 0.0;
    for (VarId v : cluster) {
      entries *= cards[v];
      lg += std::log2(static_cast<double>(cards[v]));
    }
    out.entries[p] = entries;
    out.log2_entries[p] = lg;
    out.normalized_max = std::max(out.normalized_max, lg);
    cluster.erase(order[p]);
    if (!cluster.empty()) bucket[earliest(cluster)].push_back(std::move(cluster));
  }
  return out;
}

ClusterStats cluster_stats(const BayesianNetwork& net,
                           const EliminationOrder& order) {
  std::vector<std::vector<VarId>> scopes;
  scopes.reserve(net.cpts.size());
  for (const Factor& cpt : net.cpts) scopes.push_back(cpt.scope);
  const auto sim = simulate_buckets(scopes, net.cards(), order.order);
  return ClusterStats{sim.entries, sim.normalized_max};
}

std::string to_string(OrderHeuristic h) {
  switch (h) {
    case OrderHeuristic::MinFill: return "minfill";
    case OrderHeuristic::MinSize: return "minsize";
    case OrderHeuristic::Explicit: return "explicit";
  }
  return "?";
}

}  // namespace edgedel

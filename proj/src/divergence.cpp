#include "edgedel/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "edgedel/errors.hpp"
#include "edgedel/order.hpp"

namespace edgedel {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroOneTol = 1e-12;

bool same_scopes(const BayesianNetwork& a, const BayesianNetwork& b) {
  if (a.num_vars() != b.num_vars()) return false;
  for (VarId v = 0; v < a.num_vars(); ++v) {
    if (a.variables[v].card() != b.variables[v].card()) return false;
    if (a.cpts[v].scope != b.cpts[v].scope) return false;
  }
  return true;
}

double log2_joint_states(const BayesianNetwork& net) {
  double lg = 0.0;
  for (const Variable& v : net.variables) lg += std::log2(double(v.card()));
  return lg;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw ValidationError("kl_divergence: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc < 0.0 && acc > -1e-12 ? 0.0 : acc;
}

double entropy(std::span<const double> dist) {
  double acc = 0.0;
  for (double x : dist)
    if (x > 0.0) acc -= x * std::log(x);
  return acc < 0.0 ? 0.0 : acc;
}

bool deterministic_in_parent(const Factor& cpt, VarId parent,
                             const std::vector<int>& cards) {
  const auto& sc = cpt.scope;
  auto it = std::find(sc.begin(), sc.end(), parent);
  if (it == sc.end() || it == sc.end() - 1)
    throw ValidationError("parent not in the CPT's parent set");
  const std::size_t axis = it - sc.begin();

  for (double t : cpt.table)
    if (std::abs(t) > kZeroOneTol && std::abs(t - 1.0) > kZeroOneTol)
      return false;

  // For each context u (all other parents) and child state x, at most one
  // parent state may achieve t = 1.
  const auto str = strides(sc, cards);
  const std::size_t ystr = str[axis];
  const int ycard = cards[parent];
  const std::size_t n = cpt.table.size();
  std::set<std::size_t> seen;  // table index with y-digit zeroed
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(cpt.table[i] - 1.0) > kZeroOneTol) continue;
    const std::size_t ydigit = (i / ystr) % static_cast<std::size_t>(ycard);
    const std::size_t key = i - ydigit * ystr;
    if (!seen.insert(key).second) return false;
  }
  return true;
}

BayesianNetwork lift_to_scopes(const BayesianNetwork& reference,
                               const BayesianNetwork& reduced) {
  if (reference.num_vars() != reduced.num_vars())
    throw ValidationError("lift_to_scopes: variable sets differ");
  const auto cards = reference.cards();
  BayesianNetwork out = reduced;
  out.variables = reference.variables;
  for (VarId v = 0; v < reference.num_vars(); ++v) {
    if (reduced.cpts[v].scope == reference.cpts[v].scope) continue;
    for (VarId p : reduced.parents[v])
      if (!reference.has_edge(p, v))
        throw ValidationError(
            "lift_to_scopes: reduced network has an extra parent");

    const Factor& small = reduced.cpts[v];
    Factor big;
    big.scope = reference.cpts[v].scope;
    big.table.resize(table_size(big.scope, cards));
    const auto bstr = strides(big.scope, cards);
    const auto sstr = strides(small.scope, cards);
    std::vector<std::size_t> map(big.scope.size(), 0);  // 0 = replicated axis
    for (std::size_t j = 0; j < big.scope.size(); ++j)
      for (std::size_t k = 0; k < small.scope.size(); ++k)
        if (small.scope[k] == big.scope[j]) map[j] = sstr[k];
    for (std::size_t i = 0; i < big.table.size(); ++i) {
      std::size_t si = 0;
      for (std::size_t j = 0; j < big.scope.size(); ++j)
        si += ((i / bstr[j]) % static_cast<std::size_t>(cards[big.scope[j]])) *
              map[j];
      big.table[i] = small.table[si];
    }
    out.cpts[v] = std::move(big);
    out.parents[v] = reference.parents[v];
  }
  return out;
}

double exact_posterior_kl(const BayesianNetwork& net,
                          const BayesianNetwork& approx, const Evidence& e,
                          const EngineOptions& opts) {
  if (!same_scopes(net, approx))
    throw ValidationError("exact_posterior_kl: CPT scopes differ");
  const EliminationOrder order = compute_order(net, OrderHeuristic::MinFill);
  const double lp = eliminate(net, e, order, opts).log_pe;
  const double lp2 = eliminate(approx, e, order, opts).log_pe;

  double acc = lp2 - lp;
  for (VarId v = 0; v < net.num_vars(); ++v) {
    if (net.cpts[v].table == approx.cpts[v].table) continue;
    const Factor joint =
        joint_marginal(net, e, net.cpts[v].scope, order, opts);
    for (std::size_t i = 0; i < joint.table.size(); ++i) {
      const double p = joint.table[i];
      if (p <= 0.0) continue;
      const double t = net.cpts[v].table[i];
      const double t2 = approx.cpts[v].table[i];
      if (t2 <= 0.0) return kInf;
      if (t <= 0.0) continue;  // such cells carry zero posterior mass
      acc -= p * std::log(t2 / t);
    }
  }
  return acc < 0.0 && acc > -1e-9 ? 0.0 : acc;
}

double exact_posterior_kl_deterministic(const BayesianNetwork& net,
                                        const BayesianNetwork& approx,
                                        const Evidence& e,
                                        const EngineOptions& opts) {
  if (!same_scopes(net, approx))
    throw ValidationError("exact_posterior_kl: CPT scopes differ");
  const EliminationOrder order = compute_order(net, OrderHeuristic::MinFill);
  const double lp = eliminate(net, e, order, opts).log_pe;
  const double lp2 = eliminate(approx, e, order, opts).log_pe;

  double acc = lp2 - lp;
  const auto cards = net.cards();
  for (VarId v = 0; v < net.num_vars(); ++v) {
    if (net.cpts[v].table == approx.cpts[v].table) continue;
    for (double t : net.cpts[v].table)
      if (std::abs(t) > kZeroOneTol && std::abs(t - 1.0) > kZeroOneTol)
        throw ValidationError(
            "deterministic decomposition applied to a non-0/1 CPT");

    std::vector<VarId> parents = net.cpts[v].scope;
    parents.pop_back();
    const Factor rows = joint_marginal(net, e, parents, order, opts);
    const std::size_t xc = cards[v];
    for (std::size_t r = 0; r < rows.table.size(); ++r) {
      const double pr = rows.table[r];
      if (pr <= 0.0) continue;
      const double rk =
          kl_divergence({net.cpts[v].table.data() + r * xc, xc},
                        {approx.cpts[v].table.data() + r * xc, xc});
      if (rk == kInf) return kInf;
      acc += pr * rk;
    }
  }
  return acc < 0.0 && acc > -1e-9 ? 0.0 : acc;
}

BoundReport bound_report(const BayesianNetwork& net,
                         const BayesianNetwork& approx,
                         const DeletionPlan& plan, const Evidence& e,
                         bool compute_exact, const EngineOptions& opts) {
  BoundReport rep;
  const auto cards = net.cards();
  const EliminationOrder order = compute_order(net, OrderHeuristic::MinFill);
  const MarginalSet ms = eliminate(net, e, order, opts);
  const MarginalSet ms2 =
      eliminate(approx, e, compute_order(approx, OrderHeuristic::MinFill),
                opts);

  rep.log_ratio = ms2.log_pe - ms.log_pe;
  rep.entropy_sum = 0.0;
  for (const EdgeRef& ed : plan.edges)
    rep.entropy_sum += entropy(ms.marginals[ed.parent]);
  rep.bound = rep.log_ratio + rep.entropy_sum;

  std::set<VarId> children;
  for (const EdgeRef& ed : plan.edges)
    if (!children.insert(ed.child).second) {
      rep.hypothesis_met = false;
      rep.hypothesis_note = "more than one deleted parent for one child";
    }
  if (rep.hypothesis_met) {
    for (std::size_t i = 0; i < plan.edges.size(); ++i) {
      const auto& repl = i < plan.replacements.size() ? plan.replacements[i]
                                                      : std::vector<double>{};
      const auto& truth = ms.marginals[plan.edges[i].parent];
      bool ok = repl.size() == truth.size();
      for (std::size_t s = 0; ok && s < repl.size(); ++s)
        ok = std::abs(repl[s] - truth[s]) <= 1e-9;
      if (!ok) {
        rep.hypothesis_met = false;
        rep.hypothesis_note =
            "replacements are not the original network's posteriors";
        break;
      }
    }
  }

  rep.equality_certified = true;
  for (const EdgeRef& ed : plan.edges)
    if (!deterministic_in_parent(net.cpts[ed.child], ed.parent, cards)) {
      rep.equality_certified = false;
      break;
    }

  if (compute_exact && log2_joint_states(net) <= 24.0 + 1e-9)
    rep.exact_kl =
        exact_posterior_kl(net, lift_to_scopes(net, approx), e, opts);
  return rep;
}

std::pair<BayesianNetwork, Evidence> make_vanishing_entropy_network(
    double theta_y, std::optional<double> theta_zxy) {
  if (!(theta_y > 0.0) || !(theta_y < 1.0))
    throw ValidationError("theta_y must lie strictly between 0 and 1");
  const double tz =
      theta_zxy ? *theta_zxy
                : (2.0 * theta_y * (1.0 - theta_y)) *
                      (2.0 * theta_y * (1.0 - theta_y));
  if (!(tz >= 0.0) || !(tz <= 1.0))
    throw ValidationError("theta_zxy must lie in [0, 1]");

  BayesianNetwork net;
  net.name = "vanishing_entropy_witness";
  net.variables = {Variable{0, "Y", {"y", "not_y"}},
                   Variable{1, "X", {"x", "not_x"}},
                   Variable{2, "Z", {"z", "not_z"}}};
  net.parents = {{}, {0}, {1, 0}};
  net.cpts.resize(3);
  net.cpts[0] = Factor({0}, {theta_y, 1.0 - theta_y});
  // X copies Y.
  net.cpts[1] = Factor({0, 1}, {1.0, 0.0, 0.0, 1.0});
  // Z is a noisy equality test: certain when X and Y disagree, tz otherwise.
  net.cpts[2] = Factor({1, 0, 2}, {tz, 1.0 - tz,    // x, y
                                   1.0, 0.0,        // x, not_y
                                   1.0, 0.0,        // not_x, y
                                   tz, 1.0 - tz});  // not_x, not_y
  net.validate();
  Evidence e;
  e.set(2, 0);
  return {std::move(net), std::move(e)};
}

}  // namespace edgedel

#include "edgedel/eliminate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "edgedel/errors.hpp"

namespace edgedel {
namespace {

constexpr int kOriginal = -1;

struct Entry {
  Factor f;
  int from_pos;  // bucket position that produced this message; -1 = original CPT
};

std::vector<VarId> union_scope(const std::vector<Entry>& entries,
                               const Factor* extra) {
  std::set<VarId> s;
  for (const Entry& en : entries) s.insert(en.f.scope.begin(), en.f.scope.end());
  if (extra) s.insert(extra->scope.begin(), extra->scope.end());
  return {s.begin(), s.end()};
}

void check_cap(std::span<const VarId> scope, const std::vector<int>& cards,
               std::uint64_t cap, VarId bucket_var) {
  double lg = 0.0;
  for (VarId v : scope) lg += std::log2(static_cast<double>(cards[v]));
  if (lg > std::log2(static_cast<double>(cap)) + 1e-12) {
    std::string where = bucket_var >= 0
                            ? "bucket table for variable " +
                                  std::to_string(bucket_var)
                            : "joint table";
    throw ScaleError(where +
                     " would exceed the entry cap; network too hard for exact "
                     "inference at this order");
  }
}

Factor fold_product(const std::vector<Entry>& entries, const Factor* extra,
                    int skip_index, const std::vector<int>& cards,
                    const EngineOptions& opts, VarId bucket_var) {
  check_cap(union_scope(entries, extra), cards, opts.max_table_entries,
            bucket_var);
  Factor prod = Factor::unit();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (static_cast<int>(i) == skip_index) continue;
    prod = multiply(prod, entries[i].f, cards, opts.kernels);
  }
  if (extra) prod = multiply(prod, *extra, cards, opts.kernels);
  return prod;
}

// Sums prod down to `keep`, in scope order.
Factor marginalize_onto(Factor prod, std::span<const VarId> keep,
                        const std::vector<int>& cards,
                        const EngineOptions& opts) {
  std::vector<VarId> drop;
  for (VarId v : prod.scope)
    if (std::find(keep.begin(), keep.end(), v) == keep.end()) drop.push_back(v);
  for (VarId v : drop) prod = sum_out(prod, v, cards, opts.kernels);
  return prod;
}

}  // namespace

MarginalSet eliminate(const BayesianNetwork& net, const Evidence& e,
                      const EliminationOrder& order, const EngineOptions& opts) {
  validate_evidence(net, e);
  const int n = net.num_vars();
  if (order.order.size() != static_cast<std::size_t>(n))
    throw ValidationError("elimination order does not cover the network");
  const auto cards = net.cards();

  std::vector<int> pos(n);
  for (int p = 0; p < n; ++p) pos[order.order[p]] = p;
  auto earliest_pos = [&](std::span<const VarId> scope) {
    int best = std::numeric_limits<int>::max();
    for (VarId v : scope) best = std::min(best, pos[v]);
    return best;
  };

  std::vector<std::vector<Entry>> buckets(n);
  double log_pe = 0.0;

  for (VarId v = 0; v < n; ++v) {
    Factor g = restrict(net.cpts[v], e, cards);
    if (g.scalar()) {
      if (!(g.value() > 0.0))
        throw ZeroEvidenceError("evidence has probability zero");
      log_pe += std::log(g.value());
      continue;
    }
    buckets[earliest_pos(g.scope)].push_back(Entry{std::move(g), kOriginal});
  }

  // Upward pass: eliminate each bucket's variable, scale the message to max
  // entry 1 and fold the scale into log Pr(e).
  std::vector<Factor> lambda(n);        // message produced by bucket p
  std::vector<int> parent_of(n, -1);    // bucket that receives lambda[p]
  for (int p = 0; p < n; ++p) {
    if (buckets[p].empty()) continue;
    const VarId v = order.order[p];
    Factor prod = fold_product(buckets[p], nullptr, -1, cards, opts, v);
    Factor msg = sum_out(prod, v, cards, opts.kernels);
    if (msg.scalar()) {
      if (!(msg.value() > 0.0))
        throw ZeroEvidenceError("evidence has probability zero");
      log_pe += std::log(msg.value());
      continue;
    }
    const double peak = *std::max_element(msg.table.begin(), msg.table.end());
    if (!(peak > 0.0))
      throw ZeroEvidenceError("evidence has probability zero");
    for (double& x : msg.table) x /= peak;
    log_pe += std::log(peak);
    const int q = earliest_pos(msg.scope);
    parent_of[p] = q;
    lambda[p] = msg;
    buckets[q].push_back(Entry{msg, p});
  }

  // Downward pass: every bucket receives the calibrating message from its
  // parent, then serves its own variable's marginal and its children.
  std::vector<Factor> pi(n);  // empty scope+table = none
  std::vector<bool> has_pi(n, false);

  MarginalSet out;
  out.log_pe = log_pe;
  out.marginals.resize(n);

  for (int p = n - 1; p >= 0; --p) {
    const VarId v = order.order[p];
    if (e.assigns(v)) {
      out.marginals[v].assign(cards[v], 0.0);
      out.marginals[v][e.state(v)] = 1.0;
      continue;
    }
    if (buckets[p].empty())
      throw ValidationError("internal: empty bucket for a free variable");

    const Factor* extra = has_pi[p] ? &pi[p] : nullptr;

    Factor bel = fold_product(buckets[p], extra, -1, cards, opts, v);
    const VarId keep_v[] = {v};
    Factor m = marginalize_onto(std::move(bel), keep_v, cards, opts);
    double s = 0.0;
    for (double x : m.table) s += x;
    if (!(s > 0.0))
      throw ZeroEvidenceError("evidence has probability zero");
    out.marginals[v].resize(cards[v]);
    for (int k = 0; k < cards[v]; ++k) out.marginals[v][k] = m.table[k] / s;

    for (std::size_t i = 0; i < buckets[p].size(); ++i) {
      const int child = buckets[p][i].from_pos;
      if (child == kOriginal) continue;
      Factor prod = fold_product(buckets[p], extra, static_cast<int>(i), cards,
                                 opts, v);
      Factor msg = marginalize_onto(std::move(prod), lambda[child].scope, cards,
                                    opts);
      double ms = 0.0;
      for (double x : msg.table) ms += x;
      if (!(ms > 0.0))
        throw ZeroEvidenceError("evidence has probability zero");
      for (double& x : msg.table) x /= ms;
      pi[child] = std::move(msg);
      has_pi[child] = true;
    }
  }
  return out;
}

Factor joint_marginal(const BayesianNetwork& net, const Evidence& e,
                      std::span<const VarId> targets,
                      const EliminationOrder& order, const EngineOptions& opts) {
  validate_evidence(net, e);
  const auto cards = net.cards();
  const int n = net.num_vars();
  if (order.order.size() != static_cast<std::size_t>(n))
    throw ValidationError("elimination order does not cover the network");

  std::vector<bool> is_target(n, false);
  for (VarId v : targets) {
    if (v < 0 || v >= n) throw ValidationError("joint_marginal: bad target id");
    if (is_target[v]) throw ValidationError("joint_marginal: duplicate target");
    is_target[v] = true;
  }

  std::vector<int> pos(n, -1);
  for (int p = 0; p < n; ++p) pos[order.order[p]] = p;
  // Eliminable = free and not requested.
  auto earliest_elim = [&](std::span<const VarId> scope) {
    int best = std::numeric_limits<int>::max();
    VarId at = -1;
    for (VarId v : scope)
      if (!is_target[v] && pos[v] < best) {
        best = pos[v];
        at = v;
      }
    return at;  // -1 when nothing in scope is eliminable
  };

  std::vector<std::vector<Entry>> buckets(n);
  std::vector<Factor> pool;
  auto route = [&](Factor f) {
    if (f.scalar()) {
      if (!(f.value() > 0.0))
        throw ZeroEvidenceError("evidence has probability zero");
      return;  // normalization absorbs constants
    }
    const VarId v = earliest_elim(f.scope);
    if (v < 0)
      pool.push_back(std::move(f));
    else
      buckets[pos[v]].push_back(Entry{std::move(f), kOriginal});
  };

  for (VarId v = 0; v < n; ++v) route(restrict(net.cpts[v], e, cards));

  for (int p = 0; p < n; ++p) {
    if (buckets[p].empty()) continue;
    const VarId v = order.order[p];
    Factor prod = fold_product(buckets[p], nullptr, -1, cards, opts, v);
    Factor msg = sum_out(prod, v, cards, opts.kernels);
    if (!msg.scalar()) {
      const double peak = *std::max_element(msg.table.begin(), msg.table.end());
      if (!(peak > 0.0))
        throw ZeroEvidenceError("evidence has probability zero");
      for (double& x : msg.table) x /= peak;
    }
    route(std::move(msg));
  }

  std::set<VarId> pooled;
  for (const Factor& f : pool) pooled.insert(f.scope.begin(), f.scope.end());
  check_cap(std::vector<VarId>(pooled.begin(), pooled.end()), cards,
            opts.max_table_entries, -1);
  Factor joint = Factor::unit();
  for (const Factor& f : pool) joint = multiply(joint, f, cards, opts.kernels);

  // Expand to the requested axis order, inserting point-mass axes for
  // evidence targets.
  Factor out;
  out.scope.assign(targets.begin(), targets.end());
  check_cap(out.scope, cards, opts.max_table_entries, -1);
  const std::size_t nout = table_size(out.scope, cards);
  out.table.assign(nout, 0.0);
  const auto jstr = strides(joint.scope, cards);
  std::vector<std::size_t> stride_in_joint(targets.size(), 0);
  std::vector<int> fixed_state(targets.size(), -1);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (e.assigns(targets[j])) {
      fixed_state[j] = e.state(targets[j]);
      continue;
    }
    bool found = false;
    for (std::size_t i = 0; i < joint.scope.size(); ++i)
      if (joint.scope[i] == targets[j]) {
        stride_in_joint[j] = jstr[i];
        found = true;
      }
    if (!found)
      throw ValidationError("internal: free target missing from joint scope");
  }

  const auto ostr = strides(out.scope, cards);
  double total = 0.0;
  for (std::size_t i = 0; i < nout; ++i) {
    std::size_t ji = 0;
    bool consistent = true;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const std::size_t digit =
          (i / ostr[j]) % static_cast<std::size_t>(cards[targets[j]]);
      if (fixed_state[j] >= 0) {
        if (digit != static_cast<std::size_t>(fixed_state[j])) {
          consistent = false;
          break;
        }
      } else {
        ji += digit * stride_in_joint[j];
      }
    }
    if (consistent) {
      out.table[i] = joint.table[ji];
      total += joint.table[ji];
    }
  }
  if (!(total > 0.0))
    throw ZeroEvidenceError("evidence has probability zero");
  for (double& x : out.table) x /= total;
  return out;
}

}  // namespace edgedel

#include "edgedel/bp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "edgedel/kernels.hpp"

namespace edgedel {
namespace {

void normalize_or_uniform(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s > 0.0 && std::isfinite(s)) {
    for (double& x : v) x /= s;
  } else {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
  }
}

struct Graph {
  std::vector<Factor> factors;
  // Edge k connects factors[fac[k]] (axis `axis[k]`) with variable var[k].
  std::vector<int> fac;
  std::vector<int> axis;
  std::vector<VarId> var;
  std::vector<std::vector<int>> edges_of_factor;
  std::vector<std::vector<int>> edges_of_var;
};

Graph build_graph(const BayesianNetwork& net, const Evidence& e,
                  const std::vector<int>& cards) {
  Graph g;
  g.edges_of_var.resize(net.num_vars());
  for (const Factor& cpt : net.cpts) {
    Factor f = restrict(cpt, e, cards);
    if (f.scalar()) continue;
    const int fi = static_cast<int>(g.factors.size());
    g.edges_of_factor.emplace_back();
    for (std::size_t a = 0; a < f.scope.size(); ++a) {
      const int k = static_cast<int>(g.var.size());
      g.fac.push_back(fi);
      g.axis.push_back(static_cast<int>(a));
      g.var.push_back(f.scope[a]);
      g.edges_of_factor[fi].push_back(k);
      g.edges_of_var[f.scope[a]].push_back(k);
    }
    g.factors.push_back(std::move(f));
  }
  return g;
}

// m_{f->v}(x) = sum over the factor table, holding v's axis at x, of
// table * product of incoming n over the other axes.
void factor_to_var(const Graph& g, int k, const std::vector<int>& cards,
                   const std::vector<std::vector<double>>& n,
                   std::vector<double>& out) {
  const Factor& f = g.factors[g.fac[k]];
  const int my_axis = g.axis[k];
  const int nd = static_cast<int>(f.scope.size());
  std::fill(out.begin(), out.end(), 0.0);

  const auto& fedges = g.edges_of_factor[g.fac[k]];
  std::vector<const std::vector<double>*> in(nd, nullptr);
  for (int ek : fedges)
    if (ek != k) in[g.axis[ek]] = &n[ek];

  std::vector<int> digit(nd, 0);
  std::vector<int> dim(nd);
  for (int j = 0; j < nd; ++j) dim[j] = cards[f.scope[j]];

  for (std::size_t i = 0; i < f.table.size(); ++i) {
    double p = f.table[i];
    for (int j = 0; j < nd; ++j)
      if (j != my_axis) p *= (*in[j])[digit[j]];
    out[digit[my_axis]] += p;
    for (int j = nd - 1; j >= 0; --j) {
      if (++digit[j] < dim[j]) break;
      digit[j] = 0;
    }
  }
  normalize_or_uniform(out);
}

// n_{v->f} = product of m from the variable's other factors.
void var_to_factor(const Graph& g, int k,
                   const std::vector<std::vector<double>>& m,
                   std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 1.0);
  for (int ek : g.edges_of_var[g.var[k]]) {
    if (ek == k) continue;
    for (std::size_t s = 0; s < out.size(); ++s) out[s] *= m[ek][s];
  }
  normalize_or_uniform(out);
}

}  // namespace

BPResult loopy_bp(const BayesianNetwork& net, const Evidence& e,
                  const BPOptions& opts) {
  validate_evidence(net, e);
  const auto cards = net.cards();
  const int n_vars = net.num_vars();
  Graph g = build_graph(net, e, cards);
  const int n_edges = static_cast<int>(g.var.size());
  const bool par = opts.parallel;

  std::vector<std::vector<double>> m(n_edges), n(n_edges);
  std::vector<std::vector<double>> m_new(n_edges), n_new(n_edges);
  for (int k = 0; k < n_edges; ++k) {
    const int c = cards[g.var[k]];
    m[k].assign(c, 1.0 / c);
    n[k].assign(c, 1.0 / c);
    m_new[k].resize(c);
    n_new[k].resize(c);
  }

  auto beliefs = [&](std::vector<std::vector<double>>& out) {
    for (VarId v = 0; v < n_vars; ++v) {
      if (e.assigns(v)) {
        out[v].assign(cards[v], 0.0);
        out[v][e.state(v)] = 1.0;
        continue;
      }
      out[v].assign(cards[v], 1.0);
      for (int ek : g.edges_of_var[v])
        for (int s = 0; s < cards[v]; ++s) out[v][s] *= m[ek][s];
      normalize_or_uniform(out[v]);
    }
  };

  // Setup half-sweep: one factor-to-variable pass off the uniform messages
  // fixes the baseline beliefs, so edge-free graphs settle in one iteration.
#pragma omp parallel for schedule(static) if (par)
  for (int k = 0; k < n_edges; ++k)
    factor_to_var(g, k, cards, n, m[k]);

  BPResult res;
  res.marginals.resize(n_vars);
  beliefs(res.marginals);
  std::vector<std::vector<double>> prev = res.marginals;

  res.max_residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
#pragma omp parallel for schedule(static) if (par)
    for (int k = 0; k < n_edges; ++k)
      var_to_factor(g, k, m, n_new[k]);
#pragma omp parallel for schedule(static) if (par)
    for (int k = 0; k < n_edges; ++k) {
      factor_to_var(g, k, cards, n_new, m_new[k]);
      if (opts.damping > 0.0)
        for (std::size_t s = 0; s < m_new[k].size(); ++s)
          m_new[k][s] =
              (1.0 - opts.damping) * m_new[k][s] + opts.damping * m[k][s];
    }
    m.swap(m_new);
    n.swap(n_new);

    beliefs(res.marginals);
    double resid = 0.0;
    for (VarId v = 0; v < n_vars; ++v) {
      if (e.assigns(v)) continue;
      for (int s = 0; s < cards[v]; ++s)
        resid = std::max(resid, std::abs(res.marginals[v][s] - prev[v][s]));
    }
    prev = res.marginals;
    res.iterations = it;
    res.max_residual = resid;
    if (resid < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace edgedel

#include "edgedel/enumerate.hpp"

#include <cmath>
#include <string>

#include "edgedel/errors.hpp"

namespace edgedel {

std::vector<double> JointDistribution::marginal(VarId v, const BayesianNetwork& net,
                                                const Evidence& e) const {
  std::vector<double> m(net.variables[v].card(), 0.0);
  if (e.assigns(v)) {
    m[e.state(v)] = 1.0;
    return m;
  }
  std::size_t pos = free_vars.size();
  for (std::size_t i = 0; i < free_vars.size(); ++i)
    if (free_vars[i] == v) pos = i;
  const auto cs = net.cards();
  const auto str = strides(free_vars, cs);
  const std::size_t sv = str[pos];
  const std::size_t cv = static_cast<std::size_t>(cs[v]);
  for (std::size_t i = 0; i < posterior.size(); ++i)
    m[(i / sv) % cv] += posterior[i];
  return m;
}

JointDistribution joint_enumerate(const BayesianNetwork& net, const Evidence& e,
                                  std::uint64_t guard) {
  validate_evidence(net, e);
  const auto cs = net.cards();

  std::uint64_t total = 1;
  for (int c : cs) {
    total *= static_cast<std::uint64_t>(c);
    if (total > guard)
      throw ScaleError("joint_enumerate: state space exceeds guard of " +
                       std::to_string(guard) + " worlds");
  }

  JointDistribution out;
  for (VarId v = 0; v < net.num_vars(); ++v)
    if (!e.assigns(v)) out.free_vars.push_back(v);

  const std::size_t n_free = table_size(out.free_vars, cs);
  out.posterior.assign(n_free, 0.0);

  // Per-variable CPT strides, so a world's probability is a direct product
  // of table lookups.
  std::vector<std::vector<std::size_t>> cpt_strides(net.num_vars());
  for (VarId v = 0; v < net.num_vars(); ++v)
    cpt_strides[v] = strides(net.cpts[v].scope, cs);

  std::vector<int> world(net.num_vars(), 0);
  for (const auto& [v, s] : e.assignments) world[v] = s;

  std::vector<std::size_t> digits(out.free_vars.size(), 0);
  double pe = 0.0;
  for (std::size_t w = 0; w < n_free; ++w) {
    for (std::size_t j = 0; j < out.free_vars.size(); ++j)
      world[out.free_vars[j]] = static_cast<int>(digits[j]);
    double p = 1.0;
    for (VarId v = 0; v < net.num_vars(); ++v) {
      const Factor& cpt = net.cpts[v];
      std::size_t idx = 0;
      for (std::size_t i = 0; i < cpt.scope.size(); ++i)
        idx += static_cast<std::size_t>(world[cpt.scope[i]]) * cpt_strides[v][i];
      p *= cpt.table[idx];
    }
    out.posterior[w] = p;
    pe += p;
    for (std::size_t j = digits.size(); j-- > 0;) {
      if (++digits[j] < static_cast<std::size_t>(cs[out.free_vars[j]])) break;
      digits[j] = 0;
    }
  }

  if (!(pe > 0.0))
    throw ZeroEvidenceError("evidence has probability zero");
  for (double& p : out.posterior) p /= pe;
  out.pe = pe;
  out.log_pe = std::log(pe);
  return out;
}

}  // namespace edgedel

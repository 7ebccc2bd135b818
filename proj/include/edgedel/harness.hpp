#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edgedel/eliminate.hpp"
#include "edgedel/network.hpp"
#include "edgedel/order.hpp"
#include "edgedel/types.hpp"

namespace edgedel {

/// splitmix64. Small, seedable, and stable across platforms, so benchmark
/// outputs are byte-reproducible anywhere.
struct Rng {
  std::uint64_t state = 0;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n).
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  /// Index drawn from a distribution (CDF walk; last index on fallthrough).
  int sample(std::span<const double> dist) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < dist.size(); ++i) {
      acc += dist[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(dist.size()) - 1;
  }
};

/// Draws evidence on every leaf independently from the leaf's exact prior
/// marginal. Priors are computed once at construction; when that exact pass
/// is infeasible the sampler falls back to ancestral sampling of whole
/// worlds, recording the fallback.
class EvidenceSampler {
 public:
  EvidenceSampler(const BayesianNetwork& net, const EliminationOrder& order,
                  const EngineOptions& opts = {});

  /// Throws ValidationError when the network has no leaves and
  /// ZeroEvidenceError when 100 consecutive draws hit Pr(e) = 0.
  Evidence sample(Rng& rng) const;

  bool used_forward_fallback() const { return forward_fallback_; }

 private:
  Evidence sample_once(Rng& rng) const;

  const BayesianNetwork& net_;
  EliminationOrder order_;
  EngineOptions opts_;
  std::vector<VarId> leaves_;
  std::vector<std::vector<double>> leaf_priors_;  // indexed like leaves_
  std::vector<VarId> topo_;                       // fallback sampling order
  bool forward_fallback_ = false;
  bool strictly_positive_ = false;  // skips the Pr(e) > 0 re-check
};

/// Fraction of non-evidence variables whose posterior argmax moved.
/// Argmax ties break to the lowest state index on both sides first.
double count_flips(const std::vector<std::vector<double>>& exact,
                   const std::vector<std::vector<double>>& approx,
                   const Evidence& e);

/// Mean KL over non-evidence variables; +infinity propagates.
double avg_marginal_kl(const std::vector<std::vector<double>>& exact,
                       const std::vector<std::vector<double>>& approx,
                       const Evidence& e);

struct TrialConfig {
  std::string network_label;       // echoed into meta.json
  std::vector<double> thresholds;  // log2 bucket-entry caps, for ED/ID
  int trials = 50;
  std::uint64_t seed = 1;
  bool run_bp = true;
  bool run_ed = true;
  bool run_id = true;
  double tol = 1e-8;  // BP tolerance and fixed-point epsilon
  int max_iters = 100;
  OrderHeuristic heuristic = OrderHeuristic::MinFill;
  // Recompute the (evidence-independent) edge selection inside every trial
  // instead of once per threshold. Outside the standard protocol.
  bool reselect_per_trial = false;
  EngineOptions engine;
  bool parallel_trials = true;
};

struct TrialRow {
  int trial = 0;           // 1-based
  std::string method;      // "bp", "ed", "id"
  double threshold = 0.0;  // meaningful for ed/id only
  bool has_threshold = false;
  double flip_rate = 0.0;
  double avg_kl = 0.0;
  int iterations = 0;
  bool converged = false;
  double cluster_pct = 0.0;  // largest bucket entries, % of original's
  bool has_cluster_pct = false;
  double ln_pr_e = 0.0;  // approximate network's ln Pr(e), ed/id only
  bool has_ln_pr_e = false;
};

struct BenchmarkResult {
  std::vector<TrialRow> rows;
  std::string trials_csv;
  std::string summary_csv;
  std::string meta_json;
  int skipped_trials = 0;
  bool forward_fallback_used = false;
};

/// The full experimental pipeline: per trial, sample leaf evidence, compute
/// ground-truth marginals, run the enabled methods at every threshold, and
/// score flips and average marginal KL against the ground truth. Edge
/// selection happens once per threshold (it ignores evidence). Output is a
/// deterministic function of the config; trials may run concurrently but
/// results are merged in trial order.
BenchmarkResult run_benchmark(const BayesianNetwork& net,
                              const TrialConfig& cfg);

}  // namespace edgedel

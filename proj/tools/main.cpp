// edgedel: exact and approximate inference on discrete Bayesian networks.
//
// Subcommands: exact (bucket elimination), bp (loopy belief propagation),
// delete (evidence-sensitive edge deletion), bounds (divergence report for
// an approximation), bench (full trial harness writing CSV + JSON).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "edgedel/bp.hpp"
#include "edgedel/divergence.hpp"
#include "edgedel/edge_delete.hpp"
#include "edgedel/eliminate.hpp"
#include "edgedel/errors.hpp"
#include "edgedel/harness.hpp"
#include "edgedel/io.hpp"
#include "edgedel/network.hpp"
#include "edgedel/order.hpp"

namespace {

using namespace edgedel;

std::string fmt17(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

BayesianNetwork load_network(const std::string& path) {
  std::vector<std::string> warnings;
  BayesianNetwork net = load_network_file(path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  return net;
}

Evidence load_evidence(const BayesianNetwork& net, const std::string& path) {
  if (path.empty()) return {};
  return parse_evidence(net, read_text_file(path));
}

// --order accepts minfill, minsize, or a file holding the elimination
// sequence as a JSON array of variable names or whitespace-separated names.
EliminationOrder resolve_order(const BayesianNetwork& net,
                               const std::string& arg) {
  if (arg.empty() || arg == "minfill")
    return compute_order(net, OrderHeuristic::MinFill);
  if (arg == "minsize") return compute_order(net, OrderHeuristic::MinSize);

  const std::string text = read_text_file(arg);
  std::vector<std::string> names;
  auto parsed = nlohmann::json::parse(text, nullptr, false);
  if (parsed.is_array()) {
    for (const auto& item : parsed) {
      if (!item.is_string())
        throw ParseError("order file " + arg +
                         ": array entries must be variable names");
      names.push_back(item.get<std::string>());
    }
  } else {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) names.push_back(tok);
  }
  std::vector<VarId> ids;
  for (const std::string& n : names) {
    VarId v = net.find(n);
    if (v < 0)
      throw ParseError("order file " + arg + ": unknown variable " + n);
    ids.push_back(v);
  }
  return explicit_order(net, std::move(ids));
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_file(out_path, content);
}

std::string marginal_csv(const BayesianNetwork& net,
                         const std::vector<std::vector<double>>& marginals,
                         const std::string& header_comment) {
  std::ostringstream out;
  out << "# " << header_comment << "\n";
  out << "variable,state,probability\n";
  for (int v = 0; v < net.num_vars(); ++v)
    for (int s = 0; s < net.variables[v].card(); ++s)
      out << net.variables[v].name << ',' << net.variables[v].states[s] << ','
          << fmt17(marginals[v][s]) << '\n';
  return out.str();
}

int run_exact(const std::string& network, const std::string& evidence,
              const std::string& order_arg, const std::string& out) {
  const BayesianNetwork net = load_network(network);
  const Evidence e = load_evidence(net, evidence);
  const EliminationOrder order = resolve_order(net, order_arg);
  const ClusterStats stats = cluster_stats(net, order);
  const MarginalSet ms = eliminate(net, e, order);
  std::ostringstream header;
  header << "ln_pr_e=" << fmt17(ms.log_pe)
         << " normalized_max=" << fmt17(stats.normalized_max)
         << " order=" << to_string(order.heuristic);
  emit(out, marginal_csv(net, ms.marginals, header.str()));
  return 0;
}

int run_bp(const std::string& network, const std::string& evidence,
           double tol, int max_iters, double damping, const std::string& out) {
  const BayesianNetwork net = load_network(network);
  const Evidence e = load_evidence(net, evidence);
  BPOptions opts;
  opts.tolerance = tol;
  opts.max_iterations = max_iters;
  opts.damping = damping;
  const BPResult res = loopy_bp(net, e, opts);
  std::ostringstream header;
  header << "iterations=" << res.iterations
         << " converged=" << (res.converged ? 1 : 0)
         << " max_residual=" << fmt17(res.max_residual);
  emit(out, marginal_csv(net, res.marginals, header.str()));
  return 0;
}

int run_delete(const std::string& network, const std::string& evidence,
               double threshold, const std::string& mode, double epsilon,
               int max_iters, const std::string& order_arg,
               const std::string& emit_network,
               const std::string& emit_plan) {
  const BayesianNetwork net = load_network(network);
  const Evidence e = load_evidence(net, evidence);
  const EliminationOrder order = resolve_order(net, order_arg);

  DeletionPlan plan = select_edges(net, order, threshold);
  BayesianNetwork approx;
  std::ostringstream status;
  if (mode == "ed") {
    approx = exact_posterior_deletion(net, e, plan, order);
    status << "mode=ed";
  } else if (mode == "id") {
    FixedPointOptions opts;
    opts.epsilon = epsilon;
    opts.max_iterations = max_iters;
    opts.order = &order;
    auto [n, trace] = fixed_point_deletion(net, e, plan, opts);
    approx = std::move(n);
    status << "mode=id iterations=" << trace.iterations
           << " converged=" << (trace.converged ? 1 : 0);
  } else if (mode == "vanengelen") {
    approx = prior_arc_removal(net, plan, order);
    status << "mode=vanengelen";
  } else {
    throw ValidationError("unknown --mode " + mode +
                          " (expected ed, id, or vanengelen)");
  }

  const double before = cluster_stats(net, order).normalized_max;
  const double after = cluster_stats(approx, order).normalized_max;
  status << " deleted_edges=" << plan.edges.size() << " normalized_max="
         << fmt17(before) << "->" << fmt17(after);
  for (const EdgeRef& ed : plan.edges)
    status << ' ' << net.variables[ed.parent].name << "->"
           << net.variables[ed.child].name;
  std::cout << status.str() << "\n";

  if (!emit_network.empty())
    write_text_file(emit_network, serialize_network(approx));
  if (!emit_plan.empty()) write_text_file(emit_plan, serialize_plan(net, plan));
  return 0;
}

int run_bounds(const std::string& network, const std::string& approx_network,
               const std::string& plan_path, const std::string& evidence,
               bool exact) {
  const BayesianNetwork net = load_network(network);
  const BayesianNetwork approx = load_network(approx_network);
  const DeletionPlan plan = parse_plan(net, read_text_file(plan_path));
  const Evidence e = load_evidence(net, evidence);
  const BoundReport rep = bound_report(net, approx, plan, e, exact);
  std::cout << serialize_bound_report(rep);
  return 0;
}

int run_bench(const std::string& network, int trials, std::uint64_t seed,
              const std::string& thresholds, const std::string& methods,
              double tol, int max_iters, bool reselect,
              const std::string& out_dir) {
  const BayesianNetwork net = load_network(network);
  TrialConfig cfg;
  cfg.network_label = std::filesystem::path(network).filename().string();
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.tol = tol;
  cfg.max_iters = max_iters;
  cfg.reselect_per_trial = reselect;

  std::istringstream tin(thresholds);
  std::string tok;
  while (std::getline(tin, tok, ','))
    if (!tok.empty()) cfg.thresholds.push_back(std::stod(tok));

  cfg.run_bp = cfg.run_ed = cfg.run_id = false;
  std::istringstream min(methods);
  while (std::getline(min, tok, ',')) {
    if (tok == "bp")
      cfg.run_bp = true;
    else if (tok == "ed")
      cfg.run_ed = true;
    else if (tok == "id")
      cfg.run_id = true;
    else if (!tok.empty())
      throw ValidationError("unknown method " + tok +
                            " (expected bp, ed, or id)");
  }

  const BenchmarkResult res = run_benchmark(net, cfg);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_text_file((dir / "trials.csv").string(), res.trials_csv);
  write_text_file((dir / "summary.csv").string(), res.summary_csv);
  write_text_file((dir / "meta.json").string(), res.meta_json);
  std::cout << res.summary_csv;
  if (res.skipped_trials)
    std::cout << "# skipped_trials=" << res.skipped_trials << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Bayesian network inference by edge deletion"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread cap (0 = default)");

  std::string network, evidence, order_arg, out;

  auto* exact = app.add_subcommand("exact", "Exact posterior marginals");
  exact->add_option("--network", network, "network file (.json or .bif)")
      ->required();
  exact->add_option("--evidence", evidence, "evidence JSON file");
  exact->add_option("--order", order_arg, "minfill|minsize|FILE");
  exact->add_option("--out", out, "output CSV (default stdout)");

  double tol = 1e-8, damping = 0.0;
  int max_iters = 100;
  auto* bp = app.add_subcommand("bp", "Loopy belief propagation marginals");
  bp->add_option("--network", network)->required();
  bp->add_option("--evidence", evidence);
  bp->add_option("--tol", tol, "convergence tolerance");
  bp->add_option("--max-iters", max_iters);
  bp->add_option("--damping", damping, "blend factor on new messages");
  bp->add_option("--out", out, "output CSV (default stdout)");

  double threshold = 20.0, epsilon = 1e-8;
  std::string mode = "ed", emit_network, emit_plan;
  auto* del = app.add_subcommand("delete", "Delete edges until tractable");
  del->add_option("--network", network)->required();
  del->add_option("--evidence", evidence);
  del->add_option("--threshold", threshold, "log2 bucket-entry cap")
      ->required();
  del->add_option("--mode", mode, "ed|id|vanengelen");
  del->add_option("--epsilon", epsilon, "fixed-point tolerance (id)");
  del->add_option("--max-iters", max_iters, "fixed-point cap (id)");
  del->add_option("--order", order_arg, "minfill|minsize|FILE");
  del->add_option("--emit-network", emit_network, "write approximate network");
  del->add_option("--emit-plan", emit_plan, "write deletion plan JSON");

  std::string approx_network, plan_path;
  bool exact_flag = false;
  auto* bounds = app.add_subcommand("bounds", "Divergence report");
  bounds->add_option("--network", network)->required();
  bounds->add_option("--approx-network", approx_network)->required();
  bounds->add_option("--plan", plan_path)->required();
  bounds->add_option("--evidence", evidence);
  bounds->add_flag("--exact", exact_flag, "also compute the exact KL");

  int trials = 50;
  std::uint64_t seed = 1;
  std::string thresholds, methods = "bp,ed,id", out_dir;
  bool reselect = false;
  auto* bench = app.add_subcommand("bench", "Trial harness");
  bench->add_option("--network", network)->required();
  bench->add_option("--trials", trials);
  bench->add_option("--seed", seed);
  bench->add_option("--thresholds", thresholds, "comma list of log2 caps");
  bench->add_option("--methods", methods, "comma list from bp,ed,id");
  bench->add_option("--tol", tol);
  bench->add_option("--max-iters", max_iters);
  bench->add_flag("--reselect-per-trial", reselect,
                  "redo edge selection in every trial");
  bench->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (exact->parsed()) return run_exact(network, evidence, order_arg, out);
    if (bp->parsed())
      return run_bp(network, evidence, tol, max_iters, damping, out);
    if (del->parsed())
      return run_delete(network, evidence, threshold, mode, epsilon,
                        max_iters, order_arg, emit_network, emit_plan);
    if (bounds->parsed())
      return run_bounds(network, approx_network, plan_path, evidence,
                        exact_flag);
    if (bench->parsed())
      return run_bench(network, trials, seed, thresholds, methods, tol,
                       max_iters, reselect, out_dir);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <string>
#include <vector>

#include "edgedel/divergence.hpp"
#include "edgedel/edge_delete.hpp"
#include "edgedel/network.hpp"
#include "edgedel/types.hpp"

namespace edgedel {

/// Canonical network format:
///   { "name": str,
///     "variables": [{"name": str, "states": [str, ...]}, ...],
///     "cpts": [{"child": str, "parents": [str, ...], "table": [real, ...]},
///              ...] }
/// Tables are row-major with the child varying fastest. Rows off 1 by at
/// most 1e-9 are accepted as-is; off by at most 1e-6 they are renormalized
/// with a warning; beyond that parsing fails.
BayesianNetwork parse_network(const std::string& text,
                              std::vector<std::string>* warnings = nullptr);

/// Inverse of parse_network; reparsing reproduces tables bit-for-bit.
std::string serialize_network(const BayesianNetwork& net);

/// Importer for the discrete-variable subset of the BIF 0.15 text format:
/// network/variable/probability blocks, `table` entries for root variables,
/// one parenthesized row per parent configuration otherwise, property lines
/// ignored. Anything else fails naming the construct.
BayesianNetwork parse_bif(const std::string& text,
                          std::vector<std::string>* warnings = nullptr);

/// Reads a network file, dispatching on extension: .bif uses the BIF
/// importer, everything else the canonical JSON format.
BayesianNetwork load_network_file(const std::string& path,
                                  std::vector<std::string>* warnings = nullptr);

/// Evidence files map variable names to a state label or state index:
///   { "Flu": "true", "Fever": 1 }
Evidence parse_evidence(const BayesianNetwork& net, const std::string& text);

std::string serialize_evidence(const BayesianNetwork& net, const Evidence& e);

/// Plan files:
///   { "at_most_one_per_child": bool,
///     "edges": [{"parent": str, "child": str,
///                "replacement": [real, ...]}, ...] }
/// with "replacement" optional while a plan is still unfilled.
DeletionPlan parse_plan(const BayesianNetwork& net, const std::string& text);

std::string serialize_plan(const BayesianNetwork& net,
                           const DeletionPlan& plan);

/// BoundReport as JSON; an infinite exact_kl serializes as the string "inf".
std::string serialize_bound_report(const BoundReport& rep);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace edgedel

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace edgedel {

using VarId = std::int32_t;

/// A discrete variable: dense id, display name, ordered state labels.
struct Variable {
  VarId id = -1;
  std::string name;
  std::vector<std::string> states;

  int card() const { return static_cast<int>(states.size()); }
};

/// Partial assignment of variables to observed state indices.
struct Evidence {
  // Ordered map: iteration order is deterministic by variable id.
  std::map<VarId, int> assignments;

  bool assigns(VarId v) const { return assignments.count(v) != 0; }
  int state(VarId v) const { return assignments.at(v); }
  bool empty() const { return assignments.empty(); }
  std::size_t size() const { return assignments.size(); }
  void set(VarId v, int state) { assignments[v] = state; }
};

/// A complete world: one state index per network variable.
struct Assignment {
  std::vector<int> states;
};

}  // namespace edgedel

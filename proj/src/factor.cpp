#include "edgedel/factor.hpp"

namespace edgedel {

std::size_t table_size(std::span<const VarId> scope, const std::vector<int>& cards) {
  std::size_t n = 1;
  for (VarId v : scope) n *= static_cast<std::size_t>(cards[v]);
  return n;
}

std::vector<std::size_t> strides(std::span<const VarId> scope,
                                 const std::vector<int>& cards) {
  std::vector<std::size_t> s(scope.size());
  std::size_t acc = 1;
  for (std::size_t i = scope.size(); i-- > 0;) {
    s[i] = acc;
    acc *= static_cast<std::size_t>(cards[scope[i]]);
  }
  return s;
}

}  // namespace edgedel

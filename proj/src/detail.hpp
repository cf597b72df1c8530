#pragma once

#include "linkmap/cross.hpp"

#include <span>
#include <string>
#include <vector>

namespace linkmap::detail {

/// Indices of the named groups in map order; every group when `names` is empty.
inline std::vector<std::size_t> select_groups(const Cross& cross, std::span<const std::string> names) {
  std::vector<std::size_t> out;
  if (names.empty()) {
    for (std::size_t g = 0; g < cross.groups().size(); ++g) out.push_back(g);
    return out;
  }
  std::vector<bool> take(cross.groups().size(), false);
  for (const auto& name : names) {
    bool found = false;
    for (std::size_t g = 0; g < cross.groups().size(); ++g)
      if (cross.groups()[g].name == name) take[g] = found = true;
    if (!found) throw DataError("unknown linkage group '" + name + "'");
  }
  for (std::size_t g = 0; g < take.size(); ++g)
    if (take[g]) out.push_back(g);
  return out;
}

}  // namespace linkmap::detail

#include "seclab/program.hpp"

#include <algorithm>

namespace seclab {

std::optional<Interface> Interface::link(const Interface& a, const Interface& b) {
  Interface out = a;
  for (const auto& [c, ci] : b.comps) {
    if (out.comps.count(c)) return std::nullopt;
    out.comps[c] = ci;
  }
  // Exactly one side carries the main component.
  if (a.has_main() && b.has_main()) return std::nullopt;
  out.main_comp = a.has_main() ? a.main_comp : b.main_comp;
  return out;
}

ProcIds ProcIds::sequential(const std::map<int, std::vector<std::string>>& procs) {
  ProcIds out;
  for (const auto& [comp, names] : procs) {
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    int next = 0;
    for (const auto& n : sorted) out.ids[{comp, n}] = next++;
  }
  return out;
}

}  // namespace seclab

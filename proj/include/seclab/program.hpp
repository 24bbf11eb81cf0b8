#pragma once

// Interface structure shared by source and target programs: components,
// exports, imports, static buffers and the main entry point.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "seclab/memory.hpp"

namespace seclab {

using ProcRef = std::pair<int, std::string>;  // (component, procedure)

struct ComponentInterface {
  std::set<std::string> exports;
  std::set<ProcRef> imports;

  friend bool operator==(const ComponentInterface&, const ComponentInterface&) = default;
};

struct Interface {
  std::map<int, ComponentInterface> comps;
  int main_comp = -1;  // -1: no entry point (context / program part)

  bool has_main() const { return main_comp >= 0; }

  bool defines(int comp) const { return comps.count(comp) != 0; }
  bool exports(int comp, const std::string& proc) const {
    auto it = comps.find(comp);
    return it != comps.end() && it->second.exports.count(proc) != 0;
  }
  bool imports(int comp, int callee, const std::string& proc) const {
    auto it = comps.find(comp);
    return it != comps.end() && it->second.imports.count({callee, proc}) != 0;
  }

  // Merge of two disjoint interfaces (context + program linking).
  static std::optional<Interface> link(const Interface& a, const Interface& b);

  friend bool operator==(const Interface&, const Interface&) = default;
};

// Per-program assignment of code-block ids to procedures. Function-pointer
// values expose these ids, so a compiler must preserve them and a
// back-translation must copy them from its input.
struct ProcIds {
  std::map<ProcRef, int> ids;

  int id_of(const ProcRef& p) const {
    auto it = ids.find(p);
    return it == ids.end() ? -1 : it->second;
  }
  std::optional<ProcRef> proc_of(int comp, int block) const {
    for (const auto& [ref, id] : ids)
      if (ref.first == comp && id == block) return ref;
    return std::nullopt;
  }
  // Default policy: procedures of a component get ids 0.. in name order.
  static ProcIds sequential(const std::map<int, std::vector<std::string>>& procs);

  friend bool operator==(const ProcIds&, const ProcIds&) = default;
};

using Buffers = std::map<int, std::vector<Value>>;  // static block 0 per component

// Optional human-readable component names (used by the CLI only).
using CompNames = std::map<std::string, int>;

}  // namespace seclab

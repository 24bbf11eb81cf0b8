#pragma once

// Source-to-target compiler. Expressions are evaluated on a per-component
// runtime stack held in reserved block -1 (never exposed to other
// components); results travel in the communication register. Procedure ids,
// interfaces and static buffers are preserved, and allocations happen in
// the same order as in the source, so compiled runs relate to source runs
// under the identity renaming.

#include "seclab/source.hpp"
#include "seclab/target.hpp"

namespace seclab {

struct CompilerConfig {
  std::int64_t stack_words = 4096;  // size of each component's block -1
};

MachProgram compile(const SourceProgram& prog, const CompilerConfig& cfg = {});

}  // namespace seclab

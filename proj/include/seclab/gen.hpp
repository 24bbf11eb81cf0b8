#pragma once

// Seeded program generators for the property-test drivers. Generation is a
// pure function of the config: the same seed always yields the same program.
// Generated code is shape-constrained (typed registers, in-bounds offsets)
// so that most runs neither get stuck nor diverge, and is biased toward
// passing pointers across components so runs actually share memory.

#include <cstdint>
#include <set>

#include "seclab/source.hpp"
#include "seclab/target.hpp"

namespace seclab {

struct GenConfig {
  std::uint64_t seed = 0;
  int components = 2;       // >= 2: component 0 carries main
  int procs_per_comp = 2;   // >= 1
  int max_depth = 4;        // source expression depth
  int max_snippets = 8;     // target code snippets per procedure
  double share_prob = 0.5;  // bias toward passing static-buffer pointers
  std::int64_t fuel = 10000;
};

// Whole source program: component 0 exports main; every component exports
// its procedures and imports a random selection of the others'.
SourceProgram gen_source_program(const GenConfig& cfg);

// Whole target program of the same interface discipline, written directly
// in machine code (no compiler involved): straight-line snippets with
// forward branches, cross-component calls and pointer stashing.
MachProgram gen_mach_program(const GenConfig& cfg);

// Target context completing a program part: exports everything the part
// imports from the context components, calls back into the part's exports.
// `ptr_args` lists the part's exports whose argument is a pointer (the
// context then dereferences/stashes it instead of computing with it).
MachProgram gen_mach_context(const GenConfig& cfg, const Interface& part,
                             const std::set<ProcRef>& ptr_args = {});

}  // namespace seclab

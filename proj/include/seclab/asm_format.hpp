#pragma once

// Textual machine-program format for hand-written contexts. One instruction
// per line using the same mnemonics as to_string(Instr); `L:` is sugar for
// a label instruction. Directives:
//
//   .main <comp>            entry component (omit for contexts)
//   .name <string> <comp>   human-readable component name
//   .component <comp>       opens a component section
//   .export <proc>          .import <comp> <proc>
//   .buffer <val> ...       static block 0 cells (ints, `error`, pointers)
//   .stack <size>           runtime stack block -1 (compiled components)
//   .proc <name> <id>       opens a procedure; <id> is its code-block id
//
// `#` starts a comment. parse(print(p)) == p.

#include <string>

#include "seclab/target.hpp"

namespace seclab {

std::string mach_to_asm(const MachProgram& p);
// Throws std::runtime_error with a line number on malformed input.
MachProgram mach_from_asm(const std::string& text);

}  // namespace seclab

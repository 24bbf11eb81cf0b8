#pragma once

// Shipped example programs.
//
// Net scenario: component 0 (Main) owns a 9-cell static buffer — an 8-cell
// io buffer followed by a balance cell — and passes a pointer to the buffer
// base to the Net library (component 1) twice. The safety property is that
// send() never changes the balance cell. The benign context only touches
// the io cells; the stashing context stores the received pointer away and
// overwrites the balance through it (a legal write — the pointer grants the
// whole block).
//
// Turn-taking scenario: the program (component 0) allocates a private and a
// shared block and hands the shared one to the context. One context
// temporarily writes 42 into the shared cell and reverts it before
// returning; the other never writes. Their traces are Identity-related, but
// a naive whole-memory cross-run relation fails while the temporary value
// is live; the turn-taking relation does not.

#include "seclab/source.hpp"
#include "seclab/target.hpp"
#include "seclab/traces.hpp"

namespace seclab {

SourceProgram net_program();          // program part: component 0, exports main
MachProgram net_context_benign();     // context part: component 1, exports send
MachProgram net_context_stashing();
NoWrite net_nowrite();                // the balance cell, scoped to Main->Net.send

MachProgram tt_program();             // component 0, used as both base programs
MachProgram tt_context_revert();      // temporary 42 write, reverted
MachProgram tt_context_quiet();       // read-only context
std::set<int> tt_part();              // program-side components: {0}

}  // namespace seclab

#pragma once

// Traces: interaction events (cross-component calls and returns) and the
// enriched data-flow events emitted by the target machine. Both carry full
// memory snapshots; data-flow events additionally snapshot the register
// file, which is what makes trace-directed back-translation possible.

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seclab/memory.hpp"
#include "seclab/ops.hpp"
#include "seclab/program.hpp"

namespace seclab {

enum class Reg { Com, One, Aux1, Aux2, Sp, Ra, Arg };
constexpr int kNumRegs = 7;
constexpr std::array<Reg, kNumRegs> kAllRegs = {Reg::Com, Reg::One, Reg::Aux1,
                                                Reg::Aux2, Reg::Sp, Reg::Ra, Reg::Arg};
std::string to_string(Reg r);

using RegFile = std::array<Value, kNumRegs>;

inline Value& reg_at(RegFile& rf, Reg r) { return rf[static_cast<int>(r)]; }
inline const Value& reg_at(const RegFile& rf, Reg r) { return rf[static_cast<int>(r)]; }

enum class EventTag {
  Call,   // cross-component call (interaction)
  Ret,    // cross-component return (interaction)
  Const,  // data-flow: constant/label materialisation (Const, PtrOfLabel, Jal)
  Mov,    // data-flow: register copy
  BinOp,  // data-flow: arithmetic/comparison
  Load,   // data-flow: memory read
  Store,  // data-flow: memory write
  Alloc,  // data-flow: block allocation
};

inline bool is_interaction(EventTag t) { return t == EventTag::Call || t == EventTag::Ret; }

// One event. Interaction events use {mem, caller, callee, proc, arg};
// for Ret, caller/callee are the returning and resumed components and
// arg is the returned value. Data-flow events additionally carry the
// register-file snapshot and the component that executed the instruction.
struct Event {
  EventTag tag = EventTag::Call;
  Memory mem;
  int caller = -1;
  int callee = -1;
  std::string proc;
  Value arg;

  RegFile reg;
  int cur = -1;
  // Operand registers of the instruction that produced a data-flow event
  // (defaults for interaction events). Store records its address register
  // in rd; BinOp additionally records the operator.
  Reg rd = Reg::Com;
  Reg rs1 = Reg::Com;
  Reg rs2 = Reg::Com;
  BinOpKind bop = BinOpKind::Add;

  friend bool operator==(const Event&, const Event&) = default;
};

Event make_call(Memory mem, int caller, int callee, std::string proc, Value arg);
Event make_ret(Memory mem, int from, int to, Value val);

using Trace = std::vector<Event>;

std::string to_string(const Event& e);

// Drops data-flow events and the register snapshots of the remaining
// interaction events, leaving the plain interaction trace.
Trace remove_df(const Trace& t);

// Blocks shared with other components up to and including event index i:
// for each event, the argument/return pointer's block plus everything
// reachable from already-shared blocks through the event's own memory
// (data pointers stored in shared blocks are themselves shared).
// History-sensitive: once shared, always shared. Block ids < 0 never enter.
std::set<Loc> shared_blocks(const Trace& t);
std::vector<std::set<Loc>> shared_blocks_prefixes(const Trace& t);

// Memory projections induced by a sharing set.
Memory shared_proj(const Memory& m, const std::set<Loc>& shared);
Memory private_proj(const Memory& m, const std::set<Loc>& shared);

// Structural event match: same variant, same component pair, same procedure
// name. Payload values and memories are compared separately (under a
// renaming) by the relations module.
bool match_events(const Event& a, const Event& b);

// Interaction traces are well bracketed: returns match calls stack-wise.
bool well_bracketed(const Trace& t);

// Safety predicate "location loc is never changed across any call/return
// span": for every Call with a matching Ret, the value at loc in the call
// memory equals the value in the return memory.
struct NoWrite {
  int comp = 0;
  int block = 0;
  std::int64_t off = 0;
  // Optional span filters: only calls from `caller` to `callee`.`proc` are
  // checked (-1 / empty match anything).
  int caller = -1;
  int callee = -1;
  std::string proc;
};
bool check_safety_nowrite(const Trace& t, const NoWrite& loc);

}  // namespace seclab

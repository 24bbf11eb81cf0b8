#pragma once

// The target machine: register-based code organised in per-procedure CODE
// blocks over the same block memory. Every executed instruction emits a
// data-flow event carrying memory and register snapshots; cross-component
// Call/Return additionally invalidate the register file (all but the
// communication register) so nothing leaks across boundaries.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seclab/memory.hpp"
#include "seclab/program.hpp"
#include "seclab/source.hpp"  // BinOpKind, eval_binop, Outcome, RunResult
#include "seclab/traces.hpp"

namespace seclab {

struct Instr {
  enum class Op {
    Const,       // rd := immediate (Int, Error, CODE pointer, or a DATA
                 // pointer into the emitting component's own block 0 / -1)
    Mov,         // rd := rs
    BinOp,       // rd := rs1 op rs2
    Label,       // no-op marker; labels resolve component-wide
    PtrOfLabel,  // rd := CODE pointer just past the label
    Load,        // rd := *rs
    Store,       // *rd := rs
    Alloc,       // rd := fresh block of size rs (positive Int)
    Bnz,         // branch to label if rs is a nonzero Int
    Jump,        // jump to CODE pointer in rs (same component)
    JumpFunPtr,  // jump to procedure entry (offset 0) pointer in rs (same component)
    Jal,         // rra := return pointer, jump to label; emits a Const event
    Call,        // cross-component call to an imported export
    Return,      // cross-component return
    Nop,
    Halt,
  };

  Op op = Op::Nop;
  Value v;              // Const immediate
  BinOpKind bop = BinOpKind::Add;
  Reg rd = Reg::Com;
  Reg rs1 = Reg::Com;
  Reg rs2 = Reg::Com;
  std::string label;    // Label/PtrOfLabel/Bnz/Jal
  int comp = -1;        // Call target component
  std::string proc;     // Call target procedure

  friend bool operator==(const Instr&, const Instr&) = default;
};

// Instruction builders.
Instr i_const(Value v, Reg rd);
Instr i_mov(Reg rs, Reg rd);
Instr i_binop(BinOpKind op, Reg rs1, Reg rs2, Reg rd);
Instr i_label(std::string l);
Instr i_ptroflabel(std::string l, Reg rd);
Instr i_load(Reg addr, Reg rd);
Instr i_store(Reg addr, Reg rs);
Instr i_alloc(Reg rd, Reg rsize);
Instr i_bnz(Reg rs, std::string l);
Instr i_jump(Reg rs);
Instr i_jumpfunptr(Reg rs);
Instr i_jal(std::string l);
Instr i_call(int comp, std::string proc);
Instr i_return();
Instr i_nop();
Instr i_halt();

std::string to_string(const Instr& in);

struct MachProgram {
  Interface intf;
  std::map<ProcRef, std::vector<Instr>> procs;
  Buffers buffers;
  ProcIds ids;
  CompNames names;
  // Components whose block -1 runtime stack the loader must create
  // (compiled components only), with the block size in words.
  std::map<int, std::int64_t> runtime_stack;

  const std::vector<Instr>* code(const ProcRef& p) const {
    auto it = procs.find(p);
    return it == procs.end() ? nullptr : &it->second;
  }
};

bool well_formed(const MachProgram& p, std::string* why = nullptr);

// Reserved cells in a compiled component's block -1.
constexpr std::int64_t kStackTopCell = 0;   // pointer to the next free cell
constexpr std::int64_t kIntraFlagCell = 1;  // 1 while an intra-component
                                            // entry (Jal/JumpFunPtr) is in flight
constexpr std::int64_t kStackFirstFree = 2;

class MachMachine {
 public:
  explicit MachMachine(const MachProgram& prog);

  enum class Status { Running, Done, Stuck };

  // One instruction. Fills *ev with the data-flow event of the step.
  // With `interaction_only`, only Call/Return produce events and those are
  // built directly as interaction events (independent instrumentation path
  // used to cross-check enrichment).
  Status step(std::optional<Event>* ev = nullptr, bool interaction_only = false);

  Status status() const { return status_; }
  const Memory& memory() const { return mem_; }
  const RegFile& registers() const { return reg_; }
  const Pointer& pc() const { return pc_; }
  int current() const { return pc_.comp; }
  std::size_t stack_depth() const { return stack_.size(); }

  // Test hook: overwrite one memory cell in place (used by the relation
  // regression tests to fabricate a violated private cell).
  bool poke(const Pointer& p, const Value& v) { return mem_.store(p, v); }

 private:
  Status stuck() { return status_ = Status::Stuck; }
  const Instr* fetch() const;
  std::optional<Pointer> find_label(int comp, const std::string& label) const;
  Event df(EventTag tag, Value payload, const RegFile& regsnap, const Instr* in = nullptr) const;

  const MachProgram* prog_;
  Memory mem_;
  RegFile reg_;
  Pointer pc_;
  std::vector<Pointer> stack_;  // cross-component return addresses
  Status status_ = Status::Running;
};

// Runs the program collecting the full data-flow trace.
RunResult run_mach(const MachProgram& prog, std::int64_t fuel);
// Runs the program collecting interaction events only (independent path).
RunResult run_mach_interaction(const MachProgram& prog, std::int64_t fuel);

// Linking of disjoint program parts (nullopt: overlapping components or
// two entry points) and projection onto a component set.
std::optional<MachProgram> link_mach(const MachProgram& a, const MachProgram& b);
MachProgram proj_mach(const MachProgram& p, const std::set<int>& comps);

}  // namespace seclab

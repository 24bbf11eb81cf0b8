#pragma once

// The safe source language: component-structured expressions evaluated by a
// small-step CPS machine. Cross-component calls and returns emit interaction
// events; everything else is silent.

#include <memory>
#include <string>
#include <vector>

#include "seclab/memory.hpp"
#include "seclab/ops.hpp"
#include "seclab/program.hpp"
#include "seclab/traces.hpp"

namespace seclab {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Tag {
    Val,      // literal (Int, Error or CODE pointer; DATA literals are ill-formed)
    Arg,      // current procedure argument
    Local,    // pointer to own static buffer: (data, cur, 0, 0)
    BinOp,
    Seq,
    If,       // condition must evaluate to an Int; nonzero takes the then-branch
    Alloc,    // fresh block in the current component, size must be a positive Int
    Deref,
    Assign,   // rhs value evaluated first, then the target pointer
    Call,     // direct call, same-component or imported cross-component
    CallPtr,  // call through a function pointer of the current component
    FunPtr,   // (code, cur, procedure_id, 0)
    Exit,     // terminates the whole program with result 0
  };

  Tag tag = Tag::Exit;
  Value val;
  BinOpKind op = BinOpKind::Add;
  ExprPtr a, b, c;
  int comp = -1;
  std::string proc;
};

ExprPtr e_val(Value v);
ExprPtr e_int(std::int64_t v);
ExprPtr e_err();
ExprPtr e_arg();
ExprPtr e_local();
ExprPtr e_binop(BinOpKind op, ExprPtr a, ExprPtr b);
ExprPtr e_seq(ExprPtr a, ExprPtr b);
ExprPtr e_seq(std::vector<ExprPtr> es);  // right-nested; empty => 0
ExprPtr e_if(ExprPtr c, ExprPtr t, ExprPtr f);
ExprPtr e_alloc(ExprPtr n);
ExprPtr e_deref(ExprPtr p);
ExprPtr e_assign(ExprPtr p, ExprPtr v);
ExprPtr e_call(int comp, std::string proc, ExprPtr arg);
ExprPtr e_callptr(ExprPtr fp, ExprPtr arg);
ExprPtr e_funptr(std::string proc);
ExprPtr e_exit();

struct SourceProgram {
  Interface intf;
  std::map<ProcRef, ExprPtr> procs;
  Buffers buffers;
  ProcIds ids;
  CompNames names;

  const ExprPtr* body(const ProcRef& p) const {
    auto it = procs.find(p);
    return it == procs.end() ? nullptr : &it->second;
  }
};

// Structural checks: exports have bodies, imports point at exports of other
// components, direct cross-calls are imported, function pointers and local
// calls reference existing procedures, no DATA-pointer literals anywhere,
// static buffers are pointer-free, procedure ids are injective per component.
bool well_formed(const SourceProgram& p, std::string* why = nullptr);

enum class Outcome { Done, Stuck, OutOfFuel };
std::string to_string(Outcome o);

struct RunResult {
  Trace trace;
  Outcome outcome = Outcome::OutOfFuel;
  Value result;  // meaningful when outcome == Done
  std::int64_t steps = 0;
};

struct Kont;
using KontPtr = std::shared_ptr<const Kont>;  // empty pointer = Kstop

struct Kont {
  enum class Tag {
    Binop1,    // waiting for the first operand; e holds the second
    Binop2,    // waiting for the second operand; v holds the first
    Seq,       // e holds the tail expression
    If,        // e / e2 hold the branches
    Alloc,
    Deref,
    Assign1,   // rhs value being computed; e holds the target expression
    Assign2,   // target pointer being computed; v holds the rhs value
    Call,      // comp/proc hold the callee; argument being computed
    CallPtr1,  // function pointer being computed; e holds the argument
    CallPtr2,  // argument being computed; v holds the function pointer
  };

  Tag tag;
  BinOpKind op = BinOpKind::Add;
  ExprPtr e, e2;
  Value v;
  int comp = -1;
  std::string proc;
  KontPtr next;
};

class SourceMachine {
 public:
  explicit SourceMachine(const SourceProgram& prog);

  enum class Status { Running, Done, Stuck };

  // One small step; fills *ev when the step emits an interaction event.
  Status step(std::optional<Event>* ev = nullptr);

  Status status() const { return status_; }
  const Memory& memory() const { return mem_; }
  int current() const { return cur_; }
  Value result() const { return result_; }
  std::size_t stack_depth() const { return stack_.size(); }

 private:
  struct Frame {
    int comp;
    Value arg;
    KontPtr k;
  };

  Status stuck() { return status_ = Status::Stuck; }
  Status ret_value(Value v, std::optional<Event>* ev);

  const SourceProgram* prog_;
  Memory mem_;
  int cur_;
  Value arg_;
  ExprPtr e_;
  KontPtr k_;
  std::vector<Frame> stack_;
  Status status_ = Status::Running;
  Value result_;
};

RunResult run_source(const SourceProgram& prog, std::int64_t fuel);

// Linking of disjoint program parts (nullopt: overlapping components or
// two entry points) and projection onto a component set.
std::optional<SourceProgram> link_source(const SourceProgram& a, const SourceProgram& b);
SourceProgram proj_source(const SourceProgram& p, const std::set<int>& comps);

}  // namespace seclab

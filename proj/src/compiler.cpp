#include "seclab/compiler.hpp"

namespace seclab {

namespace {

// Code emission context for one procedure.
struct Emitter {
  const SourceProgram* prog;
  int comp;
  int* label_counter;  // shared per component for determinism
  std::vector<Instr> code;

  std::string fresh_label() { return "L" + std::to_string((*label_counter)++); }
  static std::string entry_label(const std::string& proc) { return "ent$" + proc; }

  void emit(Instr i) { code.push_back(std::move(i)); }

  Value stack_cell(std::int64_t off) {
    return Value::pointer({Permission::Data, comp, -1, off});
  }

  // Push a register onto the expression stack. Clobbers rsp/raux1/raux2,
  // so `r` must be a different register.
  void push(Reg r) {
    emit(i_const(stack_cell(kStackTopCell), Reg::Sp));
    emit(i_load(Reg::Sp, Reg::Aux1));
    emit(i_store(Reg::Aux1, r));
    emit(i_const(Value::integer(1), Reg::Aux2));
    emit(i_binop(BinOpKind::Add, Reg::Aux1, Reg::Aux2, Reg::Aux1));
    emit(i_store(Reg::Sp, Reg::Aux1));
  }

  // Pop the top of the expression stack into `r` (anything but raux1/rsp).
  void pop(Reg r) {
    emit(i_const(stack_cell(kStackTopCell), Reg::Sp));
    emit(i_load(Reg::Sp, Reg::Aux1));
    emit(i_const(Value::integer(1), Reg::Aux2));
    emit(i_binop(BinOpKind::Sub, Reg::Aux1, Reg::Aux2, Reg::Aux1));
    emit(i_store(Reg::Sp, Reg::Aux1));
    emit(i_load(Reg::Aux1, r));
  }

  // Marks the next procedure entry as intra-component (Jal / JumpFunPtr).
  void set_intra_flag() {
    emit(i_const(stack_cell(kIntraFlagCell), Reg::Sp));
    emit(i_const(Value::integer(1), Reg::Aux1));
    emit(i_store(Reg::Sp, Reg::Aux1));
  }

  // Compiles `e`; at runtime the result lands in rcom. rarg is preserved,
  // everything else is scratch.
  void expr(const Expr& e) {
    switch (e.tag) {
      case Expr::Tag::Val:
        emit(i_const(e.val, Reg::Com));
        return;
      case Expr::Tag::Arg:
        emit(i_mov(Reg::Arg, Reg::Com));
        return;
      case Expr::Tag::Local:
        emit(i_const(Value::pointer({Permission::Data, comp, 0, 0}), Reg::Com));
        return;
      case Expr::Tag::FunPtr:
        emit(i_const(Value::pointer(
                         {Permission::Code, comp, prog->ids.id_of({comp, e.proc}), 0}),
                     Reg::Com));
        return;
      case Expr::Tag::BinOp:
        expr(*e.a);
        push(Reg::Com);
        expr(*e.b);
        pop(Reg::One);
        emit(i_binop(e.op, Reg::One, Reg::Com, Reg::Com));
        return;
      case Expr::Tag::Seq:
        expr(*e.a);
        expr(*e.b);
        return;
      case Expr::Tag::If: {
        std::string l_then = fresh_label();
        std::string l_end = fresh_label();
        expr(*e.a);
        emit(i_bnz(Reg::Com, l_then));
        expr(*e.c);
        emit(i_ptroflabel(l_end, Reg::Aux1));
        emit(i_jump(Reg::Aux1));
        emit(i_label(l_then));
        expr(*e.b);
        emit(i_label(l_end));
        return;
      }
      case Expr::Tag::Alloc:
        expr(*e.a);
        emit(i_alloc(Reg::Com, Reg::Com));
        return;
      case Expr::Tag::Deref:
        expr(*e.a);
        emit(i_load(Reg::Com, Reg::Com));
        return;
      case Expr::Tag::Assign:
        // Value first, then the target pointer, as in the source semantics.
        expr(*e.b);
        push(Reg::Com);
        expr(*e.a);
        pop(Reg::One);
        emit(i_store(Reg::Com, Reg::One));
        emit(i_mov(Reg::One, Reg::Com));
        return;
      case Expr::Tag::Call:
        expr(*e.a);
        push(Reg::Arg);
        if (e.comp == comp) {
          set_intra_flag();
          emit(i_jal(entry_label(e.proc)));
        } else {
          emit(i_call(e.comp, e.proc));
        }
        pop(Reg::Arg);
        return;
      case Expr::Tag::CallPtr: {
        std::string l_ret = fresh_label();
        expr(*e.a);
        push(Reg::Com);
        expr(*e.b);
        pop(Reg::One);
        push(Reg::Arg);
        set_intra_flag();
        emit(i_ptroflabel(l_ret, Reg::Ra));
        emit(i_jumpfunptr(Reg::One));
        emit(i_label(l_ret));
        pop(Reg::Arg);
        return;
      }
      case Expr::Tag::Exit:
        emit(i_const(Value::integer(0), Reg::Com));
        emit(i_halt());
        return;
    }
  }
};

// Every procedure shares one entry/exit protocol. Entries happen three
// ways: cross-component Call (enters at offset 0, leaves via Return),
// intra-component Jal and JumpFunPtr (leave via Jump to the saved return
// address). The caller marks intra entries through the flag cell in
// block -1; the flag travels on the expression stack across the body so
// the exit path knows how it was entered.
std::vector<Instr> compile_proc(const SourceProgram& prog, int comp,
                                const std::string& proc, const Expr& body,
                                bool is_program_main, int* label_counter) {
  Emitter em{&prog, comp, label_counter, {}};
  std::string l_iret = em.fresh_label();
  em.emit(i_label(Emitter::entry_label(proc)));
  // Read and clear the intra-entry flag.
  em.emit(i_const(em.stack_cell(kIntraFlagCell), Reg::Sp));
  em.emit(i_load(Reg::Sp, Reg::One));
  em.emit(i_const(Value::integer(0), Reg::Aux1));
  em.emit(i_store(Reg::Sp, Reg::Aux1));
  // Frame: saved return address below the entry flag.
  em.push(Reg::Ra);
  em.push(Reg::One);
  em.emit(i_mov(Reg::Com, Reg::Arg));
  em.expr(body);
  em.pop(Reg::One);  // entry flag
  em.emit(i_bnz(Reg::One, l_iret));
  em.pop(Reg::Aux2);  // discard the (invalid) saved return address
  if (is_program_main)
    em.emit(i_halt());
  else
    em.emit(i_return());
  em.emit(i_label(l_iret));
  em.pop(Reg::Ra);
  em.emit(i_jump(Reg::Ra));
  return em.code;
}

}  // namespace

MachProgram compile(const SourceProgram& prog, const CompilerConfig& cfg) {
  MachProgram out;
  out.intf = prog.intf;
  out.buffers = prog.buffers;
  out.ids = prog.ids;
  out.names = prog.names;
  std::map<int, int> label_counters;
  for (const auto& [ref, body] : prog.procs) {
    bool is_main = prog.intf.has_main() && ref.first == prog.intf.main_comp &&
                   ref.second == "main";
    out.procs[ref] = compile_proc(prog, ref.first, ref.second, *body, is_main,
                                  &label_counters[ref.first]);
  }
  for (const auto& [comp, ci] : prog.intf.comps) out.runtime_stack[comp] = cfg.stack_words;
  return out;
}

}  // namespace seclab

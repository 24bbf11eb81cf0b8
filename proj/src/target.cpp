#include "seclab/target.hpp"

namespace seclab {

Instr i_const(Value v, Reg rd) {
  Instr i;
  i.op = Instr::Op::Const;
  i.v = v;
  i.rd = rd;
  return i;
}
Instr i_mov(Reg rs, Reg rd) {
  Instr i;
  i.op = Instr::Op::Mov;
  i.rs1 = rs;
  i.rd = rd;
  return i;
}
Instr i_binop(BinOpKind op, Reg rs1, Reg rs2, Reg rd) {
  Instr i;
  i.op = Instr::Op::BinOp;
  i.bop = op;
  i.rs1 = rs1;
  i.rs2 = rs2;
  i.rd = rd;
  return i;
}
Instr i_label(std::string l) {
  Instr i;
  i.op = Instr::Op::Label;
  i.label = std::move(l);
  return i;
}
Instr i_ptroflabel(std::string l, Reg rd) {
  Instr i;
  i.op = Instr::Op::PtrOfLabel;
  i.label = std::move(l);
  i.rd = rd;
  return i;
}
Instr i_load(Reg addr, Reg rd) {
  Instr i;
  i.op = Instr::Op::Load;
  i.rs1 = addr;
  i.rd = rd;
  return i;
}
Instr i_store(Reg addr, Reg rs) {
  Instr i;
  i.op = Instr::Op::Store;
  i.rd = addr;
  i.rs1 = rs;
  return i;
}
Instr i_alloc(Reg rd, Reg rsize) {
  Instr i;
  i.op = Instr::Op::Alloc;
  i.rd = rd;
  i.rs1 = rsize;
  return i;
}
Instr i_bnz(Reg rs, std::string l) {
  Instr i;
  i.op = Instr::Op::Bnz;
  i.rs1 = rs;
  i.label = std::move(l);
  return i;
}
Instr i_jump(Reg rs) {
  Instr i;
  i.op = Instr::Op::Jump;
  i.rs1 = rs;
  return i;
}
Instr i_jumpfunptr(Reg rs) {
  Instr i;
  i.op = Instr::Op::JumpFunPtr;
  i.rs1 = rs;
  return i;
}
Instr i_jal(std::string l) {
  Instr i;
  i.op = Instr::Op::Jal;
  i.label = std::move(l);
  return i;
}
Instr i_call(int comp, std::string proc) {
  Instr i;
  i.op = Instr::Op::Call;
  i.comp = comp;
  i.proc = std::move(proc);
  return i;
}
Instr i_return() {
  Instr i;
  i.op = Instr::Op::Return;
  return i;
}
Instr i_nop() { return Instr{}; }
Instr i_halt() {
  Instr i;
  i.op = Instr::Op::Halt;
  return i;
}

std::string to_string(const Instr& in) {
  using Op = Instr::Op;
  switch (in.op) {
    case Op::Const: return "const " + to_string(in.v) + " -> " + to_string(in.rd);
    case Op::Mov: return "mov " + to_string(in.rs1) + " -> " + to_string(in.rd);
    case Op::BinOp:
      return "binop " + to_string(in.bop) + " " + to_string(in.rs1) + " " +
             to_string(in.rs2) + " -> " + to_string(in.rd);
    case Op::Label: return in.label + ":";
    case Op::PtrOfLabel: return "ptroflabel " + in.label + " -> " + to_string(in.rd);
    case Op::Load: return "load *" + to_string(in.rs1) + " -> " + to_string(in.rd);
    case Op::Store: return "store *" + to_string(in.rd) + " <- " + to_string(in.rs1);
    case Op::Alloc: return "alloc " + to_string(in.rs1) + " -> " + to_string(in.rd);
    case Op::Bnz: return "bnz " + to_string(in.rs1) + " " + in.label;
    case Op::Jump: return "jump " + to_string(in.rs1);
    case Op::JumpFunPtr: return "jumpfunptr " + to_string(in.rs1);
    case Op::Jal: return "jal " + in.label;
    case Op::Call: return "call " + std::to_string(in.comp) + " " + in.proc;
    case Op::Return: return "return";
    case Op::Nop: return "nop";
    case Op::Halt: return "halt";
  }
  return "?";
}

bool well_formed(const MachProgram& p, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  for (const auto& [comp, ci] : p.intf.comps) {
    for (const auto& ex : ci.exports)
      if (!p.procs.count({comp, ex})) return fail("export without code: " + ex);
    for (const auto& [tc, tp] : ci.imports) {
      if (tc == comp) return fail("self import");
      if (!p.intf.exports(tc, tp))
        return fail("import of non-exported " + std::to_string(tc) + "." + tp);
    }
  }
  if (p.intf.has_main() && !p.procs.count({p.intf.main_comp, "main"}))
    return fail("main component lacks a main procedure");
  std::map<int, std::set<std::string>> labels;
  for (const auto& [ref, code] : p.procs) {
    if (!p.intf.defines(ref.first)) return fail("procedure in undeclared component");
    if (p.ids.id_of(ref) < 0) return fail("procedure without id: " + ref.second);
    for (const Instr& in : code) {
      if (in.op == Instr::Op::Label && !labels[ref.first].insert(in.label).second)
        return fail("duplicate label " + in.label);
      if (in.op == Instr::Op::Const && in.v.is_data_ptr()) {
        // Code may only name its own static buffer or its own runtime block.
        if (in.v.p.comp != ref.first || (in.v.p.block != 0 && in.v.p.block != -1))
          return fail("pointer immediate outside own static/runtime block");
      }
      if (in.op == Instr::Op::Call) {
        if (in.comp == ref.first) return fail("Call within the same component");
        if (!p.intf.imports(ref.first, in.comp, in.proc))
          return fail("Call to unimported " + std::to_string(in.comp) + "." + in.proc);
      }
    }
  }
  for (const auto& [ref, code] : p.procs)
    for (const Instr& in : code)
      if ((in.op == Instr::Op::Bnz || in.op == Instr::Op::Jal ||
           in.op == Instr::Op::PtrOfLabel) &&
          !labels[ref.first].count(in.label))
        return fail("unresolved label " + in.label);
  for (const auto& [comp, cells] : p.buffers) {
    if (!p.intf.defines(comp)) return fail("buffer for undeclared component");
    for (const Value& v : cells)
      if (v.is_ptr()) return fail("pointer in static buffer");
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& [ref, id] : p.ids.ids)
    if (!seen.insert({ref.first, id}).second) return fail("duplicate procedure id");
  return true;
}

namespace {

RegFile invalidate(const RegFile& reg) {
  RegFile out;
  out.fill(Value::error());
  reg_at(out, Reg::Com) = reg_at(reg, Reg::Com);
  return out;
}

Memory initial_memory(const MachProgram& p) {
  Memory mem;
  for (const auto& [comp, ci] : p.intf.comps) {
    mem.ensure_component(comp);
    auto it = p.buffers.find(comp);
    mem.install_block(comp, 0, it == p.buffers.end() ? std::vector<Value>{} : it->second);
  }
  for (const auto& [comp, size] : p.runtime_stack) {
    std::vector<Value> cells(static_cast<std::size_t>(size), Value::error());
    cells[kStackTopCell] = Value::pointer({Permission::Data, comp, -1, kStackFirstFree});
    cells[kIntraFlagCell] = Value::integer(0);
    mem.install_block(comp, -1, cells);
  }
  return mem;
}

}  // namespace

MachMachine::MachMachine(const MachProgram& prog)
    : prog_(&prog), mem_(initial_memory(prog)) {
  reg_.fill(Value::error());
  reg_at(reg_, Reg::Com) = Value::integer(0);
  int main_comp = prog.intf.main_comp;
  int id = prog.ids.id_of({main_comp, "main"});
  if (id < 0) {
    status_ = Status::Stuck;
    return;
  }
  pc_ = Pointer{Permission::Code, main_comp, id, 0};
}

const Instr* MachMachine::fetch() const {
  if (pc_.perm != Permission::Code) return nullptr;
  auto ref = prog_->ids.proc_of(pc_.comp, pc_.block);
  if (!ref) return nullptr;
  const std::vector<Instr>* code = prog_->code(*ref);
  if (!code || pc_.off < 0 || static_cast<std::size_t>(pc_.off) >= code->size())
    return nullptr;
  return &(*code)[static_cast<std::size_t>(pc_.off)];
}

std::optional<Pointer> MachMachine::find_label(int comp, const std::string& label) const {
  for (const auto& [ref, code] : prog_->procs) {
    if (ref.first != comp) continue;
    for (std::size_t i = 0; i < code.size(); ++i)
      if (code[i].op == Instr::Op::Label && code[i].label == label)
        // Pointer to the instruction just past the label.
        return Pointer{Permission::Code, comp, prog_->ids.id_of(ref),
                       static_cast<std::int64_t>(i + 1)};
  }
  return std::nullopt;
}

Event MachMachine::df(EventTag tag, Value payload, const RegFile& regsnap, const Instr* in) const {
  Event e;
  e.tag = tag;
  e.mem = mem_;
  e.arg = payload;
  e.reg = regsnap;
  e.cur = pc_.comp;
  if (in) {
    e.rd = in->rd;
    e.rs1 = in->rs1;
    e.rs2 = in->rs2;
    e.bop = in->bop;
  }
  return e;
}

MachMachine::Status MachMachine::step(std::optional<Event>* ev, bool interaction_only) {
  if (status_ != Status::Running) return status_;
  const Instr* inp = fetch();
  if (!inp) return stuck();
  const Instr& in = *inp;
  Pointer next = pc_;
  next.off += 1;
  using Op = Instr::Op;
  switch (in.op) {
    case Op::Const: {
      reg_at(reg_, in.rd) = in.v;
      if (ev && !interaction_only) *ev = df(EventTag::Const, in.v, reg_, &in);
      pc_ = next;
      return status_;
    }
    case Op::Mov: {
      Value v = reg_at(reg_, in.rs1);
      reg_at(reg_, in.rd) = v;
      if (ev && !interaction_only) *ev = df(EventTag::Mov, v, reg_, &in);
      pc_ = next;
      return status_;
    }
    case Op::BinOp: {
      auto r = eval_binop(in.bop, reg_at(reg_, in.rs1), reg_at(reg_, in.rs2));
      if (!r) return stuck();
      // The BinOp event snapshots the register file before the write.
      RegFile pre = reg_;
      reg_at(reg_, in.rd) = *r;
      if (ev && !interaction_only) *ev = df(EventTag::BinOp, *r, pre, &in);
      pc_ = next;
      return status_;
    }
    case Op::Label:
    case Op::Nop:
      pc_ = next;
      return status_;
    case Op::PtrOfLabel: {
      auto target = find_label(pc_.comp, in.label);
      if (!target) return stuck();
      Value v = Value::pointer(*target);
      reg_at(reg_, in.rd) = v;
      if (ev && !interaction_only) *ev = df(EventTag::Const, v, reg_, &in);
      pc_ = next;
      return status_;
    }
    case Op::Load: {
      const Value& addr = reg_at(reg_, in.rs1);
      if (!addr.is_ptr()) return stuck();
      auto v = mem_.load(addr.p);
      if (!v) return stuck();
      reg_at(reg_, in.rd) = *v;
      if (ev && !interaction_only) *ev = df(EventTag::Load, *v, reg_, &in);
      pc_ = next;
      return status_;
    }
    case Op::Store: {
      const Value& addr = reg_at(reg_, in.rd);
      if (!addr.is_ptr()) return stuck();
      Value v = reg_at(reg_, in.rs1);
      // The Store event carries the updated memory and the register file
      // before the step (nothing is written to a register).
      if (!mem_.store(addr.p, v)) return stuck();
      if (ev && !interaction_only) *ev = df(EventTag::Store, v, reg_, &in);
      pc_ = next;
      return status_;
    }
    case Op::Alloc: {
      const Value& size = reg_at(reg_, in.rs1);
      if (!size.is_int()) return stuck();
      auto ptr = mem_.alloc(pc_.comp, size.i);
      if (!ptr) return stuck();
      Value v = Value::pointer(*ptr);
      reg_at(reg_, in.rd) = v;
      if (ev && !interaction_only) *ev = df(EventTag::Alloc, v, reg_, &in);
      pc_ = next;
      return status_;
    }
    case Op::Bnz: {
      const Value& v = reg_at(reg_, in.rs1);
      if (!v.is_int()) return stuck();
      if (v.i != 0) {
        auto target = find_label(pc_.comp, in.label);
        if (!target) return stuck();
        pc_ = *target;
      } else {
        pc_ = next;
      }
      return status_;
    }
    case Op::Jump: {
      const Value& v = reg_at(reg_, in.rs1);
      if (!v.is_code_ptr() || v.p.comp != pc_.comp) return stuck();
      pc_ = v.p;
      return status_;
    }
    case Op::JumpFunPtr: {
      // Function-pointer jumps land only on procedure entries (offset 0)
      // of the same component.
      const Value& v = reg_at(reg_, in.rs1);
      if (!v.is_code_ptr() || v.p.comp != pc_.comp || v.p.off != 0) return stuck();
      if (!prog_->ids.proc_of(v.p.comp, v.p.block)) return stuck();
      pc_ = v.p;
      return status_;
    }
    case Op::Jal: {
      auto target = find_label(pc_.comp, in.label);
      if (!target) return stuck();
      Value ra = Value::pointer(next);
      reg_at(reg_, Reg::Ra) = ra;
      if (ev && !interaction_only) {
        *ev = df(EventTag::Const, ra, reg_);
        (*ev)->rd = Reg::Ra;
      }
      pc_ = *target;
      return status_;
    }
    case Op::Call: {
      if (in.comp == pc_.comp) return stuck();
      if (!prog_->intf.imports(pc_.comp, in.comp, in.proc) ||
          !prog_->intf.exports(in.comp, in.proc))
        return stuck();
      int id = prog_->ids.id_of({in.comp, in.proc});
      if (id < 0) return stuck();
      Value arg = reg_at(reg_, Reg::Com);
      reg_ = invalidate(reg_);
      if (ev) {
        if (interaction_only) {
          *ev = make_call(mem_, pc_.comp, in.comp, in.proc, arg);
        } else {
          Event e = df(EventTag::Call, arg, reg_);
          e.caller = pc_.comp;
          e.callee = in.comp;
          e.proc = in.proc;
          *ev = e;
        }
      }
      stack_.push_back(next);
      pc_ = Pointer{Permission::Code, in.comp, id, 0};
      return status_;
    }
    case Op::Return: {
      if (stack_.empty()) return stuck();
      Pointer ra = stack_.back();
      stack_.pop_back();
      if (ra.comp == pc_.comp) return stuck();
      Value val = reg_at(reg_, Reg::Com);
      reg_ = invalidate(reg_);
      if (ev) {
        if (interaction_only) {
          *ev = make_ret(mem_, pc_.comp, ra.comp, val);
        } else {
          Event e = df(EventTag::Ret, val, reg_);
          e.caller = pc_.comp;
          e.callee = ra.comp;
          *ev = e;
        }
      }
      pc_ = ra;
      return status_;
    }
    case Op::Halt:
      return status_ = Status::Done;
  }
  return stuck();
}

namespace {

RunResult run_impl(const MachProgram& prog, std::int64_t fuel, bool interaction_only) {
  MachMachine m(prog);
  RunResult out;
  while (out.steps < fuel) {
    if (m.status() != MachMachine::Status::Running) break;
    std::optional<Event> ev;
    m.step(&ev, interaction_only);
    ++out.steps;
    if (ev) out.trace.push_back(std::move(*ev));
  }
  switch (m.status()) {
    case MachMachine::Status::Done:
      out.outcome = Outcome::Done;
      out.result = reg_at(m.registers(), Reg::Com);
      break;
    case MachMachine::Status::Stuck: out.outcome = Outcome::Stuck; break;
    case MachMachine::Status::Running: out.outcome = Outcome::OutOfFuel; break;
  }
  return out;
}

}  // namespace

RunResult run_mach(const MachProgram& prog, std::int64_t fuel) {
  return run_impl(prog, fuel, false);
}

RunResult run_mach_interaction(const MachProgram& prog, std::int64_t fuel) {
  return run_impl(prog, fuel, true);
}



std::optional<MachProgram> link_mach(const MachProgram& a, const MachProgram& b) {
  auto intf = Interface::link(a.intf, b.intf);
  if (!intf) return std::nullopt;
  MachProgram out;
  out.intf = *intf;
  out.procs = a.procs;
  out.procs.insert(b.procs.begin(), b.procs.end());
  out.buffers = a.buffers;
  out.buffers.insert(b.buffers.begin(), b.buffers.end());
  out.ids.ids = a.ids.ids;
  out.ids.ids.insert(b.ids.ids.begin(), b.ids.ids.end());
  out.names = a.names;
  out.names.insert(b.names.begin(), b.names.end());
  out.runtime_stack = a.runtime_stack;
  out.runtime_stack.insert(b.runtime_stack.begin(), b.runtime_stack.end());
  return out;
}

MachProgram proj_mach(const MachProgram& p, const std::set<int>& comps) {
  MachProgram out;
  for (int c : comps) {
    auto it = p.intf.comps.find(c);
    if (it != p.intf.comps.end()) out.intf.comps[c] = it->second;
    auto bit = p.buffers.find(c);
    if (bit != p.buffers.end()) out.buffers[c] = bit->second;
    auto sit = p.runtime_stack.find(c);
    if (sit != p.runtime_stack.end()) out.runtime_stack[c] = sit->second;
  }
  out.intf.main_comp = comps.count(p.intf.main_comp) ? p.intf.main_comp : -1;
  for (const auto& [ref, code] : p.procs)
    if (comps.count(ref.first)) out.procs[ref] = code;
  for (const auto& [ref, id] : p.ids.ids)
    if (comps.count(ref.first)) out.ids.ids[ref] = id;
  for (const auto& [name, c] : p.names)
    if (comps.count(c)) out.names[name] = c;
  return out;
}

}  // namespace seclab

#include "seclab/source.hpp"

namespace seclab {

std::string to_string(BinOpKind op) {
  switch (op) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Eq: return "=";
    case BinOpKind::Leq: return "<=";
  }
  return "?";
}

std::optional<Value> eval_binop(BinOpKind op, const Value& a, const Value& b) {
  if (a.is_int() && b.is_int()) {
    switch (op) {
      case BinOpKind::Add: return Value::integer(a.i + b.i);
      case BinOpKind::Sub: return Value::integer(a.i - b.i);
      case BinOpKind::Mul: return Value::integer(a.i * b.i);
      case BinOpKind::Eq: return Value::integer(a.i == b.i ? 1 : 0);
      case BinOpKind::Leq: return Value::integer(a.i <= b.i ? 1 : 0);
    }
  }
  // Pointer offset arithmetic.
  if (op == BinOpKind::Add && a.is_ptr() && b.is_int()) {
    Pointer p = a.p;
    p.off += b.i;
    return Value::pointer(p);
  }
  if (op == BinOpKind::Add && a.is_int() && b.is_ptr()) {
    Pointer p = b.p;
    p.off += a.i;
    return Value::pointer(p);
  }
  if (op == BinOpKind::Sub && a.is_ptr() && b.is_int()) {
    Pointer p = a.p;
    p.off -= b.i;
    return Value::pointer(p);
  }
  // Structural pointer equality.
  if (op == BinOpKind::Eq && a.is_ptr() && b.is_ptr())
    return Value::integer(a.p == b.p ? 1 : 0);
  // Offset difference within the same block.
  if (op == BinOpKind::Sub && a.is_ptr() && b.is_ptr() && a.p.perm == b.p.perm &&
      a.p.comp == b.p.comp && a.p.block == b.p.block)
    return Value::integer(a.p.off - b.p.off);
  return std::nullopt;
}

namespace {
ExprPtr mk(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
}  // namespace

ExprPtr e_val(Value v) {
  Expr e;
  e.tag = Expr::Tag::Val;
  e.val = v;
  return mk(e);
}
ExprPtr e_int(std::int64_t v) { return e_val(Value::integer(v)); }
ExprPtr e_err() { return e_val(Value::error()); }
ExprPtr e_arg() {
  Expr e;
  e.tag = Expr::Tag::Arg;
  return mk(e);
}
ExprPtr e_local() {
  Expr e;
  e.tag = Expr::Tag::Local;
  return mk(e);
}
ExprPtr e_binop(BinOpKind op, ExprPtr a, ExprPtr b) {
  Expr e;
  e.tag = Expr::Tag::BinOp;
  e.op = op;
  e.a = std::move(a);
  e.b = std::move(b);
  return mk(e);
}
ExprPtr e_seq(ExprPtr a, ExprPtr b) {
  Expr e;
  e.tag = Expr::Tag::Seq;
  e.a = std::move(a);
  e.b = std::move(b);
  return mk(e);
}
ExprPtr e_seq(std::vector<ExprPtr> es) {
  if (es.empty()) return e_int(0);
  ExprPtr out = es.back();
  for (auto it = es.rbegin() + 1; it != es.rend(); ++it) out = e_seq(*it, out);
  return out;
}
ExprPtr e_if(ExprPtr c, ExprPtr t, ExprPtr f) {
  Expr e;
  e.tag = Expr::Tag::If;
  e.a = std::move(c);
  e.b = std::move(t);
  e.c = std::move(f);
  return mk(e);
}
ExprPtr e_alloc(ExprPtr n) {
  Expr e;
  e.tag = Expr::Tag::Alloc;
  e.a = std::move(n);
  return mk(e);
}
ExprPtr e_deref(ExprPtr p) {
  Expr e;
  e.tag = Expr::Tag::Deref;
  e.a = std::move(p);
  return mk(e);
}
ExprPtr e_assign(ExprPtr p, ExprPtr v) {
  Expr e;
  e.tag = Expr::Tag::Assign;
  e.a = std::move(p);
  e.b = std::move(v);
  return mk(e);
}
ExprPtr e_call(int comp, std::string proc, ExprPtr arg) {
  Expr e;
  e.tag = Expr::Tag::Call;
  e.comp = comp;
  e.proc = std::move(proc);
  e.a = std::move(arg);
  return mk(e);
}
ExprPtr e_callptr(ExprPtr fp, ExprPtr arg) {
  Expr e;
  e.tag = Expr::Tag::CallPtr;
  e.a = std::move(fp);
  e.b = std::move(arg);
  return mk(e);
}
ExprPtr e_funptr(std::string proc) {
  Expr e;
  e.tag = Expr::Tag::FunPtr;
  e.proc = std::move(proc);
  return mk(e);
}
ExprPtr e_exit() {
  Expr e;
  e.tag = Expr::Tag::Exit;
  return mk(e);
}

namespace {

bool expr_ok(const SourceProgram& p, int comp, const Expr& e, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  switch (e.tag) {
    case Expr::Tag::Val:
      if (e.val.is_data_ptr()) return fail("DATA pointer literal in procedure body");
      return true;
    case Expr::Tag::Call: {
      if (!p.procs.count({e.comp, e.proc}))
        return fail("call target " + std::to_string(e.comp) + "." + e.proc + " undefined");
      if (e.comp != comp) {
        if (!p.intf.imports(comp, e.comp, e.proc))
          return fail("cross call to unimported " + std::to_string(e.comp) + "." + e.proc);
      }
      break;
    }
    case Expr::Tag::FunPtr:
      if (!p.procs.count({comp, e.proc}))
        return fail("function pointer to undefined procedure " + e.proc);
      break;
    default: break;
  }
  for (const ExprPtr& child : {e.a, e.b, e.c})
    if (child && !expr_ok(p, comp, *child, why)) return false;
  return true;
}

}  // namespace

bool well_formed(const SourceProgram& p, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  for (const auto& [comp, ci] : p.intf.comps) {
    for (const auto& ex : ci.exports)
      if (!p.procs.count({comp, ex})) return fail("export without body: " + ex);
    for (const auto& [tc, tp] : ci.imports) {
      if (tc == comp) return fail("self import");
      if (!p.intf.exports(tc, tp))
        return fail("import of non-exported " + std::to_string(tc) + "." + tp);
    }
  }
  if (p.intf.has_main() && !p.procs.count({p.intf.main_comp, "main"}))
    return fail("main component lacks a main procedure");
  for (const auto& [ref, body] : p.procs) {
    if (!p.intf.defines(ref.first)) return fail("procedure in undeclared component");
    if (p.ids.id_of(ref) < 0) return fail("procedure without id: " + ref.second);
    if (!expr_ok(p, ref.first, *body, why)) return false;
  }
  for (const auto& [comp, cells] : p.buffers) {
    if (!p.intf.defines(comp)) return fail("buffer for undeclared component");
    for (const Value& v : cells)
      if (v.is_ptr()) return fail("pointer in static buffer");
  }
  // Procedure ids are block ids: injective within a component.
  std::set<std::pair<int, int>> seen;
  for (const auto& [ref, id] : p.ids.ids)
    if (!seen.insert({ref.first, id}).second) return fail("duplicate procedure id");
  return true;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Done: return "done";
    case Outcome::Stuck: return "stuck";
    case Outcome::OutOfFuel: return "out-of-fuel";
  }
  return "?";
}

namespace {

KontPtr push_k(Kont k, KontPtr next) {
  k.next = std::move(next);
  return std::make_shared<const Kont>(std::move(k));
}

Memory initial_memory(const Interface& intf, const Buffers& bufs) {
  Memory mem;
  for (const auto& [comp, ci] : intf.comps) {
    mem.ensure_component(comp);
    auto it = bufs.find(comp);
    mem.install_block(comp, 0, it == bufs.end() ? std::vector<Value>{} : it->second);
  }
  return mem;
}

}  // namespace

SourceMachine::SourceMachine(const SourceProgram& prog)
    : prog_(&prog),
      mem_(initial_memory(prog.intf, prog.buffers)),
      cur_(prog.intf.main_comp),
      arg_(Value::integer(0)) {
  const ExprPtr* body = prog.body({cur_, "main"});
  if (!body) {
    status_ = Status::Stuck;
    return;
  }
  e_ = *body;
}

SourceMachine::Status SourceMachine::ret_value(Value v, std::optional<Event>* ev) {
  if (!k_) {
    // Value under Kstop: return from the current procedure.
    if (stack_.empty()) {
      result_ = v;
      return status_ = Status::Done;
    }
    Frame f = stack_.back();
    stack_.pop_back();
    if (f.comp != cur_) {
      if (ev) *ev = make_ret(mem_, cur_, f.comp, v);
      cur_ = f.comp;
    }
    arg_ = f.arg;
    k_ = f.k;
    e_ = e_val(v);
    return status_;
  }
  const Kont& k = *k_;
  switch (k.tag) {
    case Kont::Tag::Binop1: {
      Kont next{Kont::Tag::Binop2};
      next.op = k.op;
      next.v = v;
      e_ = k.e;
      k_ = push_k(std::move(next), k.next);
      return status_;
    }
    case Kont::Tag::Binop2: {
      auto r = eval_binop(k.op, k.v, v);
      if (!r) return stuck();
      e_ = e_val(*r);
      k_ = k.next;
      return status_;
    }
    case Kont::Tag::Seq:
      e_ = k.e;
      k_ = k.next;
      return status_;
    case Kont::Tag::If:
      if (!v.is_int()) return stuck();
      e_ = v.i != 0 ? k.e : k.e2;
      k_ = k.next;
      return status_;
    case Kont::Tag::Alloc: {
      if (!v.is_int()) return stuck();
      auto ptr = mem_.alloc(cur_, v.i);
      if (!ptr) return stuck();
      e_ = e_val(Value::pointer(*ptr));
      k_ = k.next;
      return status_;
    }
    case Kont::Tag::Deref: {
      if (!v.is_ptr()) return stuck();
      auto r = mem_.load(v.p);
      if (!r) return stuck();
      e_ = e_val(*r);
      k_ = k.next;
      return status_;
    }
    case Kont::Tag::Assign1: {
      Kont next{Kont::Tag::Assign2};
      next.v = v;
      e_ = k.e;
      k_ = push_k(std::move(next), k.next);
      return status_;
    }
    case Kont::Tag::Assign2: {
      if (!v.is_ptr()) return stuck();
      if (!mem_.store(v.p, k.v)) return stuck();
      e_ = e_val(k.v);
      k_ = k.next;
      return status_;
    }
    case Kont::Tag::Call: {
      const ExprPtr* body = prog_->body({k.comp, k.proc});
      if (!body) return stuck();
      if (k.comp != cur_) {
        if (!prog_->intf.imports(cur_, k.comp, k.proc) ||
            !prog_->intf.exports(k.comp, k.proc))
          return stuck();
        if (ev) *ev = make_call(mem_, cur_, k.comp, k.proc, v);
      }
      stack_.push_back({cur_, arg_, k.next});
      cur_ = k.comp;
      arg_ = v;
      e_ = *body;
      k_ = nullptr;
      return status_;
    }
    case Kont::Tag::CallPtr1: {
      Kont next{Kont::Tag::CallPtr2};
      next.v = v;
      e_ = k.e;
      k_ = push_k(std::move(next), k.next);
      return status_;
    }
    case Kont::Tag::CallPtr2: {
      const Value& fp = k.v;
      if (!fp.is_code_ptr() || fp.p.comp != cur_ || fp.p.off != 0) return stuck();
      auto ref = prog_->ids.proc_of(cur_, fp.p.block);
      if (!ref) return stuck();
      const ExprPtr* body = prog_->body(*ref);
      if (!body) return stuck();
      stack_.push_back({cur_, arg_, k.next});
      arg_ = v;
      e_ = *body;
      k_ = nullptr;
      return status_;
    }
  }
  return stuck();
}

SourceMachine::Status SourceMachine::step(std::optional<Event>* ev) {
  if (status_ != Status::Running) return status_;
  const Expr& e = *e_;
  switch (e.tag) {
    case Expr::Tag::Val: return ret_value(e.val, ev);
    case Expr::Tag::Arg: return ret_value(arg_, ev);
    case Expr::Tag::Local:
      return ret_value(Value::pointer({Permission::Data, cur_, 0, 0}), ev);
    case Expr::Tag::FunPtr: {
      int id = prog_->ids.id_of({cur_, e.proc});
      if (id < 0) return stuck();
      return ret_value(Value::pointer({Permission::Code, cur_, id, 0}), ev);
    }
    case Expr::Tag::Exit:
      result_ = Value::integer(0);
      return status_ = Status::Done;
    case Expr::Tag::BinOp: {
      Kont k{Kont::Tag::Binop1};
      k.op = e.op;
      k.e = e.b;
      k_ = push_k(std::move(k), k_);
      e_ = e.a;
      return status_;
    }
    case Expr::Tag::Seq: {
      Kont k{Kont::Tag::Seq};
      k.e = e.b;
      k_ = push_k(std::move(k), k_);
      e_ = e.a;
      return status_;
    }
    case Expr::Tag::If: {
      Kont k{Kont::Tag::If};
      k.e = e.b;
      k.e2 = e.c;
      k_ = push_k(std::move(k), k_);
      e_ = e.a;
      return status_;
    }
    case Expr::Tag::Alloc: {
      k_ = push_k(Kont{Kont::Tag::Alloc}, k_);
      e_ = e.a;
      return status_;
    }
    case Expr::Tag::Deref: {
      k_ = push_k(Kont{Kont::Tag::Deref}, k_);
      e_ = e.a;
      return status_;
    }
    case Expr::Tag::Assign: {
      // The assigned value is evaluated before the target pointer.
      Kont k{Kont::Tag::Assign1};
      k.e = e.a;
      k_ = push_k(std::move(k), k_);
      e_ = e.b;
      return status_;
    }
    case Expr::Tag::Call: {
      Kont k{Kont::Tag::Call};
      k.comp = e.comp;
      k.proc = e.proc;
      k_ = push_k(std::move(k), k_);
      e_ = e.a;
      return status_;
    }
    case Expr::Tag::CallPtr: {
      Kont k{Kont::Tag::CallPtr1};
      k.e = e.b;
      k_ = push_k(std::move(k), k_);
      e_ = e.a;
      return status_;
    }
  }
  return stuck();
}

RunResult run_source(const SourceProgram& prog, std::int64_t fuel) {
  SourceMachine m(prog);
  RunResult out;
  while (out.steps < fuel) {
    if (m.status() != SourceMachine::Status::Running) break;
    std::optional<Event> ev;
    m.step(&ev);
    ++out.steps;
    if (ev) out.trace.push_back(std::move(*ev));
  }
  switch (m.status()) {
    case SourceMachine::Status::Done:
      out.outcome = Outcome::Done;
      out.result = m.result();
      break;
    case SourceMachine::Status::Stuck: out.outcome = Outcome::Stuck; break;
    case SourceMachine::Status::Running: out.outcome = Outcome::OutOfFuel; break;
  }
  return out;
}



std::optional<SourceProgram> link_source(const SourceProgram& a, const SourceProgram& b) {
  auto intf = Interface::link(a.intf, b.intf);
  if (!intf) return std::nullopt;
  SourceProgram out;
  out.intf = *intf;
  out.procs = a.procs;
  out.procs.insert(b.procs.begin(), b.procs.end());
  out.buffers = a.buffers;
  out.buffers.insert(b.buffers.begin(), b.buffers.end());
  out.ids.ids = a.ids.ids;
  out.ids.ids.insert(b.ids.ids.begin(), b.ids.ids.end());
  out.names = a.names;
  out.names.insert(b.names.begin(), b.names.end());
  return out;
}

SourceProgram proj_source(const SourceProgram& p, const std::set<int>& comps) {
  SourceProgram out;
  for (int c : comps) {
    auto it = p.intf.comps.find(c);
    if (it != p.intf.comps.end()) out.intf.comps[c] = it->second;
    auto bit = p.buffers.find(c);
    if (bit != p.buffers.end()) out.buffers[c] = bit->second;
  }
  out.intf.main_comp = comps.count(p.intf.main_comp) ? p.intf.main_comp : -1;
  for (const auto& [ref, body] : p.procs)
    if (comps.count(ref.first)) out.procs[ref] = body;
  for (const auto& [ref, id] : p.ids.ids)
    if (comps.count(ref.first)) out.ids.ids[ref] = id;
  for (const auto& [name, c] : p.names)
    if (comps.count(c)) out.names[name] = c;
  return out;
}

}  // namespace seclab

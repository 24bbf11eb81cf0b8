#include "seclab/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace seclab {

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::runtime_error("bad JSON: " + what); }

std::string key(int k) { return std::to_string(k); }

int int_key(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) bad(std::string(what) + " key '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad(std::string(what) + " key '" + s + "'");
  }
}

std::int64_t get_int(const Json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number_integer()) bad(std::string("field ") + field);
  return j[field].get<std::int64_t>();
}

std::string get_str(const Json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) bad(std::string("field ") + field);
  return j[field].get<std::string>();
}

const Json& get_obj(const Json& j, const char* field) {
  if (!j.contains(field)) bad(std::string("missing field ") + field);
  return j[field];
}

// ---- registers and operators ------------------------------------------

Json reg_json(Reg r) { return to_string(r); }

Reg reg_from(const Json& j) {
  if (j.is_string())
    for (Reg r : kAllRegs)
      if (j.get<std::string>() == to_string(r)) return r;
  bad("register " + j.dump());
}

Json binop_json(BinOpKind op) { return to_string(op); }

BinOpKind binop_from(const Json& j) {
  if (j.is_string())
    for (BinOpKind op : {BinOpKind::Add, BinOpKind::Sub, BinOpKind::Mul, BinOpKind::Eq,
                         BinOpKind::Leq})
      if (j.get<std::string>() == to_string(op)) return op;
  bad("operator " + j.dump());
}

// ---- interface / ids / names ------------------------------------------

Json intf_json(const Interface& intf) {
  Json comps = Json::object();
  for (const auto& [c, ci] : intf.comps) {
    Json jc;
    jc["exports"] = ci.exports;
    Json imp = Json::array();
    for (const auto& [cc, p] : ci.imports) imp.push_back(Json::array({cc, p}));
    jc["imports"] = imp;
    comps[key(c)] = jc;
  }
  return Json{{"comps", comps}, {"main", intf.main_comp}};
}

Interface intf_from(const Json& j) {
  Interface intf;
  intf.main_comp = static_cast<int>(get_int(j, "main"));
  const Json& comps = get_obj(j, "comps");
  if (!comps.is_object()) bad("intf.comps");
  for (const auto& [k, jc] : comps.items()) {
    ComponentInterface ci;
    for (const Json& e : get_obj(jc, "exports")) ci.exports.insert(e.get<std::string>());
    for (const Json& e : get_obj(jc, "imports")) {
      if (!e.is_array() || e.size() != 2) bad("import entry");
      ci.imports.insert({e[0].get<int>(), e[1].get<std::string>()});
    }
    intf.comps[int_key(k, "component")] = ci;
  }
  return intf;
}

std::string proc_key(const ProcRef& p) { return key(p.first) + "." + p.second; }

ProcRef proc_from_key(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) bad("procedure key '" + s + "'");
  return {int_key(s.substr(0, dot), "procedure"), s.substr(dot + 1)};
}

Json ids_json(const ProcIds& ids) {
  Json j = Json::object();
  for (const auto& [p, id] : ids.ids) j[proc_key(p)] = id;
  return j;
}

ProcIds ids_from(const Json& j) {
  ProcIds ids;
  for (const auto& [k, v] : j.items()) ids.ids[proc_from_key(k)] = v.get<int>();
  return ids;
}

Json buffers_json(const Buffers& b) {
  Json j = Json::object();
  for (const auto& [c, cells] : b) {
    Json arr = Json::array();
    for (const Value& v : cells) arr.push_back(to_json(v));
    j[key(c)] = arr;
  }
  return j;
}

Buffers buffers_from(const Json& j) {
  Buffers b;
  for (const auto& [k, arr] : j.items()) {
    std::vector<Value>& cells = b[int_key(k, "buffer")];
    for (const Json& v : arr) cells.push_back(value_from_json(v));
  }
  return b;
}

// ---- expressions --------------------------------------------------------

Json expr_json(const ExprPtr& e) {
  if (!e) bad("null expression");
  using Tag = Expr::Tag;
  switch (e->tag) {
    case Tag::Val: return Json{{"tag", "val"}, {"v", to_json(e->val)}};
    case Tag::Arg: return Json{{"tag", "arg"}};
    case Tag::Local: return Json{{"tag", "local"}};
    case Tag::BinOp:
      return Json{{"tag", "binop"}, {"op", binop_json(e->op)}, {"a", expr_json(e->a)},
                  {"b", expr_json(e->b)}};
    case Tag::Seq: return Json{{"tag", "seq"}, {"a", expr_json(e->a)}, {"b", expr_json(e->b)}};
    case Tag::If:
      return Json{{"tag", "if"}, {"a", expr_json(e->a)}, {"b", expr_json(e->b)},
                  {"c", expr_json(e->c)}};
    case Tag::Alloc: return Json{{"tag", "alloc"}, {"a", expr_json(e->a)}};
    case Tag::Deref: return Json{{"tag", "deref"}, {"a", expr_json(e->a)}};
    case Tag::Assign:
      return Json{{"tag", "assign"}, {"a", expr_json(e->a)}, {"b", expr_json(e->b)}};
    case Tag::Call:
      return Json{{"tag", "call"}, {"comp", e->comp}, {"proc", e->proc},
                  {"a", expr_json(e->a)}};
    case Tag::CallPtr:
      return Json{{"tag", "callptr"}, {"a", expr_json(e->a)}, {"b", expr_json(e->b)}};
    case Tag::FunPtr: return Json{{"tag", "funptr"}, {"proc", e->proc}};
    case Tag::Exit: return Json{{"tag", "exit"}};
  }
  bad("expression tag");
}

ExprPtr expr_from(const Json& j) {
  std::string t = get_str(j, "tag");
  auto a = [&] { return expr_from(get_obj(j, "a")); };
  auto b = [&] { return expr_from(get_obj(j, "b")); };
  if (t == "val") return e_val(value_from_json(get_obj(j, "v")));
  if (t == "arg") return e_arg();
  if (t == "local") return e_local();
  if (t == "binop") return e_binop(binop_from(get_obj(j, "op")), a(), b());
  if (t == "seq") return e_seq(a(), b());
  if (t == "if") return e_if(a(), b(), expr_from(get_obj(j, "c")));
  if (t == "alloc") return e_alloc(a());
  if (t == "deref") return e_deref(a());
  if (t == "assign") return e_assign(a(), b());
  if (t == "call") return e_call(static_cast<int>(get_int(j, "comp")), get_str(j, "proc"), a());
  if (t == "callptr") return e_callptr(a(), b());
  if (t == "funptr") return e_funptr(get_str(j, "proc"));
  if (t == "exit") return e_exit();
  bad("expression tag '" + t + "'");
}

// ---- instructions -------------------------------------------------------

Json instr_json(const Instr& in) {
  using Op = Instr::Op;
  switch (in.op) {
    case Op::Const: return Json{{"op", "const"}, {"v", to_json(in.v)}, {"rd", reg_json(in.rd)}};
    case Op::Mov: return Json{{"op", "mov"}, {"rs", reg_json(in.rs1)}, {"rd", reg_json(in.rd)}};
    case Op::BinOp:
      return Json{{"op", "binop"}, {"bop", binop_json(in.bop)}, {"rs1", reg_json(in.rs1)},
                  {"rs2", reg_json(in.rs2)}, {"rd", reg_json(in.rd)}};
    case Op::Label: return Json{{"op", "label"}, {"label", in.label}};
    case Op::PtrOfLabel:
      return Json{{"op", "ptroflabel"}, {"label", in.label}, {"rd", reg_json(in.rd)}};
    case Op::Load: return Json{{"op", "load"}, {"rs", reg_json(in.rs1)}, {"rd", reg_json(in.rd)}};
    case Op::Store:
      return Json{{"op", "store"}, {"rd", reg_json(in.rd)}, {"rs", reg_json(in.rs1)}};
    case Op::Alloc:
      return Json{{"op", "alloc"}, {"rd", reg_json(in.rd)}, {"rs", reg_json(in.rs1)}};
    case Op::Bnz: return Json{{"op", "bnz"}, {"rs", reg_json(in.rs1)}, {"label", in.label}};
    case Op::Jump: return Json{{"op", "jump"}, {"rs", reg_json(in.rs1)}};
    case Op::JumpFunPtr: return Json{{"op", "jumpfunptr"}, {"rs", reg_json(in.rs1)}};
    case Op::Jal: return Json{{"op", "jal"}, {"label", in.label}};
    case Op::Call: return Json{{"op", "call"}, {"comp", in.comp}, {"proc", in.proc}};
    case Op::Return: return Json{{"op", "return"}};
    case Op::Nop: return Json{{"op", "nop"}};
    case Op::Halt: return Json{{"op", "halt"}};
  }
  bad("instruction opcode");
}

Instr instr_from(const Json& j) {
  std::string op = get_str(j, "op");
  auto rd = [&] { return reg_from(get_obj(j, "rd")); };
  auto rs = [&] { return reg_from(get_obj(j, "rs")); };
  if (op == "const") return i_const(value_from_json(get_obj(j, "v")), rd());
  if (op == "mov") return i_mov(rs(), rd());
  if (op == "binop")
    return i_binop(binop_from(get_obj(j, "bop")), reg_from(get_obj(j, "rs1")),
                   reg_from(get_obj(j, "rs2")), rd());
  if (op == "label") return i_label(get_str(j, "label"));
  if (op == "ptroflabel") return i_ptroflabel(get_str(j, "label"), rd());
  if (op == "load") return i_load(rs(), rd());
  if (op == "store") return i_store(rd(), rs());
  if (op == "alloc") return i_alloc(rd(), rs());
  if (op == "bnz") return i_bnz(rs(), get_str(j, "label"));
  if (op == "jump") return i_jump(rs());
  if (op == "jumpfunptr") return i_jumpfunptr(rs());
  if (op == "jal") return i_jal(get_str(j, "label"));
  if (op == "call") return i_call(static_cast<int>(get_int(j, "comp")), get_str(j, "proc"));
  if (op == "return") return i_return();
  if (op == "nop") return i_nop();
  if (op == "halt") return i_halt();
  bad("instruction opcode '" + op + "'");
}

// ---- events -------------------------------------------------------------

const char* tag_name(EventTag t) {
  switch (t) {
    case EventTag::Call: return "call";
    case EventTag::Ret: return "ret";
    case EventTag::Const: return "const";
    case EventTag::Mov: return "mov";
    case EventTag::BinOp: return "binop";
    case EventTag::Load: return "load";
    case EventTag::Store: return "store";
    case EventTag::Alloc: return "alloc";
  }
  return "?";
}

EventTag tag_from(const std::string& s) {
  for (EventTag t : {EventTag::Call, EventTag::Ret, EventTag::Const, EventTag::Mov,
                     EventTag::BinOp, EventTag::Load, EventTag::Store, EventTag::Alloc})
    if (s == tag_name(t)) return t;
  bad("event kind '" + s + "'");
}

Json event_json(const Event& e, bool with_mem) {
  Json j;
  j["kind"] = tag_name(e.tag);
  if (with_mem) j["mem"] = to_json(e.mem);
  if (is_interaction(e.tag)) {
    j["caller"] = e.caller;
    j["callee"] = e.callee;
    if (e.tag == EventTag::Call) j["proc"] = e.proc;
    j["arg"] = to_json(e.arg);
    // Interaction events inside a data-flow trace also carry the snapshot
    // of the (invalidated) register file and the executing component.
    if (e.cur >= 0) {
      Json regs = Json::array();
      for (Reg r : kAllRegs) regs.push_back(to_json(reg_at(e.reg, r)));
      j["reg"] = regs;
      j["cur"] = e.cur;
    }
  } else {
    j["arg"] = to_json(e.arg);
    Json regs = Json::array();
    for (Reg r : kAllRegs) regs.push_back(to_json(reg_at(e.reg, r)));
    j["reg"] = regs;
    j["cur"] = e.cur;
    j["rd"] = reg_json(e.rd);
    j["rs1"] = reg_json(e.rs1);
    j["rs2"] = reg_json(e.rs2);
    if (e.tag == EventTag::BinOp) j["op"] = binop_json(e.bop);
  }
  return j;
}

Event event_from(const Json& j) {
  Event e;
  e.tag = tag_from(get_str(j, "kind"));
  if (j.contains("mem")) e.mem = memory_from_json(j["mem"]);
  e.arg = value_from_json(get_obj(j, "arg"));
  if (is_interaction(e.tag)) {
    e.caller = static_cast<int>(get_int(j, "caller"));
    e.callee = static_cast<int>(get_int(j, "callee"));
    if (e.tag == EventTag::Call) e.proc = get_str(j, "proc");
    if (j.contains("reg")) {
      const Json& regs = j["reg"];
      if (!regs.is_array() || regs.size() != kNumRegs) bad("register snapshot");
      for (std::size_t i = 0; i < kNumRegs; ++i)
        reg_at(e.reg, kAllRegs[i]) = value_from_json(regs[i]);
      e.cur = static_cast<int>(get_int(j, "cur"));
    }
  } else {
    const Json& regs = get_obj(j, "reg");
    if (!regs.is_array() || regs.size() != kNumRegs) bad("register snapshot");
    for (std::size_t i = 0; i < kNumRegs; ++i)
      reg_at(e.reg, kAllRegs[i]) = value_from_json(regs[i]);
    e.cur = static_cast<int>(get_int(j, "cur"));
    e.rd = reg_from(get_obj(j, "rd"));
    e.rs1 = reg_from(get_obj(j, "rs1"));
    e.rs2 = reg_from(get_obj(j, "rs2"));
    if (e.tag == EventTag::BinOp) e.bop = binop_from(get_obj(j, "op"));
  }
  return e;
}

Json names_json(const CompNames& names) {
  Json j = Json::object();
  for (const auto& [n, c] : names) j[n] = c;
  return j;
}

CompNames names_from(const Json& j) {
  CompNames names;
  for (const auto& [n, c] : j.items()) names[n] = c.get<int>();
  return names;
}

}  // namespace

Json to_json(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return Json{{"int", v.i}};
    case Value::Kind::Ptr:
      return Json{{"ptr", Json::array({v.p.perm == Permission::Code ? "code" : "data",
                                       v.p.comp, v.p.block, v.p.off})}};
    case Value::Kind::Err: return "error";
  }
  bad("value kind");
}

Value value_from_json(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "error") return Value::error();
  if (j.is_object() && j.contains("int") && j["int"].is_number_integer())
    return Value::integer(j["int"].get<std::int64_t>());
  if (j.is_object() && j.contains("ptr")) {
    const Json& p = j["ptr"];
    if (!p.is_array() || p.size() != 4 || !p[0].is_string()) bad("pointer " + j.dump());
    std::string perm = p[0].get<std::string>();
    if (perm != "data" && perm != "code") bad("permission '" + perm + "'");
    return Value::pointer({perm == "code" ? Permission::Code : Permission::Data,
                           p[1].get<int>(), p[2].get<int>(), p[3].get<std::int64_t>()});
  }
  bad("value " + j.dump());
}

Json to_json(const Memory& m) {
  Json j = Json::object();
  for (const auto& [c, cm] : m.components()) {
    Json blocks = Json::object();
    for (const auto& [b, blk] : cm.blocks) {
      Json cells = Json::array();
      for (const Value& v : blk.cells()) cells.push_back(to_json(v));
      blocks[key(b)] = Json{{"size", blk.size()}, {"cells", cells}};
    }
    j[key(c)] = Json{{"next", cm.next_dynamic}, {"blocks", blocks}};
  }
  return j;
}

Memory memory_from_json(const Json& j) {
  if (!j.is_object()) bad("memory");
  Memory m;
  for (const auto& [ck, jc] : j.items()) {
    int comp = int_key(ck, "component");
    m.ensure_component(comp);
    for (const auto& [bk, jb] : get_obj(jc, "blocks").items()) {
      std::vector<Value> cells;
      for (const Json& v : get_obj(jb, "cells")) cells.push_back(value_from_json(v));
      if (cells.size() != static_cast<std::size_t>(get_int(jb, "size"))) bad("block size");
      m.install_block(comp, int_key(bk, "block"), cells);
    }
    m.set_next_dynamic(comp, static_cast<int>(get_int(jc, "next")));
  }
  return m;
}

Json to_json(const Trace& t, bool with_mem) {
  Json events = Json::array();
  for (const Event& e : t) events.push_back(event_json(e, with_mem));
  return Json{{"events", events}};
}

Trace trace_from_json(const Json& j) {
  Trace t;
  for (const Json& e : get_obj(j, "events")) t.push_back(event_from(e));
  return t;
}

Json to_json(const SourceProgram& p) {
  Json procs = Json::object();
  for (const auto& [pr, body] : p.procs) procs[proc_key(pr)] = expr_json(body);
  return Json{{"lang", "source"},
              {"intf", intf_json(p.intf)},
              {"procs", procs},
              {"buffers", buffers_json(p.buffers)},
              {"ids", ids_json(p.ids)},
              {"names", names_json(p.names)}};
}

SourceProgram source_from_json(const Json& j) {
  if (j.contains("lang") && j["lang"] != "source") bad("not a source program");
  SourceProgram p;
  p.intf = intf_from(get_obj(j, "intf"));
  for (const auto& [k, body] : get_obj(j, "procs").items())
    p.procs[proc_from_key(k)] = expr_from(body);
  p.buffers = buffers_from(get_obj(j, "buffers"));
  p.ids = ids_from(get_obj(j, "ids"));
  if (j.contains("names")) p.names = names_from(j["names"]);
  return p;
}

Json to_json(const MachProgram& p) {
  Json procs = Json::object();
  for (const auto& [pr, code] : p.procs) {
    Json arr = Json::array();
    for (const Instr& in : code) arr.push_back(instr_json(in));
    procs[proc_key(pr)] = arr;
  }
  Json stack = Json::object();
  for (const auto& [c, n] : p.runtime_stack) stack[key(c)] = n;
  return Json{{"lang", "mach"},
              {"intf", intf_json(p.intf)},
              {"procs", procs},
              {"buffers", buffers_json(p.buffers)},
              {"ids", ids_json(p.ids)},
              {"names", names_json(p.names)},
              {"stack", stack}};
}

MachProgram mach_from_json(const Json& j) {
  if (j.contains("lang") && j["lang"] != "mach") bad("not a machine program");
  MachProgram p;
  p.intf = intf_from(get_obj(j, "intf"));
  for (const auto& [k, arr] : get_obj(j, "procs").items()) {
    std::vector<Instr>& code = p.procs[proc_from_key(k)];
    for (const Json& in : arr) code.push_back(instr_from(in));
  }
  p.buffers = buffers_from(get_obj(j, "buffers"));
  p.ids = ids_from(get_obj(j, "ids"));
  if (j.contains("names")) p.names = names_from(j["names"]);
  if (j.contains("stack"))
    for (const auto& [k, n] : j["stack"].items())
      p.runtime_stack[int_key(k, "stack")] = n.get<std::int64_t>();
  return p;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Json j = Json::parse(in, nullptr, true);
  return j;
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

}  // namespace seclab

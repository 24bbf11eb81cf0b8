#include "seclab/asm_format.hpp"

#include <sstream>
#include <stdexcept>

namespace seclab {

namespace {

std::string val_str(const Value& v) { return to_string(v); }

struct Parser {
  int lineno = 0;

  [[noreturn]] void err(const std::string& m) {
    throw std::runtime_error("asm line " + std::to_string(lineno) + ": " + m);
  }

  std::int64_t num(const std::string& tok) {
    try {
      std::size_t pos = 0;
      std::int64_t v = std::stoll(tok, &pos);
      if (pos != tok.size()) err("expected number, got '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      err("expected number, got '" + tok + "'");
    }
  }

  Reg reg(const std::string& tok) {
    for (Reg r : kAllRegs)
      if (tok == to_string(r)) return r;
    err("unknown register '" + tok + "'");
  }

  // Accepts a leading '*' (load/store address syntax).
  Reg reg_deref(std::string tok) {
    if (!tok.empty() && tok[0] == '*') tok.erase(0, 1);
    return reg(tok);
  }

  BinOpKind binop(const std::string& tok) {
    for (BinOpKind op : {BinOpKind::Add, BinOpKind::Sub, BinOpKind::Mul, BinOpKind::Eq,
                         BinOpKind::Leq})
      if (tok == to_string(op)) return op;
    err("unknown operator '" + tok + "'");
  }

  Value value(const std::string& tok) {
    if (tok == "error") return Value::error();
    if (!tok.empty() && tok[0] == '(') {
      // (perm,comp,block,off)
      std::string body = tok.substr(1, tok.size() - (tok.back() == ')' ? 2 : 1));
      std::istringstream ss(body);
      std::string perm, c, b, o;
      if (!std::getline(ss, perm, ',') || !std::getline(ss, c, ',') ||
          !std::getline(ss, b, ',') || !std::getline(ss, o))
        err("malformed pointer '" + tok + "'");
      if (perm != "data" && perm != "code") err("bad permission '" + perm + "'");
      return Value::pointer({perm == "code" ? Permission::Code : Permission::Data,
                             static_cast<int>(num(c)), static_cast<int>(num(b)), num(o)});
    }
    return Value::integer(num(tok));
  }

  std::vector<std::string> tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (tok[0] == '#') break;
      if (tok == "->" || tok == "<-") continue;  // punctuation only
      out.push_back(tok);
    }
    return out;
  }

  Instr instr(const std::vector<std::string>& t) {
    auto want = [&](std::size_t n) {
      if (t.size() != n) err("wrong arity for '" + t[0] + "'");
    };
    const std::string& m = t[0];
    if (m.size() > 1 && m.back() == ':') return i_label(m.substr(0, m.size() - 1));
    if (m == "const") { want(3); return i_const(value(t[1]), reg(t[2])); }
    if (m == "mov") { want(3); return i_mov(reg(t[1]), reg(t[2])); }
    if (m == "binop") { want(5); return i_binop(binop(t[1]), reg(t[2]), reg(t[3]), reg(t[4])); }
    if (m == "ptroflabel") { want(3); return i_ptroflabel(t[1], reg(t[2])); }
    if (m == "load") { want(3); return i_load(reg_deref(t[1]), reg(t[2])); }
    if (m == "store") { want(3); return i_store(reg_deref(t[1]), reg(t[2])); }
    if (m == "alloc") { want(3); return i_alloc(reg(t[2]), reg(t[1])); }
    if (m == "bnz") { want(3); return i_bnz(reg(t[1]), t[2]); }
    if (m == "jump") { want(2); return i_jump(reg(t[1])); }
    if (m == "jumpfunptr") { want(2); return i_jumpfunptr(reg(t[1])); }
    if (m == "jal") { want(2); return i_jal(t[1]); }
    if (m == "call") { want(3); return i_call(static_cast<int>(num(t[1])), t[2]); }
    if (m == "return") { want(1); return i_return(); }
    if (m == "nop") { want(1); return i_nop(); }
    if (m == "halt") { want(1); return i_halt(); }
    err("unknown mnemonic '" + m + "'");
  }
};

}  // namespace

std::string mach_to_asm(const MachProgram& p) {
  std::ostringstream out;
  if (p.intf.has_main()) out << ".main " << p.intf.main_comp << "\n";
  for (const auto& [n, c] : p.names) out << ".name " << n << " " << c << "\n";
  for (const auto& [comp, ci] : p.intf.comps) {
    out << "\n.component " << comp << "\n";
    for (const std::string& e : ci.exports) out << ".export " << e << "\n";
    for (const auto& [cc, pr] : ci.imports) out << ".import " << cc << " " << pr << "\n";
    auto bit = p.buffers.find(comp);
    if (bit != p.buffers.end() && !bit->second.empty()) {
      out << ".buffer";
      for (const Value& v : bit->second) out << " " << val_str(v);
      out << "\n";
    }
    auto sit = p.runtime_stack.find(comp);
    if (sit != p.runtime_stack.end()) out << ".stack " << sit->second << "\n";
    for (const auto& [pr, code] : p.procs) {
      if (pr.first != comp) continue;
      out << ".proc " << pr.second << " " << p.ids.id_of(pr) << "\n";
      for (const Instr& in : code) out << "  " << to_string(in) << "\n";
    }
  }
  return out.str();
}

MachProgram mach_from_asm(const std::string& text) {
  MachProgram p;
  Parser ps;
  int comp = -1;
  std::vector<Instr>* code = nullptr;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++ps.lineno;
    auto t = ps.tokens(line);
    if (t.empty()) continue;
    const std::string& d = t[0];
    if (d == ".main") {
      if (t.size() != 2) ps.err(".main takes one argument");
      p.intf.main_comp = static_cast<int>(ps.num(t[1]));
    } else if (d == ".name") {
      if (t.size() != 3) ps.err(".name takes two arguments");
      p.names[t[1]] = static_cast<int>(ps.num(t[2]));
    } else if (d == ".component") {
      if (t.size() != 2) ps.err(".component takes one argument");
      comp = static_cast<int>(ps.num(t[1]));
      p.intf.comps[comp];
      code = nullptr;
    } else if (comp < 0) {
      ps.err("directive before .component");
    } else if (d == ".export") {
      if (t.size() != 2) ps.err(".export takes one argument");
      p.intf.comps[comp].exports.insert(t[1]);
    } else if (d == ".import") {
      if (t.size() != 3) ps.err(".import takes two arguments");
      p.intf.comps[comp].imports.insert({static_cast<int>(ps.num(t[1])), t[2]});
    } else if (d == ".buffer") {
      auto& cells = p.buffers[comp];
      for (std::size_t i = 1; i < t.size(); ++i) cells.push_back(ps.value(t[i]));
    } else if (d == ".stack") {
      if (t.size() != 2) ps.err(".stack takes one argument");
      p.runtime_stack[comp] = ps.num(t[1]);
    } else if (d == ".proc") {
      if (t.size() != 3) ps.err(".proc takes a name and an id");
      ProcRef pr{comp, t[1]};
      if (p.procs.count(pr)) ps.err("duplicate procedure '" + t[1] + "'");
      p.ids.ids[pr] = static_cast<int>(ps.num(t[2]));
      code = &p.procs[pr];
    } else if (d[0] == '.') {
      ps.err("unknown directive '" + d + "'");
    } else {
      if (!code) ps.err("instruction outside .proc");
      code->push_back(ps.instr(t));
    }
  }
  return p;
}

}  // namespace seclab

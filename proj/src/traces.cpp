#include "seclab/traces.hpp"

namespace seclab {

std::string to_string(Reg r) {
  switch (r) {
    case Reg::Com: return "rcom";
    case Reg::One: return "r1";
    case Reg::Aux1: return "raux1";
    case Reg::Aux2: return "raux2";
    case Reg::Sp: return "rsp";
    case Reg::Ra: return "rra";
    case Reg::Arg: return "rarg";
  }
  return "?";
}

Event make_call(Memory mem, int caller, int callee, std::string proc, Value arg) {
  Event e;
  e.tag = EventTag::Call;
  e.mem = std::move(mem);
  e.caller = caller;
  e.callee = callee;
  e.proc = std::move(proc);
  e.arg = arg;
  return e;
}

Event make_ret(Memory mem, int from, int to, Value val) {
  Event e;
  e.tag = EventTag::Ret;
  e.mem = std::move(mem);
  e.caller = from;
  e.callee = to;
  e.arg = val;
  return e;
}

std::string to_string(const Event& e) {
  switch (e.tag) {
    case EventTag::Call:
      return "Call " + std::to_string(e.caller) + "->" + std::to_string(e.callee) + "." +
             e.proc + "(" + to_string(e.arg) + ")";
    case EventTag::Ret:
      return "Ret " + std::to_string(e.caller) + "->" + std::to_string(e.callee) + " " +
             to_string(e.arg);
    case EventTag::Const: return "Const " + to_string(e.arg);
    case EventTag::Mov: return "Mov " + to_string(e.arg);
    case EventTag::BinOp: return "BinOp " + to_string(e.arg);
    case EventTag::Load: return "Load " + to_string(e.arg);
    case EventTag::Store: return "Store " + to_string(e.arg);
    case EventTag::Alloc: return "Alloc " + to_string(e.arg);
  }
  return "?";
}

Trace remove_df(const Trace& t) {
  Trace out;
  for (const Event& e : t) {
    if (!is_interaction(e.tag)) continue;
    Event kept = e;
    kept.reg = RegFile{};
    kept.cur = -1;
    kept.rd = kept.rs1 = kept.rs2 = Reg::Com;
    kept.bop = BinOpKind::Add;
    out.push_back(std::move(kept));
  }
  return out;
}

namespace {

// Extends `shared` with everything reachable from it through `mem`.
void close_over(const Memory& mem, std::set<Loc>& shared) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Loc& loc : std::set<Loc>(shared)) {
      const Block* b = mem.find_block(loc.first, loc.second);
      if (!b) continue;
      for (std::size_t i = 0; i < b->size(); ++i) {
        const Value& v = b->get(i);
        if (!v.is_data_ptr() || v.p.block < 0) continue;
        if (shared.insert({v.p.comp, v.p.block}).second) changed = true;
      }
    }
  }
}

}  // namespace

std::vector<std::set<Loc>> shared_blocks_prefixes(const Trace& t) {
  std::vector<std::set<Loc>> out;
  std::set<Loc> shared;
  for (const Event& e : t) {
    if (is_interaction(e.tag) && e.arg.is_data_ptr() && e.arg.p.block >= 0)
      shared.insert({e.arg.p.comp, e.arg.p.block});
    close_over(e.mem, shared);
    out.push_back(shared);
  }
  return out;
}

std::set<Loc> shared_blocks(const Trace& t) {
  auto prefixes = shared_blocks_prefixes(t);
  return prefixes.empty() ? std::set<Loc>{} : prefixes.back();
}

Memory shared_proj(const Memory& m, const std::set<Loc>& shared) {
  return m.proj_blocks(shared);
}

Memory private_proj(const Memory& m, const std::set<Loc>& shared) {
  std::set<Loc> keep;
  for (const auto& [c, cm] : m.components())
    for (const auto& [b, blk] : cm.blocks)
      if (!shared.count({c, b})) keep.insert({c, b});
  return m.proj_blocks(keep);
}

bool match_events(const Event& a, const Event& b) {
  return a.tag == b.tag && a.caller == b.caller && a.callee == b.callee && a.proc == b.proc &&
         a.cur == b.cur;
}

bool well_bracketed(const Trace& t) {
  std::vector<std::pair<int, int>> stack;  // (caller, callee)
  for (const Event& e : t) {
    if (e.tag == EventTag::Call) {
      stack.push_back({e.caller, e.callee});
    } else if (e.tag == EventTag::Ret) {
      if (stack.empty()) return false;
      auto [caller, callee] = stack.back();
      stack.pop_back();
      // Ret goes from the callee back to the caller.
      if (e.caller != callee || e.callee != caller) return false;
    }
  }
  return true;  // unmatched calls are fine: traces may be prefixes
}

bool check_safety_nowrite(const Trace& t, const NoWrite& loc) {
  Pointer p{Permission::Data, loc.comp, loc.block, loc.off};
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].tag == EventTag::Call) {
      stack.push_back(i);
    } else if (t[i].tag == EventTag::Ret) {
      if (stack.empty()) return false;  // ill-bracketed: fail closed
      std::size_t call = stack.back();
      stack.pop_back();
      const Event& c = t[call];
      if (loc.caller >= 0 && c.caller != loc.caller) continue;
      if (loc.callee >= 0 && c.callee != loc.callee) continue;
      if (!loc.proc.empty() && c.proc != loc.proc) continue;
      if (c.mem.load(p) != t[i].mem.load(p)) return false;
    }
  }
  return true;
}

}  // namespace seclab

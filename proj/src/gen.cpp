#include "seclab/gen.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace seclab {

namespace {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  std::uint64_t next() { return eng(); }
  int below(int n) { return n <= 1 ? 0 : static_cast<int>(next() % static_cast<unsigned>(n)); }
  bool chance(double p) { return static_cast<double>(next() % 10000) < p * 10000.0; }
};

// The call graph follows a global rank order (callers only call lower-rank
// procedures, main ranks highest), so every generated run terminates.
struct ProcPlan {
  int comp;
  std::string name;
  int rank;
  bool ptr_arg;  // callers pass a static-buffer pointer instead of an int
};

struct Plan {
  int comps;
  int procs_per_comp;
  std::vector<ProcPlan> procs;
  std::map<int, std::int64_t> bufsize;
  Interface intf;
  ProcIds ids;

  const ProcPlan* find(const ProcRef& ref) const {
    for (const auto& p : procs)
      if (p.comp == ref.first && p.name == ref.second) return &p;
    return nullptr;
  }
  std::vector<const ProcPlan*> callees_of(const ProcPlan& self) const {
    std::vector<const ProcPlan*> out;
    for (const auto& p : procs)
      if (p.rank < self.rank && p.comp != self.comp && p.name != "main") out.push_back(&p);
    return out;
  }
};

Plan make_plan(const GenConfig& cfg) {
  // Independent stream so body generation never skews the shared plan.
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 1);
  Plan plan;
  plan.comps = std::max(2, cfg.components);
  plan.procs_per_comp = std::max(1, cfg.procs_per_comp);

  std::map<int, std::vector<std::string>> names;
  for (int c = 0; c < plan.comps; ++c) {
    plan.bufsize[c] = 4 + rng.below(5);
    for (int i = 0; i < plan.procs_per_comp; ++i) {
      std::string nm = "f" + std::to_string(i);
      plan.procs.push_back({c, nm, c * plan.procs_per_comp + i, rng.chance(cfg.share_prob)});
      names[c].push_back(nm);
    }
  }
  plan.procs.push_back({0, "main", plan.comps * plan.procs_per_comp, false});
  names[0].push_back("main");

  plan.intf.main_comp = 0;
  for (int c = 0; c < plan.comps; ++c) {
    ComponentInterface ci;
    for (const auto& p : plan.procs)
      if (p.comp == c)
        ci.exports.insert(p.name);
      else if (p.name != "main")
        ci.imports.insert({p.comp, p.name});
    plan.intf.comps[c] = ci;
  }
  plan.ids = ProcIds::sequential(names);
  return plan;
}

// ----- source bodies ----------------------------------------------------
//
// Expressions keep a simple typing discipline: every expression yields an
// int, static-buffer cells only ever hold ints, and pointer expressions are
// in-bounds by construction, so generated programs never get stuck.

ExprPtr gen_int(Rng& rng, const Plan& plan, const ProcPlan& self, const GenConfig& cfg,
                int depth);

ExprPtr gen_ptr(Rng& rng, const ProcPlan& self) {
  // Offset 0 of the static buffer, or pass our own pointer argument along.
  if (self.ptr_arg && rng.chance(0.4)) return e_arg();
  return e_local();
}

ExprPtr gen_cell(Rng& rng, const Plan& plan, const ProcPlan& self) {
  std::int64_t n = plan.bufsize.at(self.comp);
  // Cells 0..3 exist in every buffer, so pointer recipients may use them too.
  if (self.ptr_arg && rng.chance(0.3))
    return e_binop(BinOpKind::Add, e_arg(), e_int(rng.below(4)));
  return e_binop(BinOpKind::Add, e_local(), e_int(rng.below(static_cast<int>(n))));
}

ExprPtr gen_int(Rng& rng, const Plan& plan, const ProcPlan& self, const GenConfig& cfg,
                int depth) {
  if (depth <= 0) {
    switch (rng.below(3)) {
      case 0: return e_int(rng.below(100));
      case 1: return self.ptr_arg ? e_deref(gen_cell(rng, plan, self)) : e_arg();
      default: return e_deref(gen_cell(rng, plan, self));
    }
  }
  switch (rng.below(8)) {
    case 0:
      return e_int(rng.below(100));
    case 1: {
      BinOpKind ops[] = {BinOpKind::Add, BinOpKind::Sub, BinOpKind::Mul, BinOpKind::Eq,
                         BinOpKind::Leq};
      return e_binop(ops[rng.below(5)], gen_int(rng, plan, self, cfg, depth - 1),
                     gen_int(rng, plan, self, cfg, depth - 1));
    }
    case 2:
      return e_seq(e_assign(gen_cell(rng, plan, self), gen_int(rng, plan, self, cfg, depth - 1)),
                   gen_int(rng, plan, self, cfg, depth - 1));
    case 3:
      return e_if(gen_int(rng, plan, self, cfg, depth - 1),
                  gen_int(rng, plan, self, cfg, depth - 1),
                  gen_int(rng, plan, self, cfg, depth - 1));
    case 4: {
      auto cands = plan.callees_of(self);
      if (cands.empty()) return e_int(rng.below(100));
      const ProcPlan* callee = cands[rng.below(static_cast<int>(cands.size()))];
      ExprPtr arg = callee->ptr_arg ? gen_ptr(rng, self) : gen_int(rng, plan, self, cfg, depth - 1);
      return e_call(callee->comp, callee->name, arg);
    }
    case 5: {
      // Fresh block initialised through the assignment itself.
      return e_assign(e_alloc(e_int(1 + rng.below(3))), gen_int(rng, plan, self, cfg, depth - 1));
    }
    case 6: {
      // Dispatch through a function pointer to a lower-rank local procedure.
      for (const auto& p : plan.procs)
        if (p.comp == self.comp && p.rank < self.rank && !p.ptr_arg)
          return e_callptr(e_funptr(p.name), gen_int(rng, plan, self, cfg, depth - 1));
      return e_deref(gen_cell(rng, plan, self));
    }
    default:
      return e_binop(BinOpKind::Add, e_deref(gen_cell(rng, plan, self)),
                     gen_int(rng, plan, self, cfg, depth - 1));
  }
}

// ----- target bodies ----------------------------------------------------
//
// Same discipline in machine code: a per-register kind model keeps every
// emitted instruction well-typed and in-bounds. `Opq` marks values that are
// only safe to store, not to compute with.

enum class RK { Dead, Int, Ptr, Opq };

struct MModel {
  RK k[kNumRegs];
  std::int64_t sz[kNumRegs];  // valid cells ahead of a Ptr
  MModel() {
    for (int i = 0; i < kNumRegs; ++i) k[i] = RK::Dead, sz[i] = 0;
  }
  RK& kind(Reg r) { return k[static_cast<int>(r)]; }
  std::int64_t& size(Reg r) { return sz[static_cast<int>(r)]; }
};

const Reg kScratch[] = {Reg::One, Reg::Aux1, Reg::Aux2, Reg::Sp, Reg::Ra, Reg::Arg};

Reg pick_reg(Rng& rng) { return kScratch[rng.below(6)]; }

std::optional<Reg> find_kind(Rng& rng, MModel& m, RK want, std::int64_t minsz = 0) {
  std::vector<Reg> hits;
  for (Reg r : kScratch)
    if (m.kind(r) == want && (want != RK::Ptr || m.size(r) >= minsz)) hits.push_back(r);
  if (m.kind(Reg::Com) == want && (want != RK::Ptr || m.size(Reg::Com) >= minsz))
    hits.push_back(Reg::Com);
  if (hits.empty()) return std::nullopt;
  return hits[rng.below(static_cast<int>(hits.size()))];
}

void emit_snippet(Rng& rng, const Plan& plan, const ProcPlan& self, const GenConfig& cfg,
                  std::vector<Instr>& code, MModel& m, int& labels) {
  switch (rng.below(9)) {
    case 0: {
      Reg rd = pick_reg(rng);
      code.push_back(i_const(Value::integer(rng.below(100)), rd));
      m.kind(rd) = RK::Int;
      break;
    }
    case 1: {
      Reg rd = pick_reg(rng);
      std::int64_t n = plan.bufsize.at(self.comp);
      std::int64_t off = rng.below(static_cast<int>(n));
      code.push_back(i_const(Value::pointer({Permission::Data, self.comp, 0, off}), rd));
      m.kind(rd) = RK::Ptr;
      m.size(rd) = n - off;
      break;
    }
    case 2: {
      auto a = find_kind(rng, m, RK::Int);
      auto b = find_kind(rng, m, RK::Int);
      if (!a || !b) break;
      Reg rd = pick_reg(rng);
      BinOpKind ops[] = {BinOpKind::Add, BinOpKind::Sub, BinOpKind::Mul, BinOpKind::Eq,
                         BinOpKind::Leq};
      code.push_back(i_binop(ops[rng.below(5)], *a, *b, rd));
      m.kind(rd) = RK::Int;
      break;
    }
    case 3: {
      auto p = find_kind(rng, m, RK::Ptr, 2);
      if (!p) break;
      Reg step = pick_reg(rng);
      if (step == *p) break;
      Reg rd = pick_reg(rng);
      if (rd == step) break;
      code.push_back(i_const(Value::integer(1), step));
      code.push_back(i_binop(BinOpKind::Add, *p, step, rd));
      std::int64_t rest = m.size(*p) - 1;
      m.kind(step) = RK::Int;
      m.kind(rd) = RK::Ptr;
      m.size(rd) = rest;
      break;
    }
    case 4: {
      auto p = find_kind(rng, m, RK::Ptr, 1);
      if (!p) break;
      Reg rd = pick_reg(rng);
      code.push_back(i_load(*p, rd));
      m.kind(rd) = RK::Opq;  // stashed pointers make loaded cells untyped
      break;
    }
    case 5: {
      auto p = find_kind(rng, m, RK::Ptr, 1);
      if (!p) break;
      RK vk = rng.chance(0.4) ? RK::Ptr : (rng.chance(0.5) ? RK::Int : RK::Opq);
      auto v = find_kind(rng, m, vk);
      if (!v) v = find_kind(rng, m, RK::Int);
      if (!v || *v == *p) break;
      code.push_back(i_store(*p, *v));
      break;
    }
    case 6: {
      Reg rs = pick_reg(rng);
      Reg rd = pick_reg(rng);
      if (rs == rd) break;
      code.push_back(i_const(Value::integer(1 + rng.below(3)), rs));
      code.push_back(i_alloc(rd, rs));
      m.kind(rs) = RK::Int;
      m.kind(rd) = RK::Ptr;
      m.size(rd) = 1;
      break;
    }
    case 7: {
      auto c = find_kind(rng, m, RK::Int);
      if (!c) break;
      std::string l = "g" + std::to_string(labels++);
      Reg rd = pick_reg(rng);
      code.push_back(i_bnz(*c, l));
      code.push_back(i_const(Value::integer(rng.below(100)), rd));
      code.push_back(i_label(l));
      m.kind(rd) = RK::Opq;  // written on one path only
      break;
    }
    default: {
      auto cands = plan.callees_of(self);
      if (cands.empty()) break;
      const ProcPlan* callee = cands[rng.below(static_cast<int>(cands.size()))];
      if (callee->ptr_arg) {
        code.push_back(
            i_const(Value::pointer({Permission::Data, self.comp, 0, 0}), Reg::Com));
      } else {
        auto a = find_kind(rng, m, RK::Int);
        if (a && *a != Reg::Com)
          code.push_back(i_mov(*a, Reg::Com));
        else
          code.push_back(i_const(Value::integer(rng.below(100)), Reg::Com));
      }
      code.push_back(i_call(callee->comp, callee->name));
      for (Reg r : kScratch) m.kind(r) = RK::Dead;
      m.kind(Reg::Com) = RK::Int;  // every generated procedure returns an int
      break;
    }
  }
}

std::vector<Instr> gen_mach_body(Rng& rng, const Plan& plan, const ProcPlan& self,
                                 const GenConfig& cfg, int& labels) {
  std::vector<Instr> code;
  MModel m;
  m.kind(Reg::Com) = self.ptr_arg ? RK::Ptr : RK::Int;
  m.size(Reg::Com) = 1;

  int n = 1 + rng.below(std::max(1, cfg.max_snippets));
  // Main drives the run: make sure it talks to the other components.
  int calls = self.name == "main" ? 1 + rng.below(2) : 0;
  for (int i = 0; i < n; ++i) emit_snippet(rng, plan, self, cfg, code, m, labels);
  for (int i = 0; i < calls; ++i) {
    auto cands = plan.callees_of(self);
    if (cands.empty()) break;
    const ProcPlan* callee = cands[rng.below(static_cast<int>(cands.size()))];
    if (callee->ptr_arg || rng.chance(cfg.share_prob))
      code.push_back(i_const(Value::pointer({Permission::Data, self.comp, 0, 0}), Reg::Com));
    else
      code.push_back(i_const(Value::integer(rng.below(100)), Reg::Com));
    code.push_back(i_call(callee->comp, callee->name));
    for (Reg r : kScratch) m.kind(r) = RK::Dead;
    m.kind(Reg::Com) = RK::Int;
  }
  code.push_back(i_const(Value::integer(rng.below(100)), Reg::Com));
  code.push_back(self.name == "main" ? i_halt() : i_return());
  return code;
}

std::vector<Value> gen_buffer(Rng& rng, std::int64_t n) {
  std::vector<Value> buf;
  for (std::int64_t i = 0; i < n; ++i) buf.push_back(Value::integer(rng.below(10)));
  return buf;
}

}  // namespace

SourceProgram gen_source_program(const GenConfig& cfg) {
  Plan plan = make_plan(cfg);
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 2);
  SourceProgram out;
  out.intf = plan.intf;
  out.ids = plan.ids;
  for (const auto& [c, n] : plan.bufsize) out.buffers[c] = gen_buffer(rng, n);
  for (const auto& p : plan.procs) {
    int depth = 1 + rng.below(std::max(1, cfg.max_depth));
    out.procs[{p.comp, p.name}] = gen_int(rng, plan, p, cfg, depth);
  }
  return out;
}

MachProgram gen_mach_program(const GenConfig& cfg) {
  Plan plan = make_plan(cfg);
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 3);
  MachProgram out;
  out.intf = plan.intf;
  out.ids = plan.ids;
  for (const auto& [c, n] : plan.bufsize) out.buffers[c] = gen_buffer(rng, n);
  std::map<int, int> labels;
  for (const auto& p : plan.procs)
    out.procs[{p.comp, p.name}] = gen_mach_body(rng, plan, p, cfg, labels[p.comp]);
  return out;
}

MachProgram gen_mach_context(const GenConfig& cfg, const Interface& part,
                             const std::set<ProcRef>& ptr_args) {
  Plan plan = make_plan(cfg);
  for (auto& p : plan.procs)
    if (ptr_args.count({p.comp, p.name})) p.ptr_arg = true;
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 4);
  MachProgram out;
  std::map<int, int> labels;
  for (const auto& p : plan.procs) {
    if (part.defines(p.comp)) continue;
    out.procs[{p.comp, p.name}] = gen_mach_body(rng, plan, p, cfg, labels[p.comp]);
  }
  for (const auto& [c, ci] : plan.intf.comps) {
    if (part.defines(c)) continue;
    out.intf.comps[c] = ci;
    out.buffers[c] = gen_buffer(rng, plan.bufsize.at(c));
  }
  out.intf.main_comp = -1;
  for (const auto& [ref, id] : plan.ids.ids)
    if (!part.defines(ref.first)) out.ids.ids[ref] = id;
  return out;
}

}  // namespace seclab

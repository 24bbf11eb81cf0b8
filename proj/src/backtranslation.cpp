#include "seclab/backtranslation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace seclab {

namespace {

constexpr std::int64_t kStaticShadowBlock = 1;  // target block b maps to source b+1

ExprPtr cell(std::int64_t off) { return e_binop(BinOpKind::Add, e_local(), e_int(off)); }
ExprPtr read_cell(std::int64_t off) { return e_deref(cell(off)); }
ExprPtr write_cell(std::int64_t off, ExprPtr v) { return e_assign(cell(off), std::move(v)); }
ExprPtr read_slot(Reg r) { return read_cell(MetaLayout::slot(r)); }
ExprPtr write_slot(Reg r, ExprPtr v) { return write_cell(MetaLayout::slot(r), std::move(v)); }

// Source expression producing the replayed counterpart of a value a machine
// instruction materialised as an immediate or label address.
std::optional<ExprPtr> expr_of_const(const Value& v, int comp, const MachProgram& t,
                                     std::string* why) {
  auto fail = [&](const std::string& m) -> std::optional<ExprPtr> {
    if (why) *why = m;
    return std::nullopt;
  };
  switch (v.kind) {
    case Value::Kind::Int:
      return e_int(v.i);
    case Value::Kind::Err:
      return e_err();
    case Value::Kind::Ptr:
      break;
  }
  if (v.is_code_ptr()) {
    if (v.p.comp != comp) return fail("Const of a foreign code pointer");
    auto ref = t.ids.proc_of(v.p.comp, v.p.block);
    if (!ref) return fail("Const of a code pointer with no procedure");
    return e_funptr(ref->second);
  }
  // Machine code can only name its own static buffer and its own runtime
  // stack block; the latter lives in the inline shadow region.
  if (v.p.comp == comp && v.p.block == 0)
    return e_binop(BinOpKind::Add, read_cell(MetaLayout::kShadowPtr), e_int(v.p.off));
  if (v.p.comp == comp && v.p.block == -1)
    return cell(MetaLayout::kStackShadow + v.p.off);
  return fail("Const of an unnameable data pointer");
}

ExprPtr invalidate_slots() {
  std::vector<ExprPtr> es;
  for (Reg r : kAllRegs)
    if (r != Reg::Com) es.push_back(write_slot(r, e_err()));
  return e_seq(std::move(es));
}

// One fragment per recorded event: replay its data flow on the register
// cells and shadow memory, bump the counter, and (except when the event
// hands control away) tail-call back into the dispatcher.
std::optional<ExprPtr> fragment(const Event& e, std::int64_t next_count, const ProcRef& self,
                                const MachProgram& t, std::string* why) {
  std::vector<ExprPtr> es;
  switch (e.tag) {
    case EventTag::Const: {
      auto v = expr_of_const(e.arg, e.cur, t, why);
      if (!v) return std::nullopt;
      es.push_back(write_slot(e.rd, *v));
      break;
    }
    case EventTag::Mov:
      es.push_back(write_slot(e.rd, read_slot(e.rs1)));
      break;
    case EventTag::BinOp:
      es.push_back(write_slot(e.rd, e_binop(e.bop, read_slot(e.rs1), read_slot(e.rs2))));
      break;
    case EventTag::Load:
      es.push_back(write_slot(e.rd, e_deref(read_slot(e.rs1))));
      break;
    case EventTag::Store:
      es.push_back(e_assign(read_slot(e.rd), read_slot(e.rs1)));
      break;
    case EventTag::Alloc:
      es.push_back(write_slot(e.rd, e_alloc(read_slot(e.rs1))));
      break;
    case EventTag::Call:
      // Bump the counter first: the callee may call back into us before
      // this call returns. After it returns the machine has invalidated
      // every register but the one carrying the result.
      es.push_back(write_cell(MetaLayout::kCounter, e_int(next_count)));
      es.push_back(write_cell(MetaLayout::kExtCall, e_int(1)));
      es.push_back(write_slot(Reg::Com, e_call(e.callee, e.proc, read_slot(Reg::Com))));
      es.push_back(invalidate_slots());
      es.push_back(write_cell(MetaLayout::kExtCall, e_int(0)));
      es.push_back(e_call(self.first, self.second, e_int(0)));
      return e_seq(std::move(es));
    case EventTag::Ret:
      // Hand the result back; the next entry into this component is
      // external, so flag it and do not tail-call.
      es.push_back(write_cell(MetaLayout::kCounter, e_int(next_count)));
      es.push_back(write_cell(MetaLayout::kExtCall, e_int(1)));
      es.push_back(read_slot(Reg::Com));
      return e_seq(std::move(es));
  }
  es.push_back(write_cell(MetaLayout::kCounter, e_int(next_count)));
  es.push_back(e_call(self.first, self.second, e_int(0)));
  return e_seq(std::move(es));
}

ExprPtr prelude(int comp, const MachProgram& t) {
  const auto bit = t.buffers.find(comp);
  std::int64_t n = bit == t.buffers.end() ? 0 : static_cast<std::int64_t>(bit->second.size());
  std::vector<ExprPtr> init;
  init.push_back(write_cell(MetaLayout::kInitFlag, e_int(1)));
  init.push_back(write_cell(MetaLayout::kShadowPtr, e_alloc(e_int(std::max<std::int64_t>(n, 1)))));
  for (std::int64_t i = 0; i < n; ++i)
    init.push_back(e_assign(e_binop(BinOpKind::Add, read_cell(MetaLayout::kShadowPtr), e_int(i)),
                            e_val(bit->second[static_cast<std::size_t>(i)])));
  // A compiled component's runtime block starts with the top-of-stack
  // pointer and a cleared re-entry flag; mirror both in the shadow.
  if (t.runtime_stack.count(comp)) {
    init.push_back(write_cell(MetaLayout::kStackShadow + kStackTopCell,
                              cell(MetaLayout::kStackShadow + kStackFirstFree)));
    init.push_back(write_cell(MetaLayout::kStackShadow + kIntraFlagCell, e_int(0)));
  }
  init.push_back(e_int(0));
  return e_if(read_cell(MetaLayout::kInitFlag), e_int(0), e_seq(std::move(init)));
}

ExprPtr entry_refresh() {
  std::vector<ExprPtr> es;
  es.push_back(write_slot(Reg::Com, e_arg()));
  for (Reg r : kAllRegs)
    if (r != Reg::Com) es.push_back(write_slot(r, e_err()));
  es.push_back(write_cell(MetaLayout::kExtCall, e_int(0)));
  es.push_back(e_int(0));
  return e_if(read_cell(MetaLayout::kExtCall), e_seq(std::move(es)), e_int(0));
}

}  // namespace

int attributed_comp(const Event& e) {
  switch (e.tag) {
    case EventTag::Call:
      return e.caller;
    case EventTag::Ret:
      return e.caller;  // the returning component
    default:
      return e.cur;
  }
}

std::optional<SourceProgram> backtranslate(const Trace& df_trace, const MachProgram& target,
                                           std::string* why) {
  SourceProgram out;
  out.intf = target.intf;
  out.ids = target.ids;
  out.names = target.names;

  // Per-component event schedule in trace order.
  std::map<int, std::vector<const Event*>> sched;
  for (const Event& e : df_trace) sched[attributed_comp(e)].push_back(&e);

  for (const auto& [comp, ci] : target.intf.comps) {
    // Metadata buffer: counter 0, first entry is external, register cells
    // and the shadow region start out as Error.
    const auto sit = target.runtime_stack.find(comp);
    std::int64_t shadow = sit == target.runtime_stack.end() ? 0 : sit->second;
    std::vector<Value> buf(static_cast<std::size_t>(MetaLayout::kStackShadow + shadow),
                           Value::error());
    buf[MetaLayout::kCounter] = Value::integer(0);
    buf[MetaLayout::kExtCall] = Value::integer(1);
    buf[MetaLayout::kInitFlag] = Value::integer(0);
    out.buffers[comp] = std::move(buf);

    // All procedures of a component share one body; pick any of them as the
    // tail-call target of the dispatcher.
    std::vector<ProcRef> refs;
    for (const auto& [ref, id] : target.ids.ids)
      if (ref.first == comp) refs.push_back(ref);
    if (refs.empty()) {
      if (why) *why = "component without procedures";
      return std::nullopt;
    }
    ProcRef self = refs.front();

    const auto& events = sched[comp];
    ExprPtr dispatch = e_exit();
    for (std::size_t k = events.size(); k-- > 0;) {
      auto frag = fragment(*events[k], static_cast<std::int64_t>(k) + 1, self, target, why);
      if (!frag) return std::nullopt;
      dispatch = e_if(e_binop(BinOpKind::Eq, read_cell(MetaLayout::kCounter),
                              e_int(static_cast<std::int64_t>(k))),
                      *frag, std::move(dispatch));
    }
    ExprPtr body = e_seq({prelude(comp, target), entry_refresh(), std::move(dispatch)});
    for (const ProcRef& ref : refs) out.procs[ref] = body;
  }
  return out;
}

bool mimicked_value(const Value& tv, const Value& sv, int comp) {
  switch (tv.kind) {
    case Value::Kind::Int:
    case Value::Kind::Err:
      return sv == tv;
    case Value::Kind::Ptr:
      break;
  }
  if (tv.is_code_ptr())  // procedure identity; the replay only keeps entry points
    return sv.is_code_ptr() && sv.p.comp == tv.p.comp && sv.p.block == tv.p.block;
  if (tv.p.block >= 0)
    return sv.is_data_ptr() && sv.p.comp == tv.p.comp && sv.p.block == tv.p.block + 1 &&
           sv.p.off == tv.p.off;
  if (tv.p.block == -1)
    return sv.is_data_ptr() && sv.p.comp == tv.p.comp && sv.p.block == 0 &&
           sv.p.off == MetaLayout::kStackShadow + tv.p.off;
  return false;
}

bool check_mimicking_state(const Trace& df_trace, std::size_t boundary, const Memory& src_mem,
                           const MachProgram& target, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (boundary > df_trace.size()) return fail("boundary past end of trace");

  std::map<int, std::int64_t> counts;
  std::set<int> active;
  if (target.intf.has_main()) active.insert(target.intf.main_comp);
  for (std::size_t i = 0; i < boundary; ++i) {
    const Event& e = df_trace[i];
    ++counts[attributed_comp(e)];
    if (e.tag == EventTag::Call) active.insert(e.callee);
    if (e.cur >= 0) active.insert(e.cur);
  }

  for (const auto& [comp, ci] : target.intf.comps) {
    const Block* meta = src_mem.find_block(comp, 0);
    if (!meta) return fail("missing metadata block");
    const Value& c = meta->get(MetaLayout::kCounter);
    std::int64_t want = counts.count(comp) ? counts[comp] : 0;
    if (!c.is_int() || c.i != want) return fail("event counter mismatch");
  }
  if (boundary == 0) return true;

  const Event& last = df_trace[boundary - 1];
  // After a call or return the resumed/entered component holds the live
  // registers; otherwise the executing component does.
  int rcomp = is_interaction(last.tag) ? last.callee : last.cur;
  const Block* meta = src_mem.find_block(rcomp, 0);
  if (!meta) return fail("missing metadata block");
  for (Reg r : kAllRegs) {
    // BinOp snapshots the register file before the write, but the replay
    // has already stored the result, so expect `arg` in the destination.
    Value want = (last.tag == EventTag::BinOp && r == last.rd) ? last.arg : reg_at(last.reg, r);
    if (!mimicked_value(want, meta->get(MetaLayout::slot(r)), rcomp))
      return fail("register cell mismatch: " + std::to_string(static_cast<int>(r)));
  }

  // Every nonnegative block of an already-active component must have a
  // shadow one block id up with matching (replayed) contents.
  for (int comp : active) {
    auto cit = last.mem.components().find(comp);
    if (cit == last.mem.components().end()) continue;
    for (const auto& [b, blk] : cit->second.blocks) {
      if (b < 0) continue;
      const Block* sb = src_mem.find_block(comp, b + 1);
      if (!sb) return fail("missing shadow block");
      if (b != 0 && sb->size() != blk.size()) return fail("shadow block size mismatch");
      if (b == 0 && sb->size() < std::max<std::size_t>(blk.size(), 1))
        return fail("static shadow too small");
      for (std::size_t off = 0; off < blk.size(); ++off)
        if (!mimicked_value(blk.get(off), sb->get(off), comp))
          return fail("shadow cell mismatch");
    }
  }
  return true;
}

}  // namespace seclab

#include "seclab/harness.hpp"

#include <algorithm>

namespace seclab {

namespace {

std::string show(std::size_t n) { return std::to_string(n); }

Trace prefix(const Trace& t, std::size_t n) {
  return Trace(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(std::min(n, t.size())));
}

}  // namespace

Verdict check_enrichment(const MachProgram& pt, std::int64_t fuel) {
  RunResult full = run_mach(pt, fuel);
  RunResult inter = run_mach_interaction(pt, fuel);
  if (full.outcome != inter.outcome)
    return Verdict::fail("instrumentation changed the outcome: " + to_string(full.outcome) +
                         " vs " + to_string(inter.outcome));
  if (remove_df(full.trace) != inter.trace)
    return Verdict::fail("remove_df(T) differs from the interaction instrumentation (" +
                         show(remove_df(full.trace).size()) + " vs " + show(inter.trace.size()) +
                         " events)");
  return Verdict::pass();
}

Verdict check_backtranslation(const MachProgram& pt, std::int64_t fuel,
                              std::size_t* shared_out) {
  RunResult r = run_mach(pt, fuel);
  const Trace& df = r.trace;
  Trace inter = remove_df(df);
  if (shared_out) *shared_out = shared_blocks(inter).size();

  std::string why;
  auto src = backtranslate(df, pt, &why);
  if (!src) return Verdict::fail("back-translation rejected the trace: " + why);
  if (!well_formed(*src)) return Verdict::fail("back-translated program is ill-formed");

  // Replay under the mimicking monitor: every boundary of the data-flow
  // trace must be reached, in order, before the replay ends. The strict
  // per-component event counters make each boundary check pass only inside
  // its own window, so advancing greedily is sound.
  SourceMachine m(*src);
  Trace replay;
  std::size_t next = 0;
  std::string bw;
  auto advance = [&] {
    while (next <= df.size() && check_mimicking_state(df, next, m.memory(), pt, &bw)) ++next;
  };
  advance();
  // Every fragment re-enters through the dispatcher, so the replay costs
  // O(events^2) steps plus the per-component initialisation.
  std::int64_t sfuel = 512 + 64 * static_cast<std::int64_t>(df.size() + 2) *
                                 static_cast<std::int64_t>(df.size() + 2);
  for (std::int64_t i = 0; i < sfuel && m.status() == SourceMachine::Status::Running; ++i) {
    std::optional<Event> ev;
    m.step(&ev);
    if (ev) replay.push_back(*ev);
    advance();
  }
  if (m.status() == SourceMachine::Status::Running)
    return Verdict::fail("replay ran out of fuel at boundary " + show(next));
  if (m.status() == SourceMachine::Status::Stuck)
    return Verdict::fail("replay got stuck at boundary " + show(next));
  if (next != df.size() + 1)
    return Verdict::fail("mimicking failed at boundary " + show(next) + ": " + bw);
  if (!trace_related(Renaming::shift(1), inter, replay, &why))
    return Verdict::fail("replayed trace not Shift(1)-related: " + why);
  return Verdict::pass();
}

Verdict check_compiler_correctness(const SourceProgram& ps, std::int64_t fuel) {
  RunResult rs = run_source(ps, fuel);
  MachProgram pt = compile(ps);
  if (!well_formed(pt)) return Verdict::fail("compiled program is ill-formed");
  RunResult rt = run_mach_interaction(pt, fuel * 50);

  bool oof = rs.outcome == Outcome::OutOfFuel || rt.outcome == Outcome::OutOfFuel;
  if (!oof) {
    if (rs.outcome != rt.outcome)
      return Verdict::fail("outcomes differ: " + to_string(rs.outcome) + " vs " +
                           to_string(rt.outcome));
    if (rs.outcome == Outcome::Done && !(rs.result == rt.result))
      return Verdict::fail("results differ");
    if (rs.trace.size() != rt.trace.size()) return Verdict::fail("trace lengths differ");
  }
  std::size_t n = std::min(rs.trace.size(), rt.trace.size());
  std::string why;
  if (!trace_related(Renaming::identity(), prefix(rs.trace, n), prefix(rt.trace, n), &why))
    return Verdict::fail("source->target traces unrelated: " + why);
  if (!trace_related(Renaming::identity(), prefix(rt.trace, n), prefix(rs.trace, n), &why))
    return Verdict::fail("target->source traces unrelated: " + why);
  return Verdict::pass();
}

namespace {

// Per-component block-id delta of a renaming (Identity / Shift / CompShift).
int delta_of(const Renaming& ren, int comp) {
  switch (ren.kind()) {
    case Renaming::Kind::Identity: return 0;
    case Renaming::Kind::Shift: return ren.shift_amount();
    case Renaming::Kind::CompShift: {
      auto it = ren.comp_deltas().find(comp);
      return it == ren.comp_deltas().end() ? 0 : it->second;
    }
    case Renaming::Kind::Table: return 0;  // unsupported here; callers avoid it
  }
  return 0;
}

struct TernaryReport {
  Verdict verdict;
  bool naive_failed = false;
  bool pc_aware_failed = false;
  bool tt_failed = false;
  bool border_failed = false;
  Trace t12;
  std::size_t events = 0;
};

// Lock-step ternary monitor. The recomposed machine always advances with
// the base run owning the side it executes in; the other base run is
// frozen mid-segment and caught up ("drained") whenever an interaction
// event closes the segment. Relations are evaluated after every step of
// every machine, attributing control to the side whose segment is open.
TernaryReport ternary_monitor(const MachProgram& w12, const MachProgram& w1,
                              const MachProgram& w2, const std::set<int>& part,
                              const Renaming& ren_1, const Renaming& ren_2,
                              const std::vector<std::set<Loc>>& pre1,
                              const std::vector<std::set<Loc>>& pre2, std::int64_t fuel) {
  TernaryReport rep;
  MachMachine m12(w12), m1(w1), m2(w2);
  std::set<int> other;
  for (const auto& [c, ci] : w12.intf.comps)
    if (!part.count(c)) other.insert(c);

  Trace& t12 = rep.t12;
  std::set<Loc> sh12;
  std::size_t k = 0;  // aligned interaction events so far
  static const std::set<Loc> kEmpty;

  auto view = [&]() {
    RecompView v;
    const std::set<Loc>& s1 = k == 0 ? kEmpty : pre1[k - 1];
    const std::set<Loc>& s2 = k == 0 ? kEmpty : pre2[k - 1];
    v.rec_vs_1 = {&m12.memory(), &sh12};
    v.base_1 = {&m1.memory(), &s1};
    v.rec_vs_2 = {&m12.memory(), &sh12};
    v.base_2 = {&m2.memory(), &s2};
    v.ren_1 = ren_1;
    v.ren_2 = ren_2;
    v.part = part;
    v.other = other;
    return v;
  };
  auto relate = [&](bool control_in_part) -> bool {
    RecompView v = view();
    if (!mem_rel_naive(v)) rep.naive_failed = true;
    if (!mem_rel_pc_aware(v, control_in_part)) rep.pc_aware_failed = true;
    if (!mem_rel_tt(v, control_in_part)) {
      rep.tt_failed = true;
      rep.verdict = Verdict::fail("turn-taking relation violated after event " + show(k));
      return false;
    }
    if (!rel_symmetry_check(v, control_in_part)) {
      rep.verdict = Verdict::fail("relation symmetry violated after event " + show(k));
      return false;
    }
    return true;
  };

  std::int64_t budget = fuel;
  while (m12.status() == MachMachine::Status::Running && budget-- > 0) {
    bool in_part = part.count(m12.current()) != 0;
    MachMachine& twin = in_part ? m1 : m2;
    MachMachine& lagger = in_part ? m2 : m1;
    const Renaming& twin_ren = in_part ? ren_1 : ren_2;
    const Renaming& lagger_ren = in_part ? ren_2 : ren_1;

    std::optional<Event> ev12, evt;
    m12.step(&ev12, true);
    twin.step(&evt, true);
    if (m12.status() != twin.status() || ev12.has_value() != evt.has_value()) {
      rep.verdict = Verdict::fail("lock-step broken after event " + show(k));
      return rep;
    }
    if (!ev12) {
      if (m12.status() == MachMachine::Status::Running && !relate(in_part)) return rep;
      continue;
    }

    // Interaction event: record it, then catch the frozen run up through
    // its own version of the segment that just closed.
    if (!match_events(*ev12, *evt) || !valren(twin_ren, ev12->arg, evt->arg)) {
      rep.verdict = Verdict::fail("lock-step event mismatch at event " + show(k));
      return rep;
    }
    t12.push_back(*ev12);
    ++k;
    sh12 = shared_blocks(t12);
    rep.events = k;
    if (k > pre1.size() || k > pre2.size()) return rep;  // base runs out of fuel

    std::optional<Event> evl;
    while (budget-- > 0 && lagger.status() == MachMachine::Status::Running) {
      lagger.step(&evl, true);
      if (evl) break;
      if (!relate(in_part)) return rep;  // drain steps: segment still open
    }
    if (!evl) {
      if (budget <= 0) return rep;  // monitor out of fuel mid-drain
      rep.verdict = Verdict::fail("frozen run failed to reach event " + show(k));
      return rep;
    }
    if (!match_events(*ev12, *evl) || !valren(lagger_ren, ev12->arg, evl->arg)) {
      rep.verdict = Verdict::fail("drained event mismatch at event " + show(k));
      return rep;
    }

    // All three runs just crossed the border.
    if (!mem_rel_border(view())) {
      rep.border_failed = true;
      rep.verdict = Verdict::fail("border relation violated after event " + show(k));
      return rep;
    }
    bool now_in_part = part.count(m12.current()) != 0;
    if (!relate(now_in_part)) return rep;
  }
  return rep;
}

struct RecompSetup {
  MachProgram w12;
  std::set<int> other;
  Renaming ren_1, ren_2;      // recomposed ids -> base-run ids
  Renaming ren_t1_to_t12;     // run-1 trace ids -> recomposed trace ids
  Renaming ren_t12_to_t2;     // recomposed trace ids -> run-2 trace ids
};

std::optional<RecompSetup> recomp_setup(const MachProgram& run1, const MachProgram& run2,
                                        const std::set<int>& part, const Renaming& ren12) {
  RecompSetup s;
  for (const auto& [c, ci] : run1.intf.comps)
    if (!part.count(c)) s.other.insert(c);
  auto w12 = link_mach(proj_mach(run1, part), proj_mach(run2, s.other));
  if (!w12) return std::nullopt;
  s.w12 = *w12;

  std::map<int, int> d1, d2, dt1, dt2;
  for (int c : s.other) {
    d1[c] = -delta_of(ren12, c);  // context half runs with run-2 ids
    dt1[c] = delta_of(ren12, c);
  }
  for (int c : part) {
    d2[c] = delta_of(ren12, c);  // program half runs with run-1 ids
    dt2[c] = delta_of(ren12, c);
  }
  s.ren_1 = Renaming::comp_shift(d1);
  s.ren_2 = Renaming::comp_shift(d2);
  s.ren_t1_to_t12 = Renaming::comp_shift(dt1);
  s.ren_t12_to_t2 = Renaming::comp_shift(dt2);
  return s;
}

TernaryReport run_recomposition(const MachProgram& run1, const MachProgram& run2,
                                const std::set<int>& part, const Renaming& ren12,
                                std::int64_t fuel) {
  TernaryReport rep;
  RunResult r1 = run_mach_interaction(run1, fuel);
  RunResult r2 = run_mach_interaction(run2, fuel);
  std::string why;
  std::size_t n = std::min(r1.trace.size(), r2.trace.size());
  if (!trace_related(ren12, prefix(r1.trace, n), prefix(r2.trace, n), &why)) {
    rep.verdict = Verdict::skip("base traces unrelated: " + why);
    return rep;
  }
  auto setup = recomp_setup(run1, run2, part, ren12);
  if (!setup) {
    rep.verdict = Verdict::skip("parts do not link");
    return rep;
  }

  auto pre1 = shared_blocks_prefixes(r1.trace);
  auto pre2 = shared_blocks_prefixes(r2.trace);
  rep = ternary_monitor(setup->w12, run1, run2, part, setup->ren_1, setup->ren_2, pre1, pre2,
                        fuel);
  if (!rep.verdict.ok()) return rep;

  // The recomposed trace must relate to both base traces.
  std::size_t m = std::min(rep.t12.size(), n);
  if (!trace_related(setup->ren_t1_to_t12, prefix(r1.trace, m), prefix(rep.t12, m), &why)) {
    rep.verdict = Verdict::fail("recomposed trace unrelated to run 1: " + why);
    return rep;
  }
  if (!trace_related(setup->ren_t12_to_t2, prefix(rep.t12, m), prefix(r2.trace, m), &why)) {
    rep.verdict = Verdict::fail("recomposed trace unrelated to run 2: " + why);
    return rep;
  }
  return rep;
}

}  // namespace

Verdict check_recomposition(const MachProgram& run1, const MachProgram& run2,
                            const std::set<int>& part, const Renaming& ren12,
                            std::int64_t fuel) {
  return run_recomposition(run1, run2, part, ren12, fuel).verdict;
}

RelationAutopsy autopsy_relations(const MachProgram& run1, const MachProgram& run2,
                                  const std::set<int>& part, const Renaming& ren12,
                                  std::int64_t fuel) {
  TernaryReport rep = run_recomposition(run1, run2, part, ren12, fuel);
  RelationAutopsy out;
  out.naive_failed = rep.naive_failed;
  out.pc_aware_failed = rep.pc_aware_failed;
  out.tt_failed = rep.tt_failed;
  out.border_at_events_failed = rep.border_failed;
  out.verdict = rep.verdict;
  return out;
}

PipelineResult rsp_pipeline(const SourceProgram& ps, const MachProgram& ct, std::int64_t fuel) {
  PipelineResult res;
  auto fail = [&](std::string stage, std::string why) {
    res.stage = std::move(stage);
    res.verdict = Verdict::fail(res.stage + ": " + why);
    return res;
  };
  for (const auto& [c, ci] : ct.intf.comps) res.context_comps.insert(c);
  std::set<int> part;
  for (const auto& [c, ci] : ps.intf.comps) part.insert(c);

  // Ia: compile the program part, link with the target context, run with
  // data-flow instrumentation.
  MachProgram pt = compile(ps);
  auto w1 = link_mach(pt, ct);
  if (!w1) return fail("Ia", "program and context do not link");
  if (!well_formed(*w1)) return fail("Ia", "linked program ill-formed");
  RunResult r1 = run_mach(*w1, fuel * 50);
  res.t1 = remove_df(r1.trace);
  {
    Verdict v = check_enrichment(*w1, fuel * 50);
    if (!v.ok()) return fail("Ia", v.detail);
  }

  // Ib: back-translate the whole data-flow trace and replay it.
  std::string why;
  auto sbt = backtranslate(r1.trace, *w1, &why);
  if (!sbt) return fail("Ib", "back-translation rejected: " + why);
  {
    Verdict v = check_backtranslation(*w1, fuel * 50);
    if (!v.ok()) return fail("Ib", v.detail);
  }
  std::int64_t sfuel = 512 + 64 * static_cast<std::int64_t>(r1.trace.size() + 2) *
                                 static_cast<std::int64_t>(r1.trace.size() + 2);
  RunResult rbt = run_source(*sbt, sfuel);
  res.t_backtr = rbt.trace;
  if (!trace_related(Renaming::shift(1), res.t1, res.t_backtr, &why))
    return fail("Ib", "t1 /~ t_backtr under Shift(1): " + why);

  // II: forward correctness of the compiled back-translation.
  MachProgram w2 = compile(*sbt);
  {
    Verdict v = check_compiler_correctness(*sbt, sfuel);
    if (!v.ok()) return fail("II", v.detail);
  }
  RunResult r2 = run_mach_interaction(w2, sfuel * 50);
  res.t2 = r2.trace;
  if (!trace_related(Renaming::identity(), res.t_backtr, res.t2, &why))
    return fail("II", "t_backtr /~ t2: " + why);

  // III: recompose the original program half with the compiled
  // back-translated context half under the ternary monitor.
  std::map<int, int> ctx_shift;
  for (int c : res.context_comps) ctx_shift[c] = 1;
  std::map<int, int> all_shift = ctx_shift;
  for (int c : part) all_shift[c] = 1;
  Renaming ren12 = Renaming::comp_shift(all_shift);  // run-1 ids -> run-2 ids
  std::int64_t mfuel = std::max(fuel * 50, sfuel * 50);
  TernaryReport rep = run_recomposition(*w1, w2, part, ren12, mfuel);
  if (rep.verdict.kind == Verdict::Kind::Skip) return fail("III", rep.verdict.detail);
  if (!rep.verdict.ok()) return fail("III", rep.verdict.detail);
  res.t12 = rep.t12;

  // IV: the back-translated context explains the attack at source level.
  auto cs = proj_source(*sbt, res.context_comps);
  auto wqed = link_source(ps, cs);
  if (!wqed) return fail("IV", "source parts do not link");
  if (!well_formed(*wqed)) return fail("IV", "linked source program ill-formed");
  RunResult rq = run_source(*wqed, std::max(fuel, sfuel));
  res.t_qed = rq.trace;
  std::size_t n = std::min(res.t12.size(), res.t_qed.size());
  if (!trace_related(Renaming::comp_shift(ctx_shift), prefix(res.t1, n), prefix(res.t_qed, n),
                     &why))
    return fail("IV", "t1 /~ t_QED: " + why);
  if (!trace_related(Renaming::identity(), prefix(res.t12, n), prefix(res.t_qed, n), &why))
    return fail("IV", "t12 /~ t_QED: " + why);

  res.verdict = Verdict::pass();
  return res;
}

}  // namespace seclab

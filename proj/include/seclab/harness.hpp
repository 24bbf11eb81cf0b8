#pragma once

// Property-test drivers: trace-enrichment cross-check, back-translation
// replay with the mimicking monitor, compiler differential, recomposition
// with the ternary turn-taking monitor, and the end-to-end robust-safety
// pipeline that chains them.

#include <string>

#include "seclab/backtranslation.hpp"
#include "seclab/compiler.hpp"
#include "seclab/gen.hpp"
#include "seclab/relations.hpp"
#include "seclab/source.hpp"
#include "seclab/target.hpp"

namespace seclab {

struct Verdict {
  enum class Kind { Pass, Fail, Skip };
  Kind kind = Kind::Pass;
  std::string detail;

  bool ok() const { return kind != Kind::Fail; }
  bool passed() const { return kind == Kind::Pass; }
  static Verdict pass() { return {}; }
  static Verdict fail(std::string d) { return {Kind::Fail, std::move(d)}; }
  static Verdict skip(std::string d) { return {Kind::Skip, std::move(d)}; }
};

// Runs the program twice — full data-flow instrumentation and the
// independent interaction-only instrumentation — and requires
// remove_df(T) to equal the interaction trace exactly.
Verdict check_enrichment(const MachProgram& pt, std::int64_t fuel);

// Runs the program, back-translates its data-flow trace, replays the
// source program and requires (a) the replayed interaction trace to relate
// to remove_df(T) under Shift(1) and (b) the mimicking-state check to hold
// at every event boundary. `shared_out` reports how many blocks the target
// run shared (generators use it to filter interesting cases).
Verdict check_backtranslation(const MachProgram& pt, std::int64_t fuel,
                              std::size_t* shared_out = nullptr);

// Differential: source run vs compiled run, Identity-related traces in both
// directions, same outcome and result. Target fuel is 50x the source fuel;
// if either side runs out, traces are truncated to the shorter one.
Verdict check_compiler_correctness(const SourceProgram& ps, std::int64_t fuel);

// Runs p1|c1 and p2|c2 (each pair pre-linked as whole programs with the
// program part `part`), requires the base traces to relate under `ren12`
// (Skip otherwise), then runs the recomposed program (program half of run 1
// with context half of run 2) under the ternary monitor: turn-taking
// relation after every step, border relation one step after every
// interaction event, symmetry at sampled steps, and the recomposed trace
// related to both base traces.
Verdict check_recomposition(const MachProgram& run1, const MachProgram& run2,
                            const std::set<int>& part, const Renaming& ren12,
                            std::int64_t fuel);

// Regression witness: same ternary monitor but records which of the
// candidate relations (naive, pc-aware, turn-taking) failed at some step.
struct RelationAutopsy {
  bool naive_failed = false;
  bool pc_aware_failed = false;
  bool tt_failed = false;
  bool border_at_events_failed = false;
  Verdict verdict;  // the monitor run itself (trace relatedness etc.)
};
RelationAutopsy autopsy_relations(const MachProgram& run1, const MachProgram& run2,
                                  const std::set<int>& part, const Renaming& ren12,
                                  std::int64_t fuel);

// End-to-end pipeline for one source program part and one target context:
//   Ia  run compile(ps) linked with ct, with data-flow instrumentation
//   Ib  back-translate the trace and replay it in the source
//   II  compile the back-translated program and run it (forward check)
//   III recompose: program half of run 1 + context half of run 2
//   IV  link the back-translated context with the original source program
// All five traces must be pairwise related under the composed renamings.
struct PipelineResult {
  Verdict verdict;
  std::string stage;  // first failing stage, empty on success
  Trace t1;           // interaction trace of compile(ps) | ct
  Trace t_backtr;     // back-translated source replay
  Trace t2;           // compiled back-translation
  Trace t12;          // recomposed run
  Trace t_qed;        // back-translated context | original source program
  std::set<int> context_comps;
};
PipelineResult rsp_pipeline(const SourceProgram& ps, const MachProgram& ct, std::int64_t fuel);

}  // namespace seclab

// End-to-end acceptance suite. Each criterion prints one [PASS]/[FAIL]
// line; the process exits nonzero if any criterion fails.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "seclab/compiler.hpp"
#include "seclab/examples.hpp"
#include "seclab/gen.hpp"
#include "seclab/harness.hpp"

using namespace seclab;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("[%s] %d: %s%s%s\n", pass ? "PASS" : "FAIL", num, name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <class F>
void par_for(int n, F f, int jobs = 4) {
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  for (auto& t : pool) t.join();
}

GenConfig cfg_for(std::uint64_t seed) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.fuel = 10000;
  return cfg;
}

// 1. Interaction traces are exactly the data-flow traces with the silent
//    events removed, on 500 generated machine programs.
void criterion_enrichment() {
  std::atomic<int> bad{0};
  std::mutex mu;
  std::string first;
  par_for(500, [&](int i) {
    Verdict v = check_enrichment(gen_mach_program(cfg_for(i)), 10000);
    if (!v.ok()) {
      ++bad;
      std::lock_guard<std::mutex> lk(mu);
      if (first.empty()) first = "seed " + std::to_string(i) + ": " + v.detail;
    }
  });
  report(1, "trace enrichment on 500 generated machine programs", bad == 0, first);
}

// 2. Back-translated replays relate under Shift(1) and pass the mimicking
//    check at every boundary, on 200 runs that actually share memory.
void criterion_backtranslation() {
  std::atomic<int> collected{0}, bad{0};
  std::mutex mu;
  std::string first;
  par_for(1500, [&](int i) {
    if (collected.load() >= 200) return;
    std::size_t shared = 0;
    Verdict v = check_backtranslation(gen_mach_program(cfg_for(i)), 10000, &shared);
    if (!v.ok()) {
      ++bad;
      std::lock_guard<std::mutex> lk(mu);
      if (first.empty()) first = "seed " + std::to_string(i) + ": " + v.detail;
      return;
    }
    if (v.passed() && shared >= 1) ++collected;
  });
  bool ok = bad == 0 && collected >= 200;
  if (ok) first = std::to_string(collected.load()) + " sharing runs";
  else if (first.empty()) first = "only " + std::to_string(collected.load()) + " sharing runs";
  report(2, "back-translation replay with mimicking monitor (200 sharing runs)", ok, first);
}

// 3. Compiler differential, both directions of the trace relation, on 500
//    generated source programs.
void criterion_compiler() {
  std::atomic<int> bad{0};
  std::mutex mu;
  std::string first;
  par_for(500, [&](int i) {
    Verdict v = check_compiler_correctness(gen_source_program(cfg_for(i)), 10000);
    if (!v.ok()) {
      ++bad;
      std::lock_guard<std::mutex> lk(mu);
      if (first.empty()) first = "seed " + std::to_string(i) + ": " + v.detail;
    }
  });
  report(3, "compiler differential on 500 generated source programs", bad == 0, first);
}

// 4. Recomposition under the ternary turn-taking monitor on 100
//    pipeline-generated quadruples (program/context pairs of both runs).
void criterion_recomposition() {
  std::atomic<int> passed{0}, bad{0};
  std::mutex mu;
  std::string first;
  par_for(400, [&](int i) {
    if (passed.load() >= 100) return;
    GenConfig cfg = cfg_for(i);
    SourceProgram ps = gen_source_program(cfg);
    MachProgram ct = gen_mach_context(cfg, compile(ps).intf);
    PipelineResult r = rsp_pipeline(ps, ct, cfg.fuel);
    if (!r.verdict.ok()) {
      ++bad;
      std::lock_guard<std::mutex> lk(mu);
      if (first.empty())
        first = "seed " + std::to_string(i) + " stage " + r.stage + ": " + r.verdict.detail;
      return;
    }
    if (r.verdict.passed()) ++passed;
  });
  bool ok = bad == 0 && passed >= 100;
  if (ok) first = std::to_string(passed.load()) + " full-pipeline quadruples";
  else if (first.empty()) first = "only " + std::to_string(passed.load()) + " quadruples";
  report(4, "recomposition with turn-taking/border/symmetry monitor", ok, first);
}

// 5. The shipped temporary-write example must make the naive whole-memory
//    relation fail at some step while the turn-taking relation holds
//    throughout.
void criterion_regression() {
  auto w1 = link_mach(tt_program(), tt_context_revert());
  auto w2 = link_mach(tt_program(), tt_context_quiet());
  if (!w1 || !w2) {
    report(5, "turn-taking regression witness", false, "examples do not link");
    return;
  }
  RelationAutopsy a = autopsy_relations(*w1, *w2, tt_part(), Renaming::identity(), 100000);
  RelationAutopsy b = autopsy_relations(*w2, *w1, tt_part(), Renaming::identity(), 100000);
  bool ok = a.verdict.passed() && b.verdict.passed() && a.naive_failed && b.naive_failed &&
            !a.tt_failed && !b.tt_failed && !a.border_at_events_failed &&
            !b.border_at_events_failed;
  report(5, "naive relation fails, turn-taking holds on the shipped example", ok,
         ok ? "both orientations" : a.verdict.detail + b.verdict.detail);
}

// 6. End-to-end pipeline on the Net example: benign and stashing contexts,
//    the nowrite property agreeing between target and source worlds, and
//    all five traces pairwise related under the composed renamings.
void criterion_end_to_end() {
  std::ostringstream why;
  bool ok = true;
  auto run = [&](const MachProgram& ctx, bool expect_safe, const char* label) {
    PipelineResult r = rsp_pipeline(net_program(), ctx, 100000);
    if (!r.verdict.passed()) {
      ok = false;
      why << label << " pipeline " << r.stage << ": " << r.verdict.detail << "; ";
      return;
    }
    NoWrite loc = net_nowrite();
    if (check_safety_nowrite(r.t1, loc) != expect_safe ||
        check_safety_nowrite(r.t_qed, loc) != expect_safe) {
      ok = false;
      why << label << ": nowrite disagrees with expectation; ";
    }
    // Pairwise relatedness via the generating set of renamings; the
    // remaining pairs follow by composition.
    std::map<int, int> ctx_up, part_up;
    for (int c : r.context_comps) ctx_up[c] = 1;
    for (const auto& [c, ci] : compile(net_program()).intf.comps)
      if (!r.context_comps.count(c)) part_up[c] = 1;
    struct Rel {
      const char* name;
      const Trace *a, *b;
      Renaming ren;
    };
    const Rel rels[] = {
        {"t1~t_backtr", &r.t1, &r.t_backtr, Renaming::shift(1)},
        {"t_backtr~t2", &r.t_backtr, &r.t2, Renaming::identity()},
        {"t1~t12", &r.t1, &r.t12, Renaming::comp_shift(ctx_up)},
        {"t12~t2", &r.t12, &r.t2, Renaming::comp_shift(part_up)},
        {"t12~t_QED", &r.t12, &r.t_qed, Renaming::identity()},
        {"t1~t_QED", &r.t1, &r.t_qed, Renaming::comp_shift(ctx_up)},
    };
    for (const Rel& rel : rels) {
      std::size_t n = std::min(rel.a->size(), rel.b->size());
      Trace ta(rel.a->begin(), rel.a->begin() + n), tb(rel.b->begin(), rel.b->begin() + n);
      std::string w;
      if (!trace_related(rel.ren, ta, tb, &w)) {
        ok = false;
        why << label << " " << rel.name << ": " << w << "; ";
      }
    }
  };
  run(net_context_benign(), true, "benign");
  run(net_context_stashing(), false, "stashing");
  report(6, "end-to-end robust safety on the Net example", ok, why.str());
}

// 7. Model sanity properties, >= 1000 random cases each.
void criterion_sanity() {
  std::ostringstream why;
  bool ok = true;

  // (a) Memory determinism and partitioning under random op sequences.
  {
    int bad = 0;
    std::mt19937_64 rng(7);
    for (int c = 0; c < 1000; ++c) {
      auto script = [&](std::uint64_t s) {
        Memory m;
        std::mt19937_64 r(s);
        m.install_block(0, 0, {Value::integer(1), Value::integer(2)});
        m.install_block(1, 0, {Value::integer(3)});
        std::vector<Pointer> ptrs;
        for (int i = 0; i < 40; ++i) {
          switch (r() % 3) {
            case 0:
              if (auto p = m.alloc(static_cast<int>(r() % 2), 1 + r() % 4)) ptrs.push_back(*p);
              break;
            case 1:
              if (!ptrs.empty()) {
                Pointer p = ptrs[r() % ptrs.size()];
                p.off = static_cast<std::int64_t>(r() % 4);
                m.store(p, Value::integer(static_cast<std::int64_t>(r() % 100)));
              }
              break;
            default:
              if (!ptrs.empty()) m.load(ptrs[r() % ptrs.size()]);
          }
        }
        return m;
      };
      std::uint64_t s = rng();
      Memory m1 = script(s), m2 = script(s);
      if (!(m1 == m2)) ++bad;  // determinism
      auto whole = Memory::disjoint_union(m1.proj({0}), m1.proj({1}));
      if (!whole || !(*whole == m1)) ++bad;  // components partition memory
      if (Memory::disjoint_union(m1.proj({0}), m1.proj({0, 1}))) ++bad;  // overlap rejected
    }
    if (bad) {
      ok = false;
      why << "memory partition/determinism: " << bad << " bad cases; ";
    }
  }

  // Shared pool of runs for the trace-level properties.
  int border_cases = 0, bracket_bad = 0, mono_bad = 0, invalidate_bad = 0;
  int traces = 0;
  for (int i = 0; traces < 1000 && i < 1200; ++i) {
    Trace df;
    Trace inter;
    if (i % 2 == 0) {
      RunResult r = run_mach(gen_mach_program(cfg_for(i)), 10000);
      df = r.trace;
      inter = remove_df(df);
    } else {
      inter = run_source(gen_source_program(cfg_for(i)), 10000).trace;
    }
    ++traces;

    // (b) Register invalidation: the first data-flow event after a border
    // sees Error in every register the entered component did not just write
    // (the communication register survives the border).
    for (std::size_t k = 0; k + 1 < df.size(); ++k) {
      if (!is_interaction(df[k].tag)) continue;
      const Event& e = df[k + 1];
      if (is_interaction(e.tag)) continue;
      ++border_cases;
      for (Reg rr : kAllRegs) {
        if (rr == Reg::Com) continue;
        if (e.tag != EventTag::BinOp && rr == e.rd) continue;  // post-write snapshot
        if (!(reg_at(e.reg, rr) == Value::error())) ++invalidate_bad;
      }
    }

    // (c) Well-bracketing of every produced interaction trace.
    if (!well_bracketed(inter)) ++bracket_bad;

    // (d) shared_blocks grows monotonically along prefixes.
    auto prefixes = shared_blocks_prefixes(inter);
    for (std::size_t k = 1; k < prefixes.size(); ++k)
      if (!std::includes(prefixes[k].begin(), prefixes[k].end(), prefixes[k - 1].begin(),
                         prefixes[k - 1].end()))
        ++mono_bad;
  }
  if (border_cases < 1000) {
    ok = false;
    why << "only " << border_cases << " border cases; ";
  }
  if (invalidate_bad) {
    ok = false;
    why << "register invalidation: " << invalidate_bad << " bad; ";
  }
  if (bracket_bad) {
    ok = false;
    why << "well-bracketing: " << bracket_bad << " bad traces; ";
  }
  if (mono_bad) {
    ok = false;
    why << "shared-set monotonicity: " << mono_bad << " bad prefixes; ";
  }
  std::string detail = why.str();
  if (ok)
    detail = std::to_string(traces) + " traces, " + std::to_string(border_cases) +
             " border cases";
  report(7, "model sanity properties (memory, borders, bracketing, sharing)", ok, detail);
}

}  // namespace

int main() {
  criterion_enrichment();
  criterion_backtranslation();
  criterion_compiler();
  criterion_recomposition();
  criterion_regression();
  criterion_end_to_end();
  criterion_sanity();
  return g_failures == 0 ? 0 : 1;
}

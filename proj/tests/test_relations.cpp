#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seclab/relations.hpp"

using namespace seclab;

namespace {

Value dptr(int c, int b, std::int64_t o) { return Value::pointer({Permission::Data, c, b, o}); }
Value cptr(int c, int b, std::int64_t o) { return Value::pointer({Permission::Code, c, b, o}); }

}  // namespace

TEST_CASE("value relation") {
  auto id = Renaming::identity();
  auto sh1 = Renaming::shift(1);
  CHECK(valren(id, Value::integer(5), Value::integer(5)));
  CHECK_FALSE(valren(id, Value::integer(5), Value::integer(6)));
  CHECK(valren(id, Value::error(), Value::error()));
  CHECK_FALSE(valren(id, Value::error(), Value::integer(0)));
  CHECK(valren(id, dptr(0, 2, 5), dptr(0, 2, 5)));
  // Shift(1): block b corresponds to block b+1, same component and offset.
  CHECK(valren(sh1, dptr(0, 2, 5), dptr(0, 3, 5)));
  CHECK_FALSE(valren(sh1, dptr(0, 2, 5), dptr(0, 2, 5)));
  CHECK_FALSE(valren(sh1, dptr(0, 2, 5), dptr(1, 3, 5)));
  CHECK_FALSE(valren(sh1, dptr(0, 2, 5), dptr(0, 3, 6)));
  // CODE pointers must be identical under any renaming.
  CHECK(valren(sh1, cptr(0, 2, 5), cptr(0, 2, 5)));
  CHECK_FALSE(valren(sh1, cptr(0, 2, 5), cptr(0, 3, 5)));
  // Block -1 is outside every renaming.
  CHECK_FALSE(valren(id, dptr(0, -1, 0), dptr(0, -1, 0)));
  // Table renamings may act per component.
  auto tab = Renaming::table({{{0, 1}, 4}, {{1, 1}, 1}});
  CHECK(valren(tab, dptr(0, 1, 0), dptr(0, 4, 0)));
  CHECK(valren(tab, dptr(1, 1, 0), dptr(1, 1, 0)));
  CHECK_FALSE(valren(tab, dptr(2, 1, 0), dptr(2, 1, 0)));
}

TEST_CASE("memory relation over locations") {
  Memory a, b;
  a.install_block(0, 0, {Value::integer(1), dptr(0, 1, 3)});
  b.install_block(0, 1, {Value::integer(1), dptr(0, 2, 3)});
  auto sh1 = Renaming::shift(1);
  CHECK(mem_related(sh1, a, b, {{0, 0}}));
  // Size mismatch fails.
  Memory c;
  c.install_block(0, 1, {Value::integer(1)});
  CHECK_FALSE(mem_related(sh1, a, c, {{0, 0}}));
  // Cell mismatch fails.
  Memory d;
  d.install_block(0, 1, {Value::integer(2), dptr(0, 2, 3)});
  CHECK_FALSE(mem_related(sh1, a, d, {{0, 0}}));
  // Missing target block fails.
  CHECK_FALSE(mem_related(Renaming::identity(), a, b, {{0, 0}}));
  // Empty location set holds trivially.
  CHECK(mem_related(sh1, a, b, {}));
}

namespace {

Trace call_ret_trace(int block_base) {
  Memory m;
  m.install_block(0, 0, {Value::integer(0)});
  m.install_block(1, 0, {Value::integer(0)});
  m.install_block(0, block_base, {Value::integer(7), Value::integer(8)});
  Trace t;
  t.push_back(make_call(m, 0, 1, "f", dptr(0, block_base, 0)));
  Memory m2 = m;
  m2.store({Permission::Data, 0, block_base, 1}, Value::integer(9));
  t.push_back(make_ret(m2, 1, 0, Value::integer(3)));
  return t;
}

}  // namespace

TEST_CASE("trace relation under identity and shift") {
  Trace t1 = call_ret_trace(1);
  Trace t2 = call_ret_trace(2);
  CHECK(trace_related(Renaming::identity(), t1, t1));
  CHECK(trace_related(Renaming::shift(1), t1, t2));
  CHECK_FALSE(trace_related(Renaming::identity(), t1, t2));
  // Shift symmetry: k one way is -k the other way.
  CHECK(trace_related(Renaming::shift(-1), t2, t1));
  // Unequal lengths are unrelated.
  Trace shorter(t1.begin(), t1.begin() + 1);
  CHECK_FALSE(trace_related(Renaming::identity(), t1, shorter));
  // Differing shared content is unrelated even when events match.
  Trace t3 = call_ret_trace(1);
  t3[1].mem.store({Permission::Data, 0, 1, 1}, Value::integer(1000));
  CHECK_FALSE(trace_related(Renaming::identity(), t1, t3));
  // Differing private content is fine.
  Trace t4 = call_ret_trace(1);
  t4[1].mem.store({Permission::Data, 1, 0, 0}, Value::integer(1000));
  CHECK(trace_related(Renaming::identity(), t1, t4));
}

TEST_CASE("find_shift locates the relating shift") {
  Trace t1 = call_ret_trace(1);
  Trace t2 = call_ret_trace(3);
  auto r = find_shift(t1, t2);
  REQUIRE(r.has_value());
  CHECK(r->kind() == Renaming::Kind::Shift);
  CHECK(r->shift_amount() == 2);
  auto r2 = find_shift(t1, t1);
  REQUIRE(r2.has_value());
  CHECK(r2->kind() == Renaming::Kind::Identity);
  Trace t3 = call_ret_trace(1);
  t3[0].proc = "g";
  CHECK_FALSE(find_shift(t1, t3).has_value());
}

namespace {

struct TernarySetup {
  Memory m12, m1, m2;
  std::set<Loc> sh12, sh1, sh2;
  RecompView view;

  TernarySetup() {
    // Components: 0 is the program part, 1 the context part.
    // Program side: private block (0,1), shared block (0,2).
    // Context side: private block (1,1).
    for (Memory* m : {&m12, &m1, &m2}) {
      m->install_block(0, 0, {Value::integer(0)});
      m->install_block(1, 0, {Value::integer(0)});
      m->install_block(0, 1, {Value::integer(10)});
      m->install_block(0, 2, {Value::integer(20)});
      m->install_block(1, 1, {Value::integer(30)});
    }
    sh12 = sh1 = sh2 = {{0, 2}};
    view.rec_vs_1 = {&m12, &sh12};
    view.base_1 = {&m1, &sh1};
    view.rec_vs_2 = {&m12, &sh12};
    view.base_2 = {&m2, &sh2};
    view.ren_1 = Renaming::identity();
    view.ren_2 = Renaming::identity();
    view.part = {0};
    view.other = {1};
  }
};

}  // namespace

TEST_CASE("turn-taking relation tolerates transient divergence in the executing side") {
  TernarySetup s;
  CHECK(mem_rel_naive(s.view));
  CHECK(mem_rel_tt(s.view, true));
  CHECK(mem_rel_tt(s.view, false));
  CHECK(mem_rel_border(s.view));

  // Context (run 1's context half) temporarily writes the shared block:
  // the recomposed run executes the *other* context, so m12 and m1 now
  // disagree on shared memory while control is in the context.
  s.m1.store({Permission::Data, 0, 2, 0}, Value::integer(42));
  CHECK_FALSE(mem_rel_naive(s.view));
  // Control in the context side: run 2 owns the shared clause, run 1 only
  // its private program part, which still agrees.
  CHECK(mem_rel_tt(s.view, false));
  // Control in the program side would require shared agreement with run 1.
  CHECK_FALSE(mem_rel_tt(s.view, true));
  CHECK_FALSE(mem_rel_border(s.view));
}

TEST_CASE("turn-taking relation rejects a violated private cell in the waiting side") {
  TernarySetup s;
  s.m1.store({Permission::Data, 0, 1, 0}, Value::integer(666));  // program-private cell
  // pc-aware relation is blind to the waiting side ...
  CHECK(mem_rel_pc_aware(s.view, false));
  // ... the turn-taking relation is not.
  CHECK_FALSE(mem_rel_tt(s.view, false));
}

TEST_CASE("executing clause checks sizes, sharing images and contents") {
  TernarySetup s;
  SideView rec{&s.m12, &s.sh12};
  SideView base{&s.m1, &s.sh1};
  CHECK(mem_rel_exec(Renaming::identity(), {0}, rec, base));
  s.m1.store({Permission::Data, 0, 2, 0}, Value::integer(999));
  CHECK_FALSE(mem_rel_exec(Renaming::identity(), {0}, rec, base));
  CHECK(mem_rel_not_exec(Renaming::identity(), {0}, rec, base));
}

TEST_CASE("symmetry of the turn-taking relation") {
  TernarySetup s;
  CHECK(rel_symmetry_check(s.view, true));
  CHECK(rel_symmetry_check(s.view, false));
  s.m1.store({Permission::Data, 0, 1, 0}, Value::integer(666));
  CHECK(rel_symmetry_check(s.view, false));
}

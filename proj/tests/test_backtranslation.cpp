#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seclab/backtranslation.hpp"
#include "seclab/compiler.hpp"
#include "seclab/examples.hpp"
#include "seclab/gen.hpp"
#include "seclab/harness.hpp"
#include "seclab/relations.hpp"

using namespace seclab;

namespace {

MachProgram halt_only() {
  MachProgram m;
  m.intf.comps[0].exports = {"main"};
  m.intf.main_comp = 0;
  m.procs[{0, "main"}] = {i_const(Value::integer(7), Reg::Com), i_halt()};
  m.buffers[0] = {Value::integer(0)};
  m.ids = ProcIds::sequential({{0, {"main"}}});
  return m;
}

MachProgram stashing_whole() {
  auto w = link_mach(compile(net_program()), net_context_stashing());
  REQUIRE(w.has_value());
  return *w;
}

}  // namespace

TEST_CASE("halt-only program back-translates and its replay terminates") {
  MachProgram m = halt_only();
  auto rt = run_mach(m, 1000);
  REQUIRE(rt.outcome == Outcome::Done);

  std::string why;
  auto src = backtranslate(rt.trace, m, &why);
  REQUIRE_MESSAGE(src.has_value(), why);
  REQUIRE_MESSAGE(well_formed(*src, &why), why);

  auto rs = run_source(*src, 100000);
  CHECK(rs.outcome == Outcome::Done);
  // No interaction events on either side.
  CHECK(remove_df(rt.trace).empty());
  CHECK(rs.trace.empty());
}

TEST_CASE("back-translation fails cleanly on a foreign code-pointer constant") {
  MachProgram m = halt_only();
  Event e;
  e.tag = EventTag::Const;
  e.cur = 0;
  e.arg = Value::pointer({Permission::Code, 3, 0, 0});
  e.rd = Reg::Com;
  std::string why;
  CHECK_FALSE(backtranslate({e}, m, &why).has_value());
  CHECK_FALSE(why.empty());
}

TEST_CASE("mimicked_value maps blocks, ints and code pointers") {
  // Integers and Error mimic themselves.
  CHECK(mimicked_value(Value::integer(4), Value::integer(4), 0));
  CHECK_FALSE(mimicked_value(Value::integer(4), Value::integer(5), 0));
  CHECK(mimicked_value(Value::error(), Value::error(), 0));
  // Data pointers: block b maps to the shadow block b + 1, same offset.
  CHECK(mimicked_value(Value::pointer({Permission::Data, 0, 0, 3}),
                       Value::pointer({Permission::Data, 0, 1, 3}), 1));
  CHECK_FALSE(mimicked_value(Value::pointer({Permission::Data, 0, 0, 3}),
                             Value::pointer({Permission::Data, 0, 1, 2}), 1));
  // Code pointers: offsets are a compilation detail and are ignored.
  CHECK(mimicked_value(Value::pointer({Permission::Code, 1, 0, 9}),
                       Value::pointer({Permission::Code, 1, 0, 0}), 0));
  CHECK_FALSE(mimicked_value(Value::pointer({Permission::Code, 1, 0, 0}),
                             Value::pointer({Permission::Code, 2, 0, 0}), 0));
}

TEST_CASE("stashing context: replay relates under Shift(1) and mimics at each boundary") {
  MachProgram w = stashing_whole();
  std::size_t shared = 0;
  Verdict v = check_backtranslation(w, 10000, &shared);
  CHECK_MESSAGE(v.passed(), v.detail);
  CHECK(shared >= 1);  // Main's buffer pointer crosses into Net
}

TEST_CASE("replay reproduces the stashed pointer in the shadow block") {
  MachProgram w = stashing_whole();
  auto rt = run_mach(w, 100000);
  REQUIRE(rt.outcome == Outcome::Done);

  std::string why;
  auto src = backtranslate(rt.trace, w, &why);
  REQUIRE_MESSAGE(src.has_value(), why);

  SourceMachine sm(*src);
  for (int i = 0; i < 2000000 && sm.status() == SourceMachine::Status::Running; ++i) sm.step();
  REQUIRE(sm.status() == SourceMachine::Status::Done);

  // Target: Net stashed Ptr(0,0,0) into its static cell 0. Source: the
  // shadow of Net's static block is block 1, and the stashed value must be
  // the shadow image of Main's buffer pointer.
  auto got = sm.memory().load({Permission::Data, 1, 1, 0});
  REQUIRE(got.has_value());
  CHECK(*got == Value::pointer({Permission::Data, 0, 1, 0}));
}

TEST_CASE("mimicking-state check holds at every boundary of the benign run") {
  auto w = link_mach(compile(net_program()), net_context_benign());
  REQUIRE(w.has_value());
  Verdict v = check_backtranslation(*w, 10000);
  CHECK_MESSAGE(v.passed(), v.detail);
}

TEST_CASE("generated target programs back-translate") {
  int shared_runs = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    std::size_t shared = 0;
    Verdict v = check_backtranslation(gen_mach_program(cfg), cfg.fuel, &shared);
    CHECK_MESSAGE(v.ok(), "seed ", seed, ": ", v.detail);
    if (v.passed() && shared > 0) ++shared_runs;
  }
  // The pointer-sharing bias must show up in practice.
  CHECK(shared_runs >= 5);
}

TEST_CASE("back-translation is deterministic") {
  MachProgram w = stashing_whole();
  auto rt = run_mach(w, 100000);
  auto a = backtranslate(rt.trace, w);
  auto b = backtranslate(rt.trace, w);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  // Expression trees have no structural equality; compare compiled images.
  CHECK(compile(*a).procs == compile(*b).procs);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seclab/source.hpp"

using namespace seclab;

namespace {

// Single-component program with the given main body.
SourceProgram one_comp(ExprPtr body) {
  SourceProgram p;
  p.intf.comps[0] = {};
  p.intf.comps[0].exports = {"main"};
  p.intf.main_comp = 0;
  p.procs[{0, "main"}] = std::move(body);
  p.buffers[0] = {Value::integer(10), Value::integer(20)};
  p.ids = ProcIds::sequential({{0, {"main"}}});
  return p;
}

}  // namespace

TEST_CASE("binop evaluation") {
  CHECK(eval_binop(BinOpKind::Add, Value::integer(2), Value::integer(3)) == Value::integer(5));
  CHECK(eval_binop(BinOpKind::Sub, Value::integer(2), Value::integer(3)) == Value::integer(-1));
  CHECK(eval_binop(BinOpKind::Mul, Value::integer(2), Value::integer(3)) == Value::integer(6));
  CHECK(eval_binop(BinOpKind::Eq, Value::integer(2), Value::integer(2)) == Value::integer(1));
  CHECK(eval_binop(BinOpKind::Leq, Value::integer(2), Value::integer(3)) == Value::integer(1));
  Value p = Value::pointer({Permission::Data, 1, 2, 3});
  Value q = Value::pointer({Permission::Data, 1, 2, 7});
  CHECK(eval_binop(BinOpKind::Add, p, Value::integer(4)) == q);
  CHECK(eval_binop(BinOpKind::Sub, q, Value::integer(4)) == p);
  CHECK(eval_binop(BinOpKind::Eq, p, p) == Value::integer(1));
  CHECK(eval_binop(BinOpKind::Eq, p, q) == Value::integer(0));
  CHECK(eval_binop(BinOpKind::Sub, q, p) == Value::integer(4));
  // Cross-block difference, Error operands, pointer multiplication: stuck.
  Value r = Value::pointer({Permission::Data, 1, 3, 0});
  CHECK_FALSE(eval_binop(BinOpKind::Sub, q, r).has_value());
  CHECK_FALSE(eval_binop(BinOpKind::Add, Value::error(), Value::integer(1)).has_value());
  CHECK_FALSE(eval_binop(BinOpKind::Mul, p, Value::integer(2)).has_value());
  CHECK_FALSE(eval_binop(BinOpKind::Leq, p, q).has_value());
}

TEST_CASE("arithmetic program evaluates to its result") {
  auto body = e_binop(BinOpKind::Add, e_int(40), e_binop(BinOpKind::Mul, e_int(1), e_int(2)));
  auto r = run_source(one_comp(body), 1000);
  CHECK(r.outcome == Outcome::Done);
  CHECK(r.result == Value::integer(42));
  CHECK(r.trace.empty());
}

TEST_CASE("local, deref, assign work over the static buffer") {
  // local[1] := local[0] + 5; result local[1]
  auto body = e_seq(
      e_assign(e_binop(BinOpKind::Add, e_local(), e_int(1)),
               e_binop(BinOpKind::Add, e_deref(e_local()), e_int(5))),
      e_deref(e_binop(BinOpKind::Add, e_local(), e_int(1))));
  auto r = run_source(one_comp(body), 1000);
  CHECK(r.outcome == Outcome::Done);
  CHECK(r.result == Value::integer(15));
}

TEST_CASE("assignment evaluates the value before the target") {
  // (local := (local := 1; 2)) — inner assignment runs first.
  auto body = e_seq(e_assign(e_local(), e_seq(e_assign(e_local(), e_int(1)), e_int(2))),
                    e_deref(e_local()));
  auto r = run_source(one_comp(body), 1000);
  CHECK(r.outcome == Outcome::Done);
  CHECK(r.result == Value::integer(2));
}

TEST_CASE("alloc gives sequential blocks and if branches on integers") {
  auto body = e_seq(
      e_assign(e_alloc(e_int(2)), e_int(11)),
      e_if(e_binop(BinOpKind::Eq, e_deref(e_alloc(e_int(1))), e_int(0)), e_int(1), e_int(2)));
  // deref of a fresh (Error) cell makes Eq stuck
  auto r = run_source(one_comp(body), 1000);
  CHECK(r.outcome == Outcome::Stuck);

  auto body2 = e_if(e_int(3), e_alloc(e_int(1)), e_int(0));
  auto r2 = run_source(one_comp(body2), 1000);
  CHECK(r2.outcome == Outcome::Done);
  CHECK(r2.result == Value::pointer({Permission::Data, 0, 1, 0}));
}

TEST_CASE("if on a pointer condition is stuck; alloc of nonpositive size is stuck") {
  CHECK(run_source(one_comp(e_if(e_local(), e_int(1), e_int(2))), 100).outcome ==
        Outcome::Stuck);
  CHECK(run_source(one_comp(e_alloc(e_int(0))), 100).outcome == Outcome::Stuck);
  CHECK(run_source(one_comp(e_deref(e_int(3))), 100).outcome == Outcome::Stuck);
}

TEST_CASE("exit terminates with result 0") {
  auto r = run_source(one_comp(e_seq(e_int(9), e_exit())), 100);
  CHECK(r.outcome == Outcome::Done);
  CHECK(r.result == Value::integer(0));
}

TEST_CASE("cross-component call and return emit interaction events") {
  SourceProgram p;
  p.intf.comps[0].exports = {"main"};
  p.intf.comps[0].imports = {{1, "f"}};
  p.intf.comps[1].exports = {"f"};
  p.intf.main_comp = 0;
  p.procs[{0, "main"}] = e_call(1, "f", e_int(7));
  p.procs[{1, "f"}] = e_binop(BinOpKind::Add, e_arg(), e_int(1));
  p.buffers[0] = {Value::integer(0)};
  p.buffers[1] = {Value::integer(0)};
  p.ids = ProcIds::sequential({{0, {"main"}}, {1, {"f"}}});
  REQUIRE(well_formed(p));
  auto r = run_source(p, 1000);
  CHECK(r.outcome == Outcome::Done);
  CHECK(r.result == Value::integer(8));
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[0].tag == EventTag::Call);
  CHECK(r.trace[0].caller == 0);
  CHECK(r.trace[0].callee == 1);
  CHECK(r.trace[0].proc == "f");
  CHECK(r.trace[0].arg == Value::integer(7));
  CHECK(r.trace[1].tag == EventTag::Ret);
  CHECK(r.trace[1].caller == 1);
  CHECK(r.trace[1].callee == 0);
  CHECK(r.trace[1].arg == Value::integer(8));
}

TEST_CASE("unimported cross calls are stuck and ill-formed") {
  SourceProgram p;
  p.intf.comps[0].exports = {"main"};
  p.intf.comps[1].exports = {"f"};
  p.intf.main_comp = 0;
  p.procs[{0, "main"}] = e_call(1, "f", e_int(7));
  p.procs[{1, "f"}] = e_arg();
  p.ids = ProcIds::sequential({{0, {"main"}}, {1, {"f"}}});
  CHECK_FALSE(well_formed(p));
  CHECK(run_source(p, 1000).outcome == Outcome::Stuck);
}

TEST_CASE("internal calls are silent; function pointers dispatch internally") {
  SourceProgram p;
  p.intf.comps[0].exports = {"main"};
  p.intf.main_comp = 0;
  p.procs[{0, "main"}] =
      e_binop(BinOpKind::Add, e_call(0, "double", e_int(4)),
              e_callptr(e_funptr("double"), e_int(10)));
  p.procs[{0, "double"}] = e_binop(BinOpKind::Mul, e_arg(), e_int(2));
  p.buffers[0] = {Value::integer(0)};
  p.ids = ProcIds::sequential({{0, {"double", "main"}}});
  REQUIRE(well_formed(p));
  auto r = run_source(p, 1000);
  CHECK(r.outcome == Outcome::Done);
  CHECK(r.result == Value::integer(28));
  CHECK(r.trace.empty());
}

TEST_CASE("callptr through a non-entry or foreign pointer is stuck") {
  auto stuck_with = [](Value fp) {
    auto r = run_source(one_comp(e_callptr(e_val(fp), e_int(0))), 1000);
    return r.outcome == Outcome::Stuck;
  };
  CHECK(stuck_with(Value::pointer({Permission::Code, 0, 0, 3})));   // offset != 0
  CHECK(stuck_with(Value::pointer({Permission::Code, 5, 0, 0})));   // other component
  CHECK(stuck_with(Value::integer(3)));
  CHECK(run_source(one_comp(e_callptr(e_funptr("main"), e_int(0))), 50).outcome ==
        Outcome::OutOfFuel);  // recursion through own funptr: diverges
}

TEST_CASE("well-formedness rejects pointer literals and pointered buffers") {
  auto p = one_comp(e_val(Value::pointer({Permission::Data, 0, 0, 0})));
  CHECK_FALSE(well_formed(p));
  auto p2 = one_comp(e_int(0));
  p2.buffers[0] = {Value::pointer({Permission::Data, 0, 0, 0})};
  CHECK_FALSE(well_formed(p2));
  auto p3 = one_comp(e_funptr("nope"));
  CHECK_FALSE(well_formed(p3));
}

TEST_CASE("the machine is deterministic") {
  auto body = e_seq(e_assign(e_local(), e_int(5)), e_deref(e_local()));
  auto a = run_source(one_comp(body), 1000);
  auto b = run_source(one_comp(body), 1000);
  CHECK(a.outcome == b.outcome);
  CHECK(a.result == b.result);
  CHECK(a.steps == b.steps);
  CHECK(a.trace == b.trace);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "seclab/traces.hpp"

using namespace seclab;

namespace {

Memory base_mem() {
  Memory m;
  m.install_block(0, 0, {Value::integer(1), Value::integer(2)});
  m.install_block(1, 0, {Value::integer(3)});
  return m;
}

Event df_event(EventTag tag, Memory mem, int cur) {
  Event e;
  e.tag = tag;
  e.mem = std::move(mem);
  e.cur = cur;
  e.arg = Value::integer(0);
  return e;
}

}  // namespace

TEST_CASE("remove_df keeps interaction events in order and drops snapshots") {
  Memory m = base_mem();
  Trace t;
  t.push_back(df_event(EventTag::Const, m, 0));
  Event call = make_call(m, 0, 1, "f", Value::integer(5));
  call.reg[0] = Value::integer(5);  // df runs carry register snapshots
  call.cur = 0;
  t.push_back(call);
  t.push_back(df_event(EventTag::Store, m, 1));
  t.push_back(make_ret(m, 1, 0, Value::integer(6)));
  Trace r = remove_df(t);
  REQUIRE(r.size() == 2);
  CHECK(r[0].tag == EventTag::Call);
  CHECK(r[0].arg == Value::integer(5));
  CHECK(r[0].cur == -1);
  CHECK(reg_at(r[0].reg, Reg::Com).is_err());
  CHECK(r[1].tag == EventTag::Ret);

  // Filter-map oracle: remove_df equals filtering interaction events and
  // clearing their df payloads.
  Trace oracle;
  for (const Event& e : t) {
    if (!is_interaction(e.tag)) continue;
    Event stripped;
    stripped.tag = e.tag;
    stripped.mem = e.mem;
    stripped.caller = e.caller;
    stripped.callee = e.callee;
    stripped.proc = e.proc;
    stripped.arg = e.arg;
    oracle.push_back(stripped);
  }
  CHECK(r == oracle);
  CHECK(remove_df(r) == r);  // idempotent
}

TEST_CASE("shared blocks: a passed pointer shares its block") {
  Memory m = base_mem();
  Trace t;
  t.push_back(make_call(m, 0, 1, "f", Value::pointer({Permission::Data, 0, 0, 1})));
  auto s = shared_blocks(t);
  CHECK(s == std::set<Loc>{{0, 0}});
}

TEST_CASE("shared blocks close transitively through stored pointers") {
  Memory m = base_mem();
  m.alloc(0, 1);  // block (0,1)
  m.alloc(0, 2);  // block (0,2)
  m.store({Permission::Data, 0, 1, 0}, Value::pointer({Permission::Data, 0, 2, 0}));
  m.store({Permission::Data, 0, 2, 0}, Value::pointer({Permission::Data, 1, 0, 0}));
  Trace t;
  t.push_back(make_call(m, 0, 1, "f", Value::pointer({Permission::Data, 0, 1, 0})));
  auto s = shared_blocks(t);
  CHECK(s == std::set<Loc>{{0, 1}, {0, 2}, {1, 0}});
}

TEST_CASE("sharing is history sensitive: once shared, always shared") {
  Memory m1 = base_mem();
  m1.alloc(0, 1);
  Trace t;
  t.push_back(make_call(m1, 0, 1, "f", Value::pointer({Permission::Data, 0, 1, 0})));
  // Later event whose memory no longer mentions the block anywhere.
  Memory m2 = base_mem();
  t.push_back(make_ret(m2, 1, 0, Value::integer(0)));
  auto prefixes = shared_blocks_prefixes(t);
  CHECK(prefixes[0] == std::set<Loc>{{0, 1}});
  CHECK(prefixes[1] == std::set<Loc>{{0, 1}});
}

TEST_CASE("integer payloads and negative blocks never share") {
  Memory m = base_mem();
  Trace t;
  t.push_back(make_call(m, 0, 1, "f", Value::integer(7)));
  t.push_back(make_ret(m, 1, 0, Value::pointer({Permission::Data, 0, -1, 0})));
  CHECK(shared_blocks(t).empty());
}

TEST_CASE("shared and private projections partition the memory") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 100; ++iter) {
    Memory m = base_mem();
    for (int i = 0; i < 4; ++i) {
      auto p = m.alloc(static_cast<int>(rng() % 2), 1 + static_cast<std::int64_t>(rng() % 3));
      if (rng() % 2)
        m.store(*p, Value::pointer({Permission::Data, static_cast<int>(rng() % 2), 0, 0}));
    }
    Trace t;
    t.push_back(make_call(m, 0, 1, "f",
                          rng() % 2 ? Value::pointer({Permission::Data, 0, 1, 0})
                                    : Value::integer(3)));
    auto s = shared_blocks(t);
    Memory sh = shared_proj(m, s);
    Memory pr = private_proj(m, s);
    // Every block lands on exactly one side.
    for (const auto& [c, cm] : m.components()) {
      for (const auto& [b, blk] : cm.blocks) {
        bool in_sh = sh.has_block(c, b);
        bool in_pr = pr.has_block(c, b);
        CHECK(in_sh != in_pr);
        CHECK(in_sh == (s.count({c, b}) != 0));
      }
    }
  }
}

TEST_CASE("match_events compares variant, components and procedure") {
  Memory m = base_mem();
  Event a = make_call(m, 0, 1, "f", Value::integer(1));
  Event b = make_call(base_mem(), 0, 1, "f", Value::integer(99));
  CHECK(match_events(a, b));  // payloads compared separately
  Event c = make_call(m, 0, 1, "g", Value::integer(1));
  CHECK_FALSE(match_events(a, c));
  Event d = make_ret(m, 0, 1, Value::integer(1));
  CHECK_FALSE(match_events(a, d));
  Event e = make_call(m, 2, 1, "f", Value::integer(1));
  CHECK_FALSE(match_events(a, e));
}

TEST_CASE("well-bracketing accepts prefixes and rejects crossed returns") {
  Memory m = base_mem();
  Trace good{make_call(m, 0, 1, "f", Value::integer(0)),
             make_call(m, 1, 0, "g", Value::integer(0)), make_ret(m, 0, 1, Value::integer(0)),
             make_ret(m, 1, 0, Value::integer(0))};
  CHECK(well_bracketed(good));
  Trace prefix{good[0], good[1]};
  CHECK(well_bracketed(prefix));
  Trace crossed{good[0], make_ret(m, 0, 1, Value::integer(0))};
  CHECK_FALSE(well_bracketed(crossed));
  Trace bare_ret{make_ret(m, 1, 0, Value::integer(0))};
  CHECK_FALSE(well_bracketed(bare_ret));
}

TEST_CASE("nowrite detects changes across call/return spans") {
  Memory m1 = base_mem();
  Memory m2 = base_mem();
  NoWrite loc{0, 0, 1};
  Trace ok{make_call(m1, 0, 1, "f", Value::integer(0)),
           make_ret(m2, 1, 0, Value::integer(0))};
  CHECK(check_safety_nowrite(ok, loc));
  Memory m3 = base_mem();
  m3.store({Permission::Data, 0, 0, 1}, Value::integer(777));
  Trace bad{make_call(m1, 0, 1, "f", Value::integer(0)),
            make_ret(m3, 1, 0, Value::integer(0))};
  CHECK_FALSE(check_safety_nowrite(bad, loc));
  // Temporary writes inside nested spans that are reverted pass the
  // outer span but fail the inner one they surround.
  Trace nested{make_call(m1, 0, 1, "f", Value::integer(0)),
               make_call(m3, 1, 0, "g", Value::integer(0)),
               make_ret(m3, 0, 1, Value::integer(0)),
               make_ret(m1, 1, 0, Value::integer(0))};
  CHECK(check_safety_nowrite(nested, loc));
  Trace inner_change{make_call(m1, 0, 1, "f", Value::integer(0)),
                     make_call(m1, 1, 0, "g", Value::integer(0)),
                     make_ret(m3, 0, 1, Value::integer(0)),
                     make_ret(m3, 1, 0, Value::integer(0))};
  CHECK_FALSE(check_safety_nowrite(inner_change, loc));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "seclab/memory.hpp"

using namespace seclab;

TEST_CASE("read after write at every offset of a large block") {
  Memory m;
  m.ensure_component(0);
  auto p = m.alloc(0, 1024);
  REQUIRE(p.has_value());
  for (std::int64_t off = 0; off < 1024; ++off) {
    Pointer q = *p;
    q.off = off;
    CHECK(m.store(q, Value::integer(4)));
    auto v = m.load(q);
    REQUIRE(v.has_value());
    CHECK(*v == Value::integer(4));
  }
}

TEST_CASE("fresh cells hold the poison value") {
  Memory m;
  auto p = m.alloc(3, 5);
  REQUIRE(p.has_value());
  for (std::int64_t off = 0; off < 5; ++off) {
    Pointer q = *p;
    q.off = off;
    CHECK(m.load(q)->is_err());
  }
}

TEST_CASE("loads and stores through CODE pointers fail") {
  Memory m;
  m.install_block(0, 0, {Value::integer(1)});
  Pointer code{Permission::Code, 0, 0, 0};
  CHECK_FALSE(m.load(code).has_value());
  CHECK_FALSE(m.store(code, Value::integer(0)));
}

TEST_CASE("unallocated blocks and out-of-bounds offsets fail") {
  Memory m;
  m.install_block(0, 0, {Value::integer(1), Value::integer(2)});
  CHECK_FALSE(m.load({Permission::Data, 0, 7, 0}).has_value());
  CHECK_FALSE(m.load({Permission::Data, 9, 0, 0}).has_value());
  CHECK_FALSE(m.load({Permission::Data, 0, 0, 2}).has_value());
  CHECK_FALSE(m.load({Permission::Data, 0, 0, -1}).has_value());
  CHECK_FALSE(m.store({Permission::Data, 0, 0, 2}, Value::integer(0)));
}

TEST_CASE("allocation hands out sequential ids starting at 1") {
  Memory m;
  auto a = m.alloc(0, 1);
  auto b = m.alloc(0, 1);
  auto c = m.alloc(1, 1);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  REQUIRE(c.has_value());
  CHECK(a->block == 1);
  CHECK(b->block == 2);
  CHECK(c->block == 1);  // counters are per component
  CHECK(a->off == 0);
  CHECK(a->perm == Permission::Data);
  CHECK_FALSE(m.alloc(0, 0).has_value());
  CHECK_FALSE(m.alloc(0, -3).has_value());
}

TEST_CASE("projection is identity on the full domain and empty on the empty set") {
  Memory m;
  m.install_block(0, 0, {Value::integer(7)});
  m.install_block(1, 0, {});
  m.alloc(0, 2);
  CHECK(m.proj({0, 1}) == m);
  CHECK(m.proj({}) == Memory{});
}

TEST_CASE("disjoint component projections recombine to the original") {
  // Property check over random small memories.
  std::mt19937_64 rng(12345);
  for (int iter = 0; iter < 200; ++iter) {
    Memory m;
    int ncomps = 2 + static_cast<int>(rng() % 4);
    for (int c = 0; c < ncomps; ++c) {
      m.install_block(c, 0, {Value::integer(static_cast<std::int64_t>(rng() % 100))});
      int nblocks = static_cast<int>(rng() % 3);
      for (int b = 0; b < nblocks; ++b) {
        auto p = m.alloc(c, 1 + static_cast<std::int64_t>(rng() % 4));
        REQUIRE(p.has_value());
        m.store(*p, Value::pointer({Permission::Data, c, 0, 0}));
      }
    }
    std::set<int> left, right;
    for (int c = 0; c < ncomps; ++c) (rng() % 2 ? left : right).insert(c);
    auto joined = Memory::disjoint_union(m.proj(left), m.proj(right));
    REQUIRE(joined.has_value());
    CHECK(*joined == m);
    CHECK_FALSE(Memory::disjoint_union(m.proj(left), m.proj(left)).has_value() ==
                !left.empty());
  }
}

TEST_CASE("copy-on-write snapshots are independent") {
  Memory m;
  m.install_block(0, 0, {Value::integer(1), Value::integer(2)});
  Memory snap = m;
  CHECK(m.store({Permission::Data, 0, 0, 0}, Value::integer(99)));
  CHECK(snap.load({Permission::Data, 0, 0, 0}) == Value::integer(1));
  CHECK(m.load({Permission::Data, 0, 0, 0}) == Value::integer(99));
}

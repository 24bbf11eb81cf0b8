#pragma once

// Block-structured memory shared by the source and target languages.
// Addresses are (permission, component, block, offset) tuples; there is no
// flat address space, so pointer forging is impossible by construction.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace seclab {

enum class Permission { Data, Code };

struct Pointer {
  Permission perm = Permission::Data;
  int comp = 0;
  int block = 0;
  std::int64_t off = 0;

  friend bool operator==(const Pointer&, const Pointer&) = default;
  friend auto operator<=>(const Pointer&, const Pointer&) = default;
};

// A machine word: integer, pointer, or the poison value Error.
// Error is storable and movable but any arithmetic/branch/deref on it is
// stuck, which is what makes register invalidation at component boundaries
// safe.
struct Value {
  enum class Kind { Int, Ptr, Err };
  Kind kind = Kind::Err;
  std::int64_t i = 0;
  Pointer p;

  static Value integer(std::int64_t v) {
    Value r;
    r.kind = Kind::Int;
    r.i = v;
    return r;
  }
  static Value pointer(Pointer ptr) {
    Value r;
    r.kind = Kind::Ptr;
    r.p = ptr;
    return r;
  }
  static Value error() { return Value{}; }

  bool is_int() const { return kind == Kind::Int; }
  bool is_ptr() const { return kind == Kind::Ptr; }
  bool is_err() const { return kind == Kind::Err; }
  bool is_data_ptr() const { return is_ptr() && p.perm == Permission::Data; }
  bool is_code_ptr() const { return is_ptr() && p.perm == Permission::Code; }

  friend bool operator==(const Value& a, const Value& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Int: return a.i == b.i;
      case Kind::Ptr: return a.p == b.p;
      case Kind::Err: return true;
    }
    return false;
  }
};

std::string to_string(const Value& v);
std::string to_string(const Pointer& p);

// One allocated block. Cells are stored in copy-on-write chunks so that the
// per-event memory snapshots taken by the target machine stay cheap even
// with a multi-thousand-word runtime stack block in play.
class Block {
 public:
  static constexpr std::size_t kChunk = 32;

  Block() = default;
  explicit Block(std::size_t size);
  explicit Block(const std::vector<Value>& cells);

  std::size_t size() const { return size_; }
  const Value& get(std::size_t off) const;
  void set(std::size_t off, const Value& v);
  std::vector<Value> cells() const;

  friend bool operator==(const Block& a, const Block& b);

 private:
  std::size_t size_ = 0;
  std::vector<std::shared_ptr<std::vector<Value>>> chunks_;
};

// Memory of one component: finite map from block id to block.
// Block 0 is the static buffer, negative ids are reserved for the compiler
// (block -1 holds the compiled runtime stack), dynamic ids start at 1 and
// are handed out sequentially.
struct ComponentMemory {
  std::map<int, Block> blocks;
  int next_dynamic = 1;

  friend bool operator==(const ComponentMemory&, const ComponentMemory&) = default;
};

using Loc = std::pair<int, int>;  // (component, block)

class Memory {
 public:
  // Installs a block with a fixed id (static buffer or reserved block).
  void install_block(int comp, int block, const std::vector<Value>& cells);
  void ensure_component(int comp);
  // Restores the allocation counter (deserialization only).
  void set_next_dynamic(int comp, int next) { comps_[comp].next_dynamic = next; }

  // Allocates `size` fresh Error-filled cells in `comp`; fails on size <= 0.
  std::optional<Pointer> alloc(int comp, std::int64_t size);

  // load/store fail (nullopt/false) on CODE permission, unallocated blocks
  // and out-of-bounds offsets.
  std::optional<Value> load(const Pointer& ptr) const;
  bool store(const Pointer& ptr, const Value& v);

  bool has_block(int comp, int block) const;
  const Block* find_block(int comp, int block) const;
  std::optional<std::int64_t> block_size(int comp, int block) const;

  // Restriction of the memory to a set of components (domain projection).
  Memory proj(const std::set<int>& comps) const;
  // Restriction to an explicit set of (component, block) locations.
  Memory proj_blocks(const std::set<Loc>& locs) const;
  // Disjoint union; fails if any component occurs on both sides.
  static std::optional<Memory> disjoint_union(const Memory& a, const Memory& b);

  const std::map<int, ComponentMemory>& components() const { return comps_; }

  friend bool operator==(const Memory&, const Memory&) = default;

 private:
  std::map<int, ComponentMemory> comps_;
};

}  // namespace seclab

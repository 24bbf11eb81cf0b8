#include "seclab/memory.hpp"

#include <stdexcept>

namespace seclab {

std::string to_string(const Pointer& p) {
  std::string perm = p.perm == Permission::Data ? "data" : "code";
  return "(" + perm + "," + std::to_string(p.comp) + "," + std::to_string(p.block) +
         "," + std::to_string(p.off) + ")";
}

std::string to_string(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return std::to_string(v.i);
    case Value::Kind::Ptr: return to_string(v.p);
    case Value::Kind::Err: return "error";
  }
  return "?";
}

Block::Block(std::size_t size) : size_(size) {
  std::size_t n = (size + kChunk - 1) / kChunk;
  chunks_.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t len = std::min(kChunk, size - c * kChunk);
    chunks_.push_back(std::make_shared<std::vector<Value>>(len, Value::error()));
  }
}

Block::Block(const std::vector<Value>& cells) : Block(cells.size()) {
  for (std::size_t i = 0; i < cells.size(); ++i) set(i, cells[i]);
}

const Value& Block::get(std::size_t off) const {
  return (*chunks_[off / kChunk])[off % kChunk];
}

void Block::set(std::size_t off, const Value& v) {
  auto& chunk = chunks_[off / kChunk];
  if (chunk.use_count() > 1) chunk = std::make_shared<std::vector<Value>>(*chunk);
  (*chunk)[off % kChunk] = v;
}

std::vector<Value> Block::cells() const {
  std::vector<Value> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(get(i));
  return out;
}

bool operator==(const Block& a, const Block& b) {
  if (a.size_ != b.size_) return false;
  for (std::size_t c = 0; c < a.chunks_.size(); ++c) {
    if (a.chunks_[c] == b.chunks_[c]) continue;
    if (*a.chunks_[c] != *b.chunks_[c]) return false;
  }
  return true;
}

void Memory::install_block(int comp, int block, const std::vector<Value>& cells) {
  comps_[comp].blocks[block] = Block(cells);
}

void Memory::ensure_component(int comp) { comps_[comp]; }

std::optional<Pointer> Memory::alloc(int comp, std::int64_t size) {
  if (size <= 0) return std::nullopt;
  auto& cm = comps_[comp];
  int id = cm.next_dynamic++;
  cm.blocks[id] = Block(static_cast<std::size_t>(size));
  return Pointer{Permission::Data, comp, id, 0};
}

const Block* Memory::find_block(int comp, int block) const {
  auto ci = comps_.find(comp);
  if (ci == comps_.end()) return nullptr;
  auto bi = ci->second.blocks.find(block);
  if (bi == ci->second.blocks.end()) return nullptr;
  return &bi->second;
}

bool Memory::has_block(int comp, int block) const { return find_block(comp, block) != nullptr; }

std::optional<std::int64_t> Memory::block_size(int comp, int block) const {
  const Block* b = find_block(comp, block);
  if (!b) return std::nullopt;
  return static_cast<std::int64_t>(b->size());
}

std::optional<Value> Memory::load(const Pointer& ptr) const {
  if (ptr.perm != Permission::Data) return std::nullopt;
  const Block* b = find_block(ptr.comp, ptr.block);
  if (!b) return std::nullopt;
  if (ptr.off < 0 || static_cast<std::size_t>(ptr.off) >= b->size()) return std::nullopt;
  return b->get(static_cast<std::size_t>(ptr.off));
}

bool Memory::store(const Pointer& ptr, const Value& v) {
  if (ptr.perm != Permission::Data) return false;
  auto ci = comps_.find(ptr.comp);
  if (ci == comps_.end()) return false;
  auto bi = ci->second.blocks.find(ptr.block);
  if (bi == ci->second.blocks.end()) return false;
  if (ptr.off < 0 || static_cast<std::size_t>(ptr.off) >= bi->second.size()) return false;
  bi->second.set(static_cast<std::size_t>(ptr.off), v);
  return true;
}

Memory Memory::proj(const std::set<int>& comps) const {
  Memory out;
  for (const auto& [c, cm] : comps_)
    if (comps.count(c)) out.comps_[c] = cm;
  return out;
}

Memory Memory::proj_blocks(const std::set<Loc>& locs) const {
  Memory out;
  for (const auto& [c, b] : locs) {
    const Block* blk = find_block(c, b);
    if (blk) out.comps_[c].blocks[b] = *blk;
  }
  // Projections keep allocation counters out: they compare contents only.
  for (auto& [c, cm] : out.comps_) cm.next_dynamic = 0;
  return out;
}

std::optional<Memory> Memory::disjoint_union(const Memory& a, const Memory& b) {
  Memory out = a;
  for (const auto& [c, cm] : b.comps_) {
    if (out.comps_.count(c)) return std::nullopt;
    out.comps_[c] = cm;
  }
  return out;
}

}  // namespace seclab

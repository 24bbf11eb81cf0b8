#include "seclab/relations.hpp"

#include <cstdlib>

namespace seclab {

Renaming Renaming::identity() { return Renaming{}; }

Renaming Renaming::shift(int k) {
  Renaming r;
  r.kind_ = Kind::Shift;
  r.shift_ = k;
  return r;
}

Renaming Renaming::table(std::map<Loc, int> m) {
  Renaming r;
  r.kind_ = Kind::Table;
  r.table_ = std::move(m);
  return r;
}

Renaming Renaming::comp_shift(std::map<int, int> deltas) {
  Renaming r;
  r.kind_ = Kind::CompShift;
  r.deltas_ = std::move(deltas);
  return r;
}

std::optional<int> Renaming::apply(int comp, int block) const {
  if (block < 0) return std::nullopt;
  switch (kind_) {
    case Kind::Identity: return block;
    case Kind::Shift: {
      int out = block + shift_;
      if (out < 0) return std::nullopt;
      return out;
    }
    case Kind::Table: {
      auto it = table_.find({comp, block});
      if (it == table_.end() || it->second < 0) return std::nullopt;
      return it->second;
    }
    case Kind::CompShift: {
      auto it = deltas_.find(comp);
      int out = block + (it == deltas_.end() ? 0 : it->second);
      if (out < 0) return std::nullopt;
      return out;
    }
  }
  return std::nullopt;
}

bool valren(const Renaming& ren, const Value& a, const Value& b) {
  if (a.is_err() && b.is_err()) return true;
  if (a.is_int() && b.is_int()) return a.i == b.i;
  if (a.is_ptr() && b.is_ptr()) {
    if (a.p.perm == Permission::Code) return a.p == b.p;
    if (b.p.perm != Permission::Data) return false;
    auto mapped = ren.apply(a.p.comp, a.p.block);
    return mapped && a.p.comp == b.p.comp && *mapped == b.p.block && a.p.off == b.p.off;
  }
  return false;
}

bool mem_related(const Renaming& ren, const Memory& a, const Memory& b,
                 const std::set<Loc>& locs) {
  for (const auto& [comp, block] : locs) {
    auto mapped = ren.apply(comp, block);
    if (!mapped) return false;
    const Block* ba = a.find_block(comp, block);
    const Block* bb = b.find_block(comp, *mapped);
    if (!ba || !bb || ba->size() != bb->size()) return false;
    for (std::size_t i = 0; i < ba->size(); ++i)
      if (!valren(ren, ba->get(i), bb->get(i))) return false;
  }
  return true;
}

namespace {

std::set<Loc> nonneg_blocks(const Memory& m) {
  std::set<Loc> out;
  for (const auto& [c, cm] : m.components())
    for (const auto& [b, blk] : cm.blocks)
      if (b >= 0) out.insert({c, b});
  return out;
}

}  // namespace

std::optional<std::set<Loc>> rename_locs(const Renaming& ren, const std::set<Loc>& locs) {
  std::set<Loc> out;
  for (const Loc& l : locs) {
    auto mapped = ren.apply(l);
    if (!mapped) return std::nullopt;
    out.insert(*mapped);
  }
  return out;
}

bool mem_related_full(const Renaming& ren, const Memory& a, const Memory& b) {
  std::set<Loc> locs = nonneg_blocks(a);
  auto image = rename_locs(ren, locs);
  if (!image || *image != nonneg_blocks(b)) return false;
  return mem_related(ren, a, b, locs);
}

bool trace_related(const Renaming& ren, const Trace& a, const Trace& b, std::string* why) {
  auto fail = [&](std::size_t i, const std::string& m) {
    if (why) *why = "event " + std::to_string(i) + ": " + m;
    return false;
  };
  if (a.size() != b.size()) {
    if (why)
      *why = "length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
    return false;
  }
  auto shared_a = shared_blocks_prefixes(a);
  auto shared_b = shared_blocks_prefixes(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!match_events(a[i], b[i])) return fail(i, to_string(a[i]) + " vs " + to_string(b[i]));
    if (!valren(ren, a[i].arg, b[i].arg))
      return fail(i, "unrelated payload " + to_string(a[i].arg) + " vs " + to_string(b[i].arg));
    auto image = rename_locs(ren, shared_a[i]);
    if (!image || *image != shared_b[i]) return fail(i, "shared block sets do not correspond");
    if (!mem_related(ren, a[i].mem, b[i].mem, shared_a[i]))
      return fail(i, "unrelated shared memory");
  }
  return true;
}

std::optional<Renaming> find_shift(const Trace& a, const Trace& b, int range) {
  for (int mag = 0; mag <= range; ++mag) {
    for (int k : {mag, -mag}) {
      Renaming ren = k == 0 ? Renaming::identity() : Renaming::shift(k);
      if (trace_related(ren, a, b)) return ren;
      if (mag == 0) break;
    }
  }
  return std::nullopt;
}

namespace {

std::set<Loc> part_blocks(const Memory& m, const std::set<int>& part) {
  std::set<Loc> out;
  for (const Loc& l : nonneg_blocks(m))
    if (part.count(l.first)) out.insert(l);
  return out;
}

bool locs_related(const Renaming& ren, const SideView& rec, const SideView& base,
                  const std::set<Loc>& rec_locs, const std::set<Loc>& base_locs) {
  auto image = rename_locs(ren, rec_locs);
  if (!image || *image != base_locs) return false;
  return mem_related(ren, *rec.mem, *base.mem, rec_locs);
}

// Full projection onto `part` relates (no sharing clause).
bool proj_related(const Renaming& ren, const std::set<int>& part, const SideView& rec,
                  const SideView& base) {
  return locs_related(ren, rec, base, part_blocks(*rec.mem, part),
                      part_blocks(*base.mem, part));
}

std::set<Loc> minus(const std::set<Loc>& a, const std::set<Loc>& b) {
  std::set<Loc> out;
  for (const Loc& l : a)
    if (!b.count(l)) out.insert(l);
  return out;
}

}  // namespace

bool mem_rel_exec(const Renaming& ren, const std::set<int>& part, const SideView& rec,
                  const SideView& base) {
  if (!proj_related(ren, part, rec, base)) return false;
  return locs_related(ren, rec, base, *rec.shared, *base.shared);
}

bool mem_rel_not_exec(const Renaming& ren, const std::set<int>& part, const SideView& rec,
                      const SideView& base) {
  std::set<Loc> rec_priv = minus(part_blocks(*rec.mem, part), *rec.shared);
  std::set<Loc> base_priv = minus(part_blocks(*base.mem, part), *base.shared);
  return locs_related(ren, rec, base, rec_priv, base_priv);
}

bool mem_rel_naive(const RecompView& v) {
  return proj_related(v.ren_1, v.part, v.rec_vs_1, v.base_1) &&
         proj_related(v.ren_2, v.other, v.rec_vs_2, v.base_2);
}

bool mem_rel_pc_aware(const RecompView& v, bool control_in_part) {
  return control_in_part ? mem_rel_exec(v.ren_1, v.part, v.rec_vs_1, v.base_1)
                         : mem_rel_exec(v.ren_2, v.other, v.rec_vs_2, v.base_2);
}

bool mem_rel_tt(const RecompView& v, bool control_in_part) {
  if (control_in_part)
    return mem_rel_exec(v.ren_1, v.part, v.rec_vs_1, v.base_1) &&
           mem_rel_not_exec(v.ren_2, v.other, v.rec_vs_2, v.base_2);
  return mem_rel_exec(v.ren_2, v.other, v.rec_vs_2, v.base_2) &&
         mem_rel_not_exec(v.ren_1, v.part, v.rec_vs_1, v.base_1);
}

bool mem_rel_border(const RecompView& v) {
  return mem_rel_exec(v.ren_1, v.part, v.rec_vs_1, v.base_1) &&
         mem_rel_exec(v.ren_2, v.other, v.rec_vs_2, v.base_2);
}

bool rel_symmetry_check(const RecompView& v, bool control_in_part) {
  RecompView swapped;
  swapped.rec_vs_1 = v.rec_vs_2;
  swapped.base_1 = v.base_2;
  swapped.rec_vs_2 = v.rec_vs_1;
  swapped.base_2 = v.base_1;
  swapped.ren_1 = v.ren_2;
  swapped.ren_2 = v.ren_1;
  swapped.part = v.other;
  swapped.other = v.part;
  return mem_rel_tt(v, control_in_part) == mem_rel_tt(swapped, !control_in_part);
}

}  // namespace seclab

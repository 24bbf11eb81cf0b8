#pragma once

// Renamings and the relations built on them: value relation, memory
// relation over a set of locations, the trace relation that compares runs
// up to block renaming on shared memory, and the family of cross-run memory
// relations used by the recomposition monitor (naive, pc-aware, turn-taking
// and border variants).

#include <map>
#include <optional>
#include <set>

#include "seclab/memory.hpp"
#include "seclab/traces.hpp"

namespace seclab {

// Partial bijection on block ids. Identity and Shift apply uniformly to
// every component; Table may rename per component (recomposed runs relate
// program-side blocks and context-side blocks differently). Negative block
// ids (the compiled runtime block -1) are never in the domain or range.
class Renaming {
 public:
  static Renaming identity();
  static Renaming shift(int k);
  static Renaming table(std::map<Loc, int> m);
  // Uniform shift per component (components absent from the map keep their
  // block ids). Recomposed runs shift one half of the program and not the
  // other.
  static Renaming comp_shift(std::map<int, int> deltas);

  std::optional<int> apply(int comp, int block) const;
  std::optional<Loc> apply(const Loc& loc) const {
    auto b = apply(loc.first, loc.second);
    if (!b) return std::nullopt;
    return Loc{loc.first, *b};
  }

  enum class Kind { Identity, Shift, Table, CompShift };
  Kind kind() const { return kind_; }
  int shift_amount() const { return shift_; }
  const std::map<Loc, int>& mapping() const { return table_; }
  const std::map<int, int>& comp_deltas() const { return deltas_; }

 private:
  Kind kind_ = Kind::Identity;
  int shift_ = 0;
  std::map<Loc, int> table_;
  std::map<int, int> deltas_;
};

// Integers equal, Error relates to Error, DATA pointers related up to the
// block renaming (same component and offset), CODE pointers identical.
bool valren(const Renaming& ren, const Value& a, const Value& b);

// The blocks named by `locs` (in a's id space) exist on both sides with
// equal sizes and pointwise related cells. Precondition: no block -1.
bool mem_related(const Renaming& ren, const Memory& a, const Memory& b,
                 const std::set<Loc>& locs);

// All nonnegative blocks of `a` relate and `b` has no other nonnegative
// blocks (the renaming is a bijection between the two sides).
bool mem_related_full(const Renaming& ren, const Memory& a, const Memory& b);

// Image of a sharing set; nullopt if the renaming is undefined somewhere.
std::optional<std::set<Loc>> rename_locs(const Renaming& ren, const std::set<Loc>& locs);

// Trace relation: traces of equal length whose events match structurally,
// with related payloads and related memories on the shared blocks of the
// respective prefixes.
bool trace_related(const Renaming& ren, const Trace& a, const Trace& b,
                   std::string* why = nullptr);

// Searches shifts k = 0, ±1, ..., ±range for one relating the traces.
std::optional<Renaming> find_shift(const Trace& a, const Trace& b, int range = 4);

// --- Cross-run memory relations for recomposition ---------------------
//
// A recomposed run (program part of run 1 linked with context part of
// run 2) is compared against both base runs. `part` names the components
// whose state is compared; sharing sets come from the traces produced so
// far; each comparison carries its own renaming mapping recomposed block
// ids to base-run block ids.

struct SideView {
  const Memory* mem = nullptr;
  const std::set<Loc>* shared = nullptr;
};

// Executing side: the full projection onto `part` relates and the shared
// projections relate.
bool mem_rel_exec(const Renaming& ren, const std::set<int>& part, const SideView& rec,
                  const SideView& base);

// Non-executing side: only the private (never-shared) part of the
// projection onto `part` is required to relate; shared memory is owned by
// the executing side's clause.
bool mem_rel_not_exec(const Renaming& ren, const std::set<int>& part, const SideView& rec,
                      const SideView& base);

struct RecompView {
  SideView rec_vs_1;   // recomposed memory with run-1 sharing view
  SideView base_1;     // run 1
  SideView rec_vs_2;   // recomposed memory with run-2 sharing view
  SideView base_2;     // run 2
  Renaming ren_1;      // recomposed ids -> run-1 ids
  Renaming ren_2;      // recomposed ids -> run-2 ids
  std::set<int> part;  // program-side components (taken from run 1)
  std::set<int> other; // context-side components (taken from run 2)
};

// Naive whole-memory relation: both projections fully relate regardless of
// where control is. Too strong: fails on temporary writes by the other side.
bool mem_rel_naive(const RecompView& v);
// Only the executing side's projection relates. Too weak: blind to the
// non-executing side's private memory.
bool mem_rel_pc_aware(const RecompView& v, bool control_in_part);
// Turn-taking relation: executing clause on the running side, private-only
// clause on the waiting side.
bool mem_rel_tt(const RecompView& v, bool control_in_part);
// At interaction events both sides satisfy the executing clause.
bool mem_rel_border(const RecompView& v);
// The turn-taking relation treats the two base runs symmetrically.
bool rel_symmetry_check(const RecompView& v, bool control_in_part);

}  // namespace seclab

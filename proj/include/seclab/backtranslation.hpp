#pragma once

// Trace-directed back-translation: turns a data-flow trace of a target run
// into a source program that replays the same interaction behaviour, with
// every block id shifted up by one.
//
// Each component keeps its bookkeeping in its static buffer (block 0): an
// event counter, a flag marking external entries, one cell per machine
// register, plus a lazily initialised shadow copy of the target component's
// static buffer (allocated as source block 1, which is what produces the
// shift-by-one renaming) and an inline shadow region mirroring the compiled
// runtime block -1. Every exported procedure shares one body: initialise on
// first entry, refresh the register cells when entered from outside, then
// dispatch on the event counter to a fragment replaying the next recorded
// event, and tail-call itself.

#include <optional>
#include <string>

#include "seclab/source.hpp"
#include "seclab/target.hpp"

namespace seclab {

struct MetaLayout {
  static constexpr std::int64_t kCounter = 0;    // events replayed so far
  static constexpr std::int64_t kExtCall = 1;    // control entered from outside
  static constexpr std::int64_t kRegBase = 2;    // register cells, 7 slots
  static constexpr std::int64_t kInitFlag = 9;   // first-entry initialisation done
  static constexpr std::int64_t kShadowPtr = 10; // pointer to the static-buffer shadow
  static constexpr std::int64_t kStackShadow = 11;  // inline shadow of block -1

  static std::int64_t slot(Reg r) { return kRegBase + static_cast<std::int64_t>(r); }
};

// Which component replays this event: dfCall the caller, dfRet the
// returner, data-flow events the executing component.
int attributed_comp(const Event& e);

// Fails (nullopt) on traces no machine run can produce, e.g. Const events
// materialising pointers the emitting component could not name.
std::optional<SourceProgram> backtranslate(const Trace& df_trace, const MachProgram& target,
                                           std::string* why = nullptr);

// Relation between a target value and its replayed source counterpart:
// Shift(1) on nonnegative blocks, the inline block-0 shadow for block -1,
// CODE pointers up to the offset (procedure identity).
bool mimicked_value(const Value& target_v, const Value& source_v, int comp);

// Does the source memory mimic the target state after `boundary` events of
// the data-flow trace? Checks the register cells of the component that owns
// the last event, the shadow blocks of every component already active, and
// all event counters.
bool check_mimicking_state(const Trace& df_trace, std::size_t boundary,
                           const Memory& src_mem, const MachProgram& target,
                           std::string* why = nullptr);

}  // namespace seclab

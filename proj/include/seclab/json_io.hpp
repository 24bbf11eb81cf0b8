#pragma once

// JSON (de)serialization for every on-disk artifact: values, memories,
// traces and both program formats. Reading is strict — any schema violation
// throws std::runtime_error with a message naming the offending field — and
// parse(print(x)) == x for every artifact.
//
// Schemas:
//   Value          {"int": i} | {"ptr": [perm, comp, block, off]} | "error"
//                  (perm is "data" or "code")
//   Memory         {comp: {"next": n, "blocks": {block: {"size": n,
//                  "cells": [Value...]}}}}  (comp/block keys stringified)
//   Trace          {"events": [{"kind": "call"|"ret"|..., "mem": Memory,
//                  "caller","callee","proc","arg", and for data-flow events
//                  "reg": [7 Values], "cur", "rd","rs1","rs2","op"}]}
//   SourceProgram  {"intf", "procs": {"comp.proc": Expr}, "buffers",
//                  "ids", "names"}; Expr as tagged objects {"tag": ...}
//   MachProgram    same layout with instruction lists and "stack" sizes

#include <string>

#include <json.hpp>

#include "seclab/source.hpp"
#include "seclab/target.hpp"
#include "seclab/traces.hpp"

namespace seclab {

using Json = nlohmann::ordered_json;

Json to_json(const Value& v);
Json to_json(const Memory& m);
// with_mem=false drops the per-event snapshots (human inspection only;
// relation checking needs them).
Json to_json(const Trace& t, bool with_mem = true);
Json to_json(const SourceProgram& p);
Json to_json(const MachProgram& p);

Value value_from_json(const Json& j);
Memory memory_from_json(const Json& j);
Trace trace_from_json(const Json& j);
SourceProgram source_from_json(const Json& j);
MachProgram mach_from_json(const Json& j);

// File helpers: load_json throws std::runtime_error on unreadable input.
Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

}  // namespace seclab

#include "seclab/examples.hpp"

namespace seclab {

namespace {

constexpr int kMain = 0;
constexpr int kNet = 1;

Interface net_main_intf() {
  Interface intf;
  intf.main_comp = kMain;
  intf.comps[kMain].exports = {"main"};
  intf.comps[kMain].imports = {{kNet, "send"}};
  return intf;
}

Interface net_ctx_intf() {
  Interface intf;
  intf.comps[kNet].exports = {"send"};
  return intf;
}

}  // namespace

SourceProgram net_program() {
  SourceProgram p;
  p.intf = net_main_intf();
  p.buffers[kMain] = std::vector<Value>(9, Value::integer(0));
  p.buffers[kMain][8] = Value::integer(100);  // the balance
  p.ids.ids[{kMain, "main"}] = 0;
  p.names["Main"] = kMain;
  p.procs[{kMain, "main"}] = e_seq({
      e_assign(e_local(), e_int(1)),  // stage a request in iobuffer[0]
      e_call(kNet, "send", e_local()),
      e_call(kNet, "send", e_local()),
      e_deref(e_binop(BinOpKind::Add, e_local(), e_int(8))),  // read the balance back
  });
  return p;
}

MachProgram net_context_benign() {
  MachProgram p;
  p.intf = net_ctx_intf();
  p.buffers[kNet] = std::vector<Value>(2, Value::integer(0));
  p.ids.ids[{kNet, "send"}] = 0;
  p.names["Net"] = kNet;
  // Read the request, write a reply into the next io cell, return a status.
  p.procs[{kNet, "send"}] = {
      i_load(Reg::Com, Reg::One),
      i_const(Value::integer(1), Reg::Aux1),
      i_binop(BinOpKind::Add, Reg::Com, Reg::Aux1, Reg::Aux2),
      i_store(Reg::Aux2, Reg::One),
      i_const(Value::integer(5), Reg::Com),
      i_return(),
  };
  return p;
}

MachProgram net_context_stashing() {
  MachProgram p;
  p.intf = net_ctx_intf();
  p.buffers[kNet] = std::vector<Value>(2, Value::integer(0));
  p.ids.ids[{kNet, "send"}] = 0;
  p.names["Net"] = kNet;
  // Stash the buffer pointer, then zero the balance cell through it.
  p.procs[{kNet, "send"}] = {
      i_const(Value::pointer({Permission::Data, kNet, 0, 0}), Reg::One),
      i_store(Reg::One, Reg::Com),
      i_const(Value::integer(8), Reg::Aux1),
      i_binop(BinOpKind::Add, Reg::Com, Reg::Aux1, Reg::Aux2),
      i_const(Value::integer(0), Reg::Sp),
      i_store(Reg::Aux2, Reg::Sp),
      i_const(Value::integer(1), Reg::Com),
      i_return(),
  };
  return p;
}

NoWrite net_nowrite() { return NoWrite{kMain, 0, 8, kMain, kNet, "send"}; }

MachProgram tt_program() {
  MachProgram p;
  p.intf.main_comp = 0;
  p.intf.comps[0].exports = {"main"};
  p.intf.comps[0].imports = {{1, "touch"}};
  p.buffers[0] = std::vector<Value>(2, Value::integer(0));
  p.ids.ids[{0, "main"}] = 0;
  // Private block 1 holds 7; shared block 2 holds 5 and is handed over.
  p.procs[{0, "main"}] = {
      i_const(Value::integer(1), Reg::One),
      i_alloc(Reg::Aux1, Reg::One),
      i_const(Value::integer(7), Reg::Sp),
      i_store(Reg::Aux1, Reg::Sp),
      i_const(Value::integer(1), Reg::One),
      i_alloc(Reg::Aux2, Reg::One),
      i_const(Value::integer(5), Reg::Sp),
      i_store(Reg::Aux2, Reg::Sp),
      i_mov(Reg::Aux2, Reg::Com),
      i_call(1, "touch"),
      i_halt(),
  };
  return p;
}

namespace {

MachProgram tt_context_base() {
  MachProgram p;
  p.intf.comps[1].exports = {"touch"};
  p.buffers[1] = std::vector<Value>(2, Value::integer(0));
  p.ids.ids[{1, "touch"}] = 0;
  return p;
}

}  // namespace

MachProgram tt_context_revert() {
  MachProgram p = tt_context_base();
  p.procs[{1, "touch"}] = {
      i_load(Reg::Com, Reg::One),            // remember the original value
      i_const(Value::integer(42), Reg::Aux1),
      i_store(Reg::Com, Reg::Aux1),          // shared cell now holds 42
      i_nop(),
      i_nop(),
      i_store(Reg::Com, Reg::One),           // put the original back
      i_const(Value::integer(9), Reg::Com),
      i_return(),
  };
  return p;
}

MachProgram tt_context_quiet() {
  MachProgram p = tt_context_base();
  p.procs[{1, "touch"}] = {
      i_load(Reg::Com, Reg::One),
      i_const(Value::integer(9), Reg::Com),
      i_return(),
  };
  return p;
}

std::set<int> tt_part() { return {0}; }

}  // namespace seclab

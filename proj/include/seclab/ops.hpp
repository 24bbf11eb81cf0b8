#pragma once

// Binary operators shared by the source and target languages.

#include <optional>
#include <string>

#include "seclab/memory.hpp"

namespace seclab {

enum class BinOpKind { Add, Sub, Mul, Eq, Leq };
std::string to_string(BinOpKind op);

// Integer arithmetic/comparison, pointer +/- integer offset, structural
// pointer equality, and same-block pointer difference. Anything else has no
// result (the machine gets stuck).
std::optional<Value> eval_binop(BinOpKind op, const Value& a, const Value& b);

}  // namespace seclab

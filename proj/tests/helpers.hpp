#pragma once

#include <vector>

#include "farf/core.hpp"

namespace farf::test {

/// Schema with numeric x0..x{n-1}, nominal sex {male, female} (female
/// protected) and class {no, yes}.
inline StreamSchema toy_schema(std::size_t numeric = 2) {
  std::vector<Attribute> cols;
  for (std::size_t i = 0; i < numeric; ++i) cols.push_back({"x" + std::to_string(i), AttributeKind::kNumeric, {}});
  cols.push_back({"sex", AttributeKind::kNominal, {"male", "female"}});
  cols.push_back({"class", AttributeKind::kNominal, {"no", "yes"}});
  return StreamSchema(cols, "sex", "female", "class", "yes");
}

inline Instance make(std::vector<double> values, Group g, Label l, std::uint64_t t = 0) {
  return Instance{std::move(values), g, l, t};
}

inline constexpr Group U = Group::kUnprotected;
inline constexpr Group P = Group::kProtected;
inline constexpr Label POS = Label::kPositive;
inline constexpr Label NEG = Label::kNegative;

}  // namespace farf::test

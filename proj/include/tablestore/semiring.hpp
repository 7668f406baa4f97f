#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace tablestore {

// Pluggable (plus, times, zero) over byte-string values. plus must be
// associative and commutative; zero must be the additive identity and
// the multiplicative annihilator. Built-ins: "plus-times" (exact decimal
// arithmetic) and "min-plus" (zero element spelled "inf").
struct Semiring {
  std::string name;
  std::string zero;
  std::function<std::string(std::string_view, std::string_view)> plus;
  std::function<std::string(std::string_view, std::string_view)> times;
  std::function<bool(std::string_view)> isZero;
};

class SemiringRegistry {
 public:
  // Throws std::out_of_range for unknown names.
  static const Semiring& get(const std::string& name);
  static void add(Semiring s);
  static bool has(const std::string& name);
};

}  // namespace tablestore

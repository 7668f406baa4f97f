#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <string_view>

namespace tablestore {

// Exact decimal number: unscaled * 10^-scale. All arithmetic is exact;
// results are kept normalized (no trailing fractional zeros, zero has
// scale 0) so equal values render to identical text.
class Decimal {
 public:
  Decimal() = default;

  // Accepts [+-]digits[.digits]. Throws std::invalid_argument otherwise.
  static Decimal parse(std::string_view text);
  static Decimal fromInt(std::int64_t v);

  Decimal plus(const Decimal& o) const;
  Decimal times(const Decimal& o) const;

  // <0, 0, >0 as in strcmp.
  int compare(const Decimal& o) const;

  bool isZero() const { return unscaled_ == 0; }
  std::string str() const;

 private:
  boost::multiprecision::cpp_int unscaled_;
  std::int32_t scale_ = 0;

  void normalize();
};

}  // namespace tablestore

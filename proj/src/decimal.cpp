#include "tablestore/decimal.hpp"

#include <stdexcept>

namespace tablestore {

namespace mp = boost::multiprecision;

namespace {

mp::cpp_int pow10(std::int32_t n) {
  mp::cpp_int r = 1;
  for (std::int32_t i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  digits.reserve(text.size());
  std::size_t intDigits = 0;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    digits.push_back(text[i]);
    ++i;
    ++intDigits;
  }
  std::int32_t scale = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t fracStart = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      digits.push_back(text[i]);
      ++i;
    }
    scale = static_cast<std::int32_t>(i - fracStart);
    if (scale == 0)
      throw std::invalid_argument("decimal: no digits after point in '" +
                                  std::string(text) + "'");
  }
  if (digits.empty() || (intDigits == 0 && scale == 0) || i != text.size())
    throw std::invalid_argument("decimal: malformed value '" +
                                std::string(text) + "'");
  Decimal d;
  d.unscaled_ = mp::cpp_int(digits);
  if (negative) d.unscaled_ = -d.unscaled_;
  d.scale_ = scale;
  d.normalize();
  return d;
}

Decimal Decimal::fromInt(std::int64_t v) {
  Decimal d;
  d.unscaled_ = v;
  return d;
}

void Decimal::normalize() {
  if (unscaled_ == 0) {
    scale_ = 0;
    return;
  }
  while (scale_ > 0 && unscaled_ % 10 == 0) {
    unscaled_ /= 10;
    --scale_;
  }
}

Decimal Decimal::plus(const Decimal& o) const {
  Decimal r;
  if (scale_ == o.scale_) {
    r.unscaled_ = unscaled_ + o.unscaled_;
    r.scale_ = scale_;
  } else if (scale_ < o.scale_) {
    r.unscaled_ = unscaled_ * pow10(o.scale_ - scale_) + o.unscaled_;
    r.scale_ = o.scale_;
  } else {
    r.unscaled_ = unscaled_ + o.unscaled_ * pow10(scale_ - o.scale_);
    r.scale_ = scale_;
  }
  r.normalize();
  return r;
}

Decimal Decimal::times(const Decimal& o) const {
  Decimal r;
  r.unscaled_ = unscaled_ * o.unscaled_;
  r.scale_ = scale_ + o.scale_;
  r.normalize();
  return r;
}

int Decimal::compare(const Decimal& o) const {
  mp::cpp_int a = unscaled_;
  mp::cpp_int b = o.unscaled_;
  if (scale_ < o.scale_)
    a *= pow10(o.scale_ - scale_);
  else if (scale_ > o.scale_)
    b *= pow10(scale_ - o.scale_);
  if (a < b) return -1;
  if (a > b) return 1;
  return 0;
}

std::string Decimal::str() const {
  if (scale_ == 0) return unscaled_.str();
  bool negative = unscaled_ < 0;
  std::string digits = mp::cpp_int(negative ? -unscaled_ : unscaled_).str();
  if (digits.size() <= static_cast<std::size_t>(scale_))
    digits.insert(0, static_cast<std::size_t>(scale_) + 1 - digits.size(),
                  '0');
  digits.insert(digits.size() - static_cast<std::size_t>(scale_), 1, '.');
  if (negative) digits.insert(0, 1, '-');
  return digits;
}

}  // namespace tablestore

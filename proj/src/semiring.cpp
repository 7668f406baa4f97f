#include "tablestore/semiring.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "tablestore/decimal.hpp"

namespace tablestore {

namespace {

Semiring makePlusTimes() {
  Semiring s;
  s.name = "plus-times";
  s.zero = "0";
  s.plus = [](std::string_view a, std::string_view b) {
    return Decimal::parse(a).plus(Decimal::parse(b)).str();
  };
  s.times = [](std::string_view a, std::string_view b) {
    return Decimal::parse(a).times(Decimal::parse(b)).str();
  };
  s.isZero = [](std::string_view a) { return Decimal::parse(a).isZero(); };
  return s;
}

// Tropical semiring: plus = min, times = decimal addition, zero = "inf".
Semiring makeMinPlus() {
  Semiring s;
  s.name = "min-plus";
  s.zero = "inf";
  s.plus = [](std::string_view a, std::string_view b) -> std::string {
    if (a == "inf") return std::string(b);
    if (b == "inf") return std::string(a);
    Decimal da = Decimal::parse(a);
    Decimal db = Decimal::parse(b);
    return da.compare(db) <= 0 ? da.str() : db.str();
  };
  s.times = [](std::string_view a, std::string_view b) -> std::string {
    if (a == "inf" || b == "inf") return "inf";
    return Decimal::parse(a).plus(Decimal::parse(b)).str();
  };
  s.isZero = [](std::string_view a) { return a == "inf"; };
  return s;
}

std::mutex& registryMutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, Semiring>& registry() {
  static std::map<std::string, Semiring> r = [] {
    std::map<std::string, Semiring> m;
    Semiring pt = makePlusTimes();
    Semiring mp = makeMinPlus();
    m.emplace(pt.name, std::move(pt));
    m.emplace(mp.name, std::move(mp));
    return m;
  }();
  return r;
}

}  // namespace

const Semiring& SemiringRegistry::get(const std::string& name) {
  std::lock_guard lock(registryMutex());
  auto it = registry().find(name);
  if (it == registry().end())
    throw std::out_of_range("unknown semiring: " + name);
  return it->second;
}

void SemiringRegistry::add(Semiring s) {
  std::lock_guard lock(registryMutex());
  registry()[s.name] = std::move(s);
}

bool SemiringRegistry::has(const std::string& name) {
  std::lock_guard lock(registryMutex());
  return registry().count(name) > 0;
}

}  // namespace tablestore

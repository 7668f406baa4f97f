#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tablestore {

// A contiguous row range. Unset bounds are unbounded.
struct RowRange {
  std::optional<std::string> low;
  bool lowInclusive = true;
  std::optional<std::string> high;
  bool highInclusive = true;

  bool contains(std::string_view row) const;
  // True when row lies beyond the high bound.
  bool pastHigh(std::string_view row) const;
  // True when row lies before the low bound.
  bool beforeLow(std::string_view row) const;

  static RowRange all() { return RowRange{}; }
  static RowRange afterRow(std::string row) {
    return RowRange{std::move(row), false, std::nullopt, true};
  }
};

struct SubsetParseError : std::runtime_error {
  SubsetParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at position " + std::to_string(pos) +
                           ")"),
        position(pos) {}
  std::size_t position;
};

// An ordered union of disjoint row ranges. The default-constructed set is
// the unbounded universe; an intersection may produce an empty set.
class RangeSet {
 public:
  RangeSet() : ranges_{RowRange::all()} {}
  // Validates sorted + disjoint; throws std::invalid_argument otherwise.
  explicit RangeSet(std::vector<RowRange> ranges);

  // D4M-like subset expression: comma-separated tokens with a trailing
  // comma; a ":" token between two tokens makes an inclusive range; other
  // tokens are singleton rows. "" means all rows.
  static RangeSet parse(std::string_view expr);

  const std::vector<RowRange>& ranges() const { return ranges_; }
  bool empty() const { return ranges_.empty(); }
  bool contains(std::string_view row) const;
  RangeSet intersect(const RowRange& r) const;

 private:
  std::vector<RowRange> ranges_;
};

}  // namespace tablestore

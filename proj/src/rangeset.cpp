#include "tablestore/rangeset.hpp"

#include <algorithm>

namespace tablestore {

bool RowRange::contains(std::string_view row) const {
  return !beforeLow(row) && !pastHigh(row);
}

bool RowRange::pastHigh(std::string_view row) const {
  if (!high) return false;
  if (highInclusive) return row > *high;
  return row >= *high;
}

bool RowRange::beforeLow(std::string_view row) const {
  if (!low) return false;
  if (lowInclusive) return row < *low;
  return row <= *low;
}

namespace {

// a entirely precedes b with no shared row.
bool strictlyBefore(const RowRange& a, const RowRange& b) {
  if (!a.high || !b.low) return false;
  if (*a.high < *b.low) return true;
  if (*a.high > *b.low) return false;
  return !(a.highInclusive && b.lowInclusive);
}

}  // namespace

RangeSet::RangeSet(std::vector<RowRange> ranges) : ranges_(std::move(ranges)) {
  for (std::size_t i = 1; i < ranges_.size(); ++i) {
    if (!strictlyBefore(ranges_[i - 1], ranges_[i]))
      throw std::invalid_argument("range set not sorted and disjoint");
  }
}

RangeSet RangeSet::parse(std::string_view expr) {
  if (expr.empty()) return RangeSet{};
  if (expr.back() != ',')
    throw SubsetParseError("missing trailing separator", expr.size());

  struct Token {
    std::string text;
    std::size_t pos;
  };
  std::vector<Token> tokens;
  std::size_t start = 0;
  for (std::size_t i = 0; i < expr.size(); ++i) {
    if (expr[i] == ',') {
      if (i == start) throw SubsetParseError("empty token", start);
      tokens.push_back({std::string(expr.substr(start, i - start)), start});
      start = i + 1;
    }
  }

  std::vector<RowRange> ranges;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].text == ":")
      throw SubsetParseError("dangling ':'", tokens[i].pos);
    if (i + 1 < tokens.size() && tokens[i + 1].text == ":") {
      if (i + 2 >= tokens.size())
        throw SubsetParseError("dangling ':'", tokens[i + 1].pos);
      if (tokens[i + 2].text == ":")
        throw SubsetParseError("dangling ':'", tokens[i + 2].pos);
      ranges.push_back(
          RowRange{tokens[i].text, true, tokens[i + 2].text, true});
      if (tokens[i].text > tokens[i + 2].text)
        throw SubsetParseError("range bounds out of order", tokens[i].pos);
      i += 2;
    } else {
      ranges.push_back(RowRange{tokens[i].text, true, tokens[i].text, true});
    }
  }

  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (!strictlyBefore(ranges[i - 1], ranges[i]))
      throw SubsetParseError("overlapping or unsorted ranges",
                             tokens.empty() ? 0 : tokens[0].pos);
  }
  RangeSet rs;
  rs.ranges_ = std::move(ranges);
  return rs;
}

bool RangeSet::contains(std::string_view row) const {
  for (const RowRange& r : ranges_)
    if (r.contains(row)) return true;
  return false;
}

RangeSet RangeSet::intersect(const RowRange& r) const {
  std::vector<RowRange> out;
  for (const RowRange& a : ranges_) {
    RowRange c = a;
    // Tighten the low bound.
    if (r.low) {
      if (!c.low || *c.low < *r.low ||
          (*c.low == *r.low && c.lowInclusive && !r.lowInclusive)) {
        c.low = r.low;
        c.lowInclusive = r.lowInclusive;
      }
    }
    // Tighten the high bound.
    if (r.high) {
      if (!c.high || *c.high > *r.high ||
          (*c.high == *r.high && c.highInclusive && !r.highInclusive)) {
        c.high = r.high;
        c.highInclusive = r.highInclusive;
      }
    }
    // Keep only non-empty results.
    if (c.low && c.high) {
      if (*c.low > *c.high) continue;
      if (*c.low == *c.high && !(c.lowInclusive && c.highInclusive)) continue;
    }
    out.push_back(std::move(c));
  }
  RangeSet rs;
  rs.ranges_ = std::move(out);
  return rs;
}

}  // namespace tablestore

#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tablestore/rangeset.hpp"
#include "tablestore/semiring.hpp"

namespace tablestore {

struct Key {
  std::string row;
  std::string col;
  auto operator<=>(const Key&) const = default;
};

struct KeyView {
  std::string_view row;
  std::string_view col;
  auto operator<=>(const KeyView&) const = default;
  Key owned() const { return Key{std::string(row), std::string(col)}; }
};

inline std::strong_ordering compare(const KeyView& a, const KeyView& b) {
  return a <=> b;
}

struct Entry {
  Key key;
  std::string value;
  bool operator==(const Entry&) const = default;
};

struct EntryView {
  std::string_view row;
  std::string_view col;
  std::string_view value;
  KeyView key() const { return KeyView{row, col}; }
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = std::hash<std::string>{}(k.row);
    return h ^ (std::hash<std::string>{}(k.col) + 0x9e3779b97f4a7c15ULL +
                (h << 6) + (h >> 2));
  }
};

enum CombinerScope : unsigned {
  kScanScope = 1u,
  kFlushScope = 2u,
  kCompactScope = 4u,
  kAllScopes = kScanScope | kFlushScope | kCompactScope,
};

struct CombinerSpec {
  std::string semiringName;
  unsigned scopes = kAllScopes;
};

struct TableConfig {
  std::string name;
  std::vector<std::string> splits;  // strictly increasing
  std::optional<CombinerSpec> combiner;
  // Mem buffer auto-flushes past this many buffered entries; a tablet
  // auto-compacts past this many sorted runs.
  std::size_t autoFlushEntries = std::size_t{1} << 21;
  std::size_t autoCompactRuns = 10;
};

struct WriteStats {
  std::uint64_t entriesWritten = 0;
  std::uint64_t flushes = 0;
};

// An immutable sorted sequence of entries in pooled storage. Equal keys
// may appear adjacently (oldest first) when no combiner collapsed them.
class Run {
 public:
  std::size_t size() const { return slots_.size(); }
  EntryView at(std::size_t i) const;
  // First index whose key is >= k.
  std::size_t lowerBound(const KeyView& k) const;
  // First index whose key is > k.
  std::size_t upperBound(const KeyView& k) const;
  // First index whose row is > row.
  std::size_t upperBoundRow(std::string_view row) const;
  // First index whose row is >= row.
  std::size_t lowerBoundRow(std::string_view row) const;

  class Builder {
   public:
    void append(std::string_view row, std::string_view col,
                std::string_view value);
    std::shared_ptr<const Run> build();
    std::size_t size() const { return run_->size(); }

   private:
    std::shared_ptr<Run> run_ = std::make_shared<Run>();
  };

 private:
  struct Slot {
    std::uint64_t off;
    std::uint32_t rowLen;
    std::uint32_t colLen;
    std::uint32_t valLen;
  };
  std::vector<char> pool_;
  std::vector<Slot> slots_;
};

using RunPtr = std::shared_ptr<const Run>;

// Snapshot of one tablet: immutable runs ordered oldest to newest; the
// mem buffer is materialized as the newest run.
struct TabletSnapshot {
  std::vector<RunPtr> runs;
};

struct TableSnapshot {
  std::vector<TabletSnapshot> tablets;
  const Semiring* scanCombiner = nullptr;  // null when not in SCAN scope
};

class Table;

struct ScanStats {
  std::uint64_t entriesRead = 0;
};

// Merge-sorted cursor over a table snapshot restricted to a row-range
// domain, with the SCAN-scope combiner (or newest-wins) applied, so no
// two emitted entries share a key. Seekable to arbitrary positions.
class TableScanner {
 public:
  TableScanner(TableSnapshot snapshot, RangeSet domain);

  bool hasTop();
  KeyView topKey() const;
  std::string_view topValue() const;
  void next();

  // Re-position at the first key in `domain ∩ rows` (and strictly after
  // startAfter, when given).
  void seek(const RowRange& rows, const std::optional<Key>& startAfter = {});

  const ScanStats& stats() const { return stats_; }

 private:
  struct Cursor {
    RunPtr run;
    std::size_t pos;
    int priority;  // larger = newer
  };

  TableSnapshot snap_;
  RangeSet domain_;
  RangeSet active_;  // domain ∩ latest seek
  std::size_t rangeIdx_ = 0;
  std::vector<Cursor> cursors_;
  // Min-heap indices into cursors_.
  std::vector<std::size_t> heap_;
  bool topValid_ = false;
  Key topKey_;
  std::string topValue_;
  ScanStats stats_;

  void heapInit();
  void heapSiftDown(std::size_t i);
  bool heapLess(std::size_t a, std::size_t b) const;
  void positionAtRange(const std::optional<Key>& startAfter);
  void advance();
  bool rawEmpty() const { return heap_.empty(); }
  EntryView rawTop() const;
  void rawPop();
  void seekCursors(std::string_view row, bool inclusive,
                   const std::optional<Key>& startAfter);
};

// A named, split-partitioned collection of entries.
class Table : public std::enable_shared_from_this<Table> {
 public:
  Table(TableConfig config, const Semiring* combinerSemiring);

  const std::string& name() const { return config_.name; }
  const TableConfig& config() const { return config_; }
  const Semiring* combinerSemiring() const { return combiner_; }

  WriteStats write(std::span<const Entry> entries);
  void flush();
  void compact();
  void addSplit(const std::string& splitRow);

  std::size_t tabletCount() const;
  std::vector<RowRange> tabletRanges() const;
  // Raw entry count per tablet (pre-combining), for split planning tests.
  std::vector<std::uint64_t> tabletRawCounts() const;

  TableSnapshot snapshot() const;

  // Convenience scans (combined view).
  std::vector<Entry> scanAll(const RangeSet& domain = RangeSet{}) const;
  void visitScan(const std::function<void(const EntryView&)>& fn,
                 const RangeSet& domain = RangeSet{}) const;
  std::uint64_t countEntries() const;

  // Seconds spent in automatic flush/compaction triggered by writes.
  double maintenanceSeconds() const;

  void markDropped();
  bool dropped() const;

 private:
  struct Tablet {
    std::optional<std::string> lowExclusive;   // unset = -inf
    std::optional<std::string> highInclusive;  // unset = +inf
    std::vector<RunPtr> runs;                  // oldest..newest
    // General buffer: per-key values in write order (oldest first).
    std::map<Key, std::vector<std::string>> mem;
    // Eager buffer, used when the combiner covers all scopes: duplicates
    // are folded on write, which is valid because plus is associative
    // and commutative.
    std::unordered_map<Key, std::string, KeyHash> acc;
    std::uint64_t memEntries = 0;
    mutable std::mutex mu;
  };

  TableConfig config_;
  const Semiring* combiner_ = nullptr;  // resolved from config
  bool eager_ = false;
  std::vector<std::unique_ptr<Tablet>> tablets_;
  mutable std::shared_mutex structMu_;  // guards tablets_ layout
  std::atomic<std::uint64_t> maintenanceNanos_{0};
  std::atomic<bool> dropped_{false};

  std::size_t tabletIndexFor(std::string_view row) const;
  RunPtr materializeMem(Tablet& t) const;
  void flushTabletLocked(Tablet& t);
  void compactTabletLocked(Tablet& t);
  std::uint64_t maybeMaintainLocked(Tablet& t);
  bool combinerInScope(unsigned scope) const {
    return combiner_ && (config_.combiner->scopes & scope);
  }
};

// Table registry. Throws on duplicate creation or unknown lookups.
class Store {
 public:
  std::shared_ptr<Table> createTable(TableConfig config);
  std::shared_ptr<Table> get(const std::string& name) const;
  bool has(const std::string& name) const;
  void drop(const std::string& name);

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Table>> tables_;
};

// Dump/load format: row<TAB>colQualifier<TAB>value<LF>, sorted by key.
void dumpTable(const Table& table, std::ostream& out);
WriteStats loadTable(Table& table, std::istream& in);

}  // namespace tablestore

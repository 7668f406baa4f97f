#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablestore/kvstore.hpp"
#include "tablestore/rangeset.hpp"
#include "tablestore/semiring.hpp"

namespace tablestore {

// Reserved column qualifier marking monitoring entries on the scan
// result channel.
inline constexpr std::string_view kMonitorCol = "~monitor";

using Options = std::map<std::string, std::string>;

struct SeekRange {
  RowRange rows;
  // When set, emit only keys strictly greater than this.
  std::optional<Key> startAfter;
};

// Sorted key-value iterator contract. Emitted keys are non-decreasing
// after a seek at the end of a stack; an iterator is reconstructible
// from its options plus the last emitted key.
class Skvi {
 public:
  virtual ~Skvi() = default;
  virtual void seek(const SeekRange& range) = 0;
  virtual bool hasTop() = 0;
  virtual KeyView topKey() const = 0;
  virtual std::string_view topValue() const = 0;
  virtual void next() = 0;

  // Resume support. A safe point is a position from which a destroyed
  // stack can be rebuilt without duplicating or dropping output.
  virtual bool atSafePoint() const { return true; }
  // Row recorded in a resume token; unset before any output completes.
  virtual std::optional<std::string> safeResumeRow() const { return {}; }
  // Entries processed so far (the monitoring count).
  virtual std::uint64_t processedCount() const { return 0; }
};

// Streams a registered table restricted to a row subset, with an
// optional column-qualifier post-filter.
class RemoteSourceIterator : public Skvi {
 public:
  using ColPredicate = std::function<bool(std::string_view)>;

  // Recognized options: "table" (required), "rowSubset" (subset
  // expression, default everything). Fails at init for unknown tables.
  RemoteSourceIterator(const Store& store, const Options& options);
  RemoteSourceIterator(const Store& store, const std::string& tableName,
                       RangeSet rowSubset, ColPredicate colFilter = {});

  void seek(const SeekRange& range) override;
  bool hasTop() override;
  KeyView topKey() const override;
  std::string_view topValue() const override;
  void next() override;
  bool atSafePoint() const override { return safe_; }
  std::optional<std::string> safeResumeRow() const override;
  std::uint64_t processedCount() const override;

  const ScanStats& stats() const;

 private:
  std::shared_ptr<Table> table_;
  RangeSet rowSubset_;
  ColPredicate colFilter_;
  std::unique_ptr<TableScanner> scanner_;
  std::optional<std::string> lastRow_;
  std::uint64_t emitted_ = 0;
  bool safe_ = true;  // true at row boundaries

  void skipFiltered();
};

struct MultiplyStats {
  std::uint64_t partialProducts = 0;
  std::uint64_t entriesReadA = 0;
  std::uint64_t entriesReadB = 0;
  std::uint64_t entriesWrittenC = 0;
  std::uint64_t flushCount = 0;
  std::uint64_t passesOverB = 0;
  double elapsedSeconds = 0;
  // Time the result table spent in automatic flush/compaction during the
  // multiply; excluded from rate denominators.
  double maintenanceSeconds = 0;

  MultiplyStats& operator+=(const MultiplyStats& o);
};

// Aligns two sorted sources on matching rows and streams the Cartesian
// product of each matching row pair through the semiring's times.
// Emitted keys are (i from the first source's column, j from the second
// source's column); they are not globally sorted, which is why this
// iterator feeds a write conduit rather than the scan channel.
class TwoTableIterator : public Skvi {
 public:
  struct Config {
    const Semiring* semiring = nullptr;
    // When true, alignment seeks the lagging source past non-matching
    // rows instead of streaming through them (streaming keeps the
    // read counters equal to nnz).
    bool seekAlign = false;
    // A matching row larger than this aborts rather than degrade.
    std::size_t rowCapEntries = std::size_t{1} << 20;
  };

  TwoTableIterator(std::unique_ptr<Skvi> sourceAT,
                   std::unique_ptr<Skvi> sourceB, Config config);

  void seek(const SeekRange& range) override;
  bool hasTop() override;
  KeyView topKey() const override;
  std::string_view topValue() const override;
  void next() override;

  bool atSafePoint() const override { return safe_; }
  std::optional<std::string> safeResumeRow() const override {
    return lastCompletedRow_;
  }
  std::uint64_t processedCount() const override { return entriesReadB_; }

  std::uint64_t entriesReadA() const { return entriesReadA_; }
  std::uint64_t entriesReadB() const { return entriesReadB_; }
  std::uint64_t partialProducts() const { return partialProducts_; }

 private:
  struct Cell {
    std::string col;
    std::string value;
  };

  std::unique_ptr<Skvi> srcA_;  // holds the transpose of A
  std::unique_ptr<Skvi> srcB_;
  Config cfg_;

  std::vector<Cell> rowA_, rowB_;
  std::size_t ia_ = 0, ib_ = 0;
  bool blockLoaded_ = false;
  bool safe_ = true;
  std::optional<std::string> lastCompletedRow_;
  std::string currentRow_;
  Key topKey_;
  std::string topValue_;
  bool topComputed_ = false;

  std::uint64_t entriesReadA_ = 0, entriesReadB_ = 0, partialProducts_ = 0;
  std::optional<std::string> lastRowA_, lastRowB_;

  bool loadNextBlock();
  void consumeRowInto(Skvi& src, std::vector<Cell>* out, std::uint64_t* reads,
                      std::optional<std::string>* lastRow);
  void computeTop();
  void stepPair();
};

enum class TransposeMode { kC, kCT, kBoth };

// Drains its source across all configured ranges in a single seek
// invocation, writing every source entry to the target table exactly
// once (optionally transposed, or both), flushing the batch writer once
// at the end. The only entries surfaced on the scan channel are
// monitoring entries, emitted at safe points.
class RemoteWriteIterator : public Skvi {
 public:
  struct Config {
    std::string targetTable;
    TransposeMode mode = TransposeMode::kC;
    std::string transposeTable;  // required for kBoth
    std::optional<std::uint64_t> monitorEveryN;
    RangeSet ranges;  // seek-control transfer: handled internally
  };

  RemoteWriteIterator(Store& store, std::unique_ptr<Skvi> source,
                      Config config);
  ~RemoteWriteIterator() override;

  void seek(const SeekRange& range) override;
  bool hasTop() override;
  KeyView topKey() const override;
  std::string_view topValue() const override;
  void next() override;

  std::uint64_t entriesWritten() const { return entriesWritten_; }
  std::uint64_t flushCount() const { return flushCount_; }
  const Skvi& source() const { return *source_; }
  Skvi& source() { return *source_; }

 private:
  Store& store_;
  std::unique_ptr<Skvi> source_;
  Config cfg_;
  std::shared_ptr<Table> target_;
  std::shared_ptr<Table> transposeTarget_;

  std::vector<Entry> bufferC_, bufferCT_;
  std::vector<RowRange> pending_;
  std::size_t rangeIdx_ = 0;
  bool draining_ = false;
  bool finished_ = false;
  bool finalMonitorEmitted_ = false;
  std::optional<Entry> topMonitor_;
  std::uint64_t entriesWritten_ = 0;
  std::uint64_t flushCount_ = 0;
  std::uint64_t nextThreshold_ = 0;
  std::optional<std::uint64_t> lastMonitorCount_;

  void drive();
  void writeEntry(const KeyView& k, std::string_view value);
  void handOffIfFull();
  void flushWriters();
  Entry makeMonitor() const;
};

// An assembled multiply stack. The writer owns the chain; the inner
// pointers are borrowed views for counter collection.
struct IteratorStack {
  std::unique_ptr<RemoteWriteIterator> writer;
  TwoTableIterator* mult = nullptr;
  RemoteSourceIterator* sourceAT = nullptr;
  RemoteSourceIterator* sourceB = nullptr;
};

// Options recognized: AT.table, B.table, B.rowSubset, C.table,
// C.transpose in {c, ct, both}, C.transposeTable, monitor.everyN,
// semiring, mult.seekAlign, mult.rowCap. Malformed options are rejected
// here, before any entry is emitted.
IteratorStack buildStack(Store& store, const Options& options);

// Rebuilds a stack from its options and the last monitoring entry's key,
// positioned so the remaining output unions with the prefix to the
// uninterrupted run's output. Rejects keys that are not resume tokens.
IteratorStack rebuildAndResume(Store& store, const Options& options,
                               const Key& lastMonitorKey);

}  // namespace tablestore

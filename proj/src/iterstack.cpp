#include "tablestore/iterstack.hpp"

#include <charconv>
#include <set>
#include <stdexcept>

namespace tablestore {

MultiplyStats& MultiplyStats::operator+=(const MultiplyStats& o) {
  partialProducts += o.partialProducts;
  entriesReadA += o.entriesReadA;
  entriesReadB += o.entriesReadB;
  entriesWrittenC += o.entriesWrittenC;
  flushCount += o.flushCount;
  passesOverB += o.passesOverB;
  elapsedSeconds += o.elapsedSeconds;
  maintenanceSeconds += o.maintenanceSeconds;
  return *this;
}

// ---------------------------------------------------------------------------
// RemoteSourceIterator

RemoteSourceIterator::RemoteSourceIterator(const Store& store,
                                           const Options& options)
    : RemoteSourceIterator(
          store,
          [&options]() -> std::string {
            auto it = options.find("table");
            if (it == options.end())
              throw std::invalid_argument(
                  "remote source: missing 'table' option");
            return it->second;
          }(),
          [&options] {
            auto it = options.find("rowSubset");
            return it == options.end() ? RangeSet{}
                                       : RangeSet::parse(it->second);
          }()) {}

RemoteSourceIterator::RemoteSourceIterator(const Store& store,
                                           const std::string& tableName,
                                           RangeSet rowSubset,
                                           ColPredicate colFilter)
    : table_(store.get(tableName)),
      rowSubset_(std::move(rowSubset)),
      colFilter_(std::move(colFilter)) {
  scanner_ = std::make_unique<TableScanner>(table_->snapshot(), rowSubset_);
  skipFiltered();
}

void RemoteSourceIterator::seek(const SeekRange& range) {
  scanner_->seek(range.rows, range.startAfter);
  lastRow_.reset();
  safe_ = true;
  skipFiltered();
}

void RemoteSourceIterator::skipFiltered() {
  if (!colFilter_) return;
  while (scanner_->hasTop() && !colFilter_(scanner_->topKey().col))
    scanner_->next();
}

bool RemoteSourceIterator::hasTop() { return scanner_->hasTop(); }

KeyView RemoteSourceIterator::topKey() const { return scanner_->topKey(); }

std::string_view RemoteSourceIterator::topValue() const {
  return scanner_->topValue();
}

void RemoteSourceIterator::next() {
  lastRow_ = std::string(scanner_->topKey().row);
  ++emitted_;
  scanner_->next();
  skipFiltered();
  safe_ = !scanner_->hasTop() || scanner_->topKey().row != *lastRow_;
}

std::optional<std::string> RemoteSourceIterator::safeResumeRow() const {
  return lastRow_;
}

std::uint64_t RemoteSourceIterator::processedCount() const {
  return emitted_;
}

const ScanStats& RemoteSourceIterator::stats() const {
  return scanner_->stats();
}

// ---------------------------------------------------------------------------
// TwoTableIterator

TwoTableIterator::TwoTableIterator(std::unique_ptr<Skvi> sourceAT,
                                   std::unique_ptr<Skvi> sourceB,
                                   Config config)
    : srcA_(std::move(sourceAT)), srcB_(std::move(sourceB)), cfg_(config) {
  if (!cfg_.semiring)
    throw std::invalid_argument("two-table iterator: semiring required");
}

void TwoTableIterator::seek(const SeekRange& range) {
  srcA_->seek(range);
  srcB_->seek(range);
  rowA_.clear();
  rowB_.clear();
  blockLoaded_ = false;
  topComputed_ = false;
  safe_ = true;
  lastRowA_.reset();
  lastRowB_.reset();
}

void TwoTableIterator::consumeRowInto(Skvi& src, std::vector<Cell>* out,
                                      std::uint64_t* reads,
                                      std::optional<std::string>* lastRow) {
  std::string row(src.topKey().row);
  if (*lastRow && row < **lastRow)
    throw std::runtime_error("two-table iterator: source out of order at row " +
                             row);
  *lastRow = row;
  while (src.hasTop() && src.topKey().row == row) {
    if (out) {
      out->push_back(Cell{std::string(src.topKey().col),
                          std::string(src.topValue())});
      if (out->size() > cfg_.rowCapEntries)
        throw std::runtime_error("two-table iterator: row '" + row +
                                 "' exceeds the in-memory row cap");
    }
    ++*reads;
    src.next();
  }
}

bool TwoTableIterator::loadNextBlock() {
  while (srcA_->hasTop() && srcB_->hasTop()) {
    std::string ra(srcA_->topKey().row);
    std::string rb(srcB_->topKey().row);
    if (ra < rb) {
      if (cfg_.seekAlign)
        srcA_->seek(SeekRange{RowRange{rb, true, std::nullopt, true}, {}});
      else
        consumeRowInto(*srcA_, nullptr, &entriesReadA_, &lastRowA_);
    } else if (rb < ra) {
      if (cfg_.seekAlign)
        srcB_->seek(SeekRange{RowRange{ra, true, std::nullopt, true}, {}});
      else
        consumeRowInto(*srcB_, nullptr, &entriesReadB_, &lastRowB_);
    } else {
      rowA_.clear();
      rowB_.clear();
      consumeRowInto(*srcA_, &rowA_, &entriesReadA_, &lastRowA_);
      consumeRowInto(*srcB_, &rowB_, &entriesReadB_, &lastRowB_);
      currentRow_ = ra;
      ia_ = 0;
      ib_ = 0;
      blockLoaded_ = true;
      topComputed_ = false;
      safe_ = false;
      return true;
    }
  }
  // Streaming mode finishes its single pass over whichever source is
  // longer, so the read counters always equal the full input nnz.
  if (!cfg_.seekAlign) {
    while (srcA_->hasTop())
      consumeRowInto(*srcA_, nullptr, &entriesReadA_, &lastRowA_);
    while (srcB_->hasTop())
      consumeRowInto(*srcB_, nullptr, &entriesReadB_, &lastRowB_);
  }
  return false;
}

void TwoTableIterator::computeTop() {
  const Cell& a = rowA_[ia_];
  const Cell& b = rowB_[ib_];
  try {
    topValue_ = cfg_.semiring->times(a.value, b.value);
  } catch (const std::exception& e) {
    throw std::runtime_error("times failed at k=" + currentRow_ +
                             " i=" + a.col + " j=" + b.col + ": " + e.what());
  }
  topKey_.row = a.col;
  topKey_.col = b.col;
  ++partialProducts_;
  topComputed_ = true;
}

void TwoTableIterator::stepPair() {
  topComputed_ = false;
  if (++ib_ >= rowB_.size()) {
    ib_ = 0;
    if (++ia_ >= rowA_.size()) {
      blockLoaded_ = false;
      safe_ = true;
      lastCompletedRow_ = currentRow_;
    }
  }
}

bool TwoTableIterator::hasTop() {
  while (true) {
    if (blockLoaded_) {
      if (!topComputed_) computeTop();
      if (!cfg_.semiring->isZero(topValue_)) return true;
      stepPair();  // zero partial products never leave the iterator
      continue;
    }
    if (!loadNextBlock()) return false;
  }
}

KeyView TwoTableIterator::topKey() const {
  return KeyView{topKey_.row, topKey_.col};
}

std::string_view TwoTableIterator::topValue() const { return topValue_; }

void TwoTableIterator::next() { stepPair(); }

// ---------------------------------------------------------------------------
// RemoteWriteIterator

RemoteWriteIterator::RemoteWriteIterator(Store& store,
                                         std::unique_ptr<Skvi> source,
                                         Config config)
    : store_(store), source_(std::move(source)), cfg_(std::move(config)) {
  target_ = store_.get(cfg_.targetTable);
  if (cfg_.mode == TransposeMode::kBoth) {
    if (cfg_.transposeTable.empty())
      throw std::invalid_argument(
          "remote write: transpose table required for mode 'both'");
    transposeTarget_ = store_.get(cfg_.transposeTable);
  }
  if (cfg_.monitorEveryN && *cfg_.monitorEveryN == 0)
    throw std::invalid_argument("remote write: monitor.everyN must be > 0");
}

RemoteWriteIterator::~RemoteWriteIterator() {
  // Torn down mid-drain: the write-once guarantee requires everything
  // handed to the writer to reach the table.
  if (!bufferC_.empty() || !bufferCT_.empty()) {
    try {
      flushWriters();
      ++flushCount_;
    } catch (...) {
      // Target dropped under teardown; nothing further to report.
    }
  }
}

void RemoteWriteIterator::seek(const SeekRange& range) {
  RangeSet active = cfg_.ranges.intersect(range.rows);
  pending_ = active.ranges();
  rangeIdx_ = 0;
  draining_ = false;
  finished_ = false;
  finalMonitorEmitted_ = false;
  topMonitor_.reset();
  nextThreshold_ = cfg_.monitorEveryN ? *cfg_.monitorEveryN : 0;
  drive();
}

void RemoteWriteIterator::drive() {
  while (rangeIdx_ < pending_.size()) {
    if (!draining_) {
      source_->seek(SeekRange{pending_[rangeIdx_], {}});
      draining_ = true;
    }
    while (source_->hasTop()) {
      writeEntry(source_->topKey(), source_->topValue());
      source_->next();
      if (cfg_.monitorEveryN &&
          source_->processedCount() >= nextThreshold_ &&
          source_->atSafePoint()) {
        topMonitor_ = makeMonitor();
        lastMonitorCount_ = source_->processedCount();
        nextThreshold_ =
            (source_->processedCount() / *cfg_.monitorEveryN + 1) *
            *cfg_.monitorEveryN;
        return;
      }
    }
    draining_ = false;
    ++rangeIdx_;
  }
  // All ranges drained within this invocation: flush exactly once.
  if (!finished_) {
    flushWriters();
    ++flushCount_;
    finished_ = true;
    if (cfg_.monitorEveryN && !finalMonitorEmitted_) {
      finalMonitorEmitted_ = true;
      // Counts are strictly increasing: skip a final entry that would
      // repeat the last threshold emission.
      if (!lastMonitorCount_ ||
          source_->processedCount() != *lastMonitorCount_) {
        topMonitor_ = makeMonitor();
        lastMonitorCount_ = source_->processedCount();
      }
    }
  }
}

void RemoteWriteIterator::writeEntry(const KeyView& k,
                                     std::string_view value) {
  try {
    if (cfg_.mode == TransposeMode::kC || cfg_.mode == TransposeMode::kBoth) {
      bufferC_.push_back(Entry{Key{std::string(k.row), std::string(k.col)},
                               std::string(value)});
      ++entriesWritten_;
    }
    if (cfg_.mode == TransposeMode::kCT) {
      bufferC_.push_back(Entry{Key{std::string(k.col), std::string(k.row)},
                               std::string(value)});
      ++entriesWritten_;
    }
    if (cfg_.mode == TransposeMode::kBoth) {
      bufferCT_.push_back(Entry{Key{std::string(k.col), std::string(k.row)},
                                std::string(value)});
      ++entriesWritten_;
    }
    handOffIfFull();
  } catch (const std::exception& e) {
    throw std::runtime_error("remote write aborted after " +
                             std::to_string(entriesWritten_) +
                             " entries: " + e.what());
  }
}

void RemoteWriteIterator::handOffIfFull() {
  constexpr std::size_t kBatch = 65536;
  if (bufferC_.size() >= kBatch) {
    target_->write(bufferC_);
    bufferC_.clear();
  }
  if (bufferCT_.size() >= kBatch) {
    transposeTarget_->write(bufferCT_);
    bufferCT_.clear();
  }
}

void RemoteWriteIterator::flushWriters() {
  if (!bufferC_.empty()) {
    target_->write(bufferC_);
    bufferC_.clear();
  }
  if (!bufferCT_.empty()) {
    transposeTarget_->write(bufferCT_);
    bufferCT_.clear();
  }
}

Entry RemoteWriteIterator::makeMonitor() const {
  return Entry{Key{source_->safeResumeRow().value_or(std::string{}),
                   std::string(kMonitorCol)},
               std::to_string(source_->processedCount())};
}

bool RemoteWriteIterator::hasTop() { return topMonitor_.has_value(); }

KeyView RemoteWriteIterator::topKey() const {
  return KeyView{topMonitor_->key.row, topMonitor_->key.col};
}

std::string_view RemoteWriteIterator::topValue() const {
  return topMonitor_->value;
}

void RemoteWriteIterator::next() {
  topMonitor_.reset();
  if (!finished_) drive();
}

// ---------------------------------------------------------------------------
// Stack assembly

namespace {

const std::set<std::string>& knownOptionKeys() {
  static const std::set<std::string> keys{
      "AT.table",     "B.table",          "B.rowSubset", "C.table",
      "C.transpose",  "C.transposeTable", "monitor.everyN",
      "semiring",     "mult.seekAlign",   "mult.rowCap",
  };
  return keys;
}

std::uint64_t parseUint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                 out);
  if (ec != std::errc{} || p != value.data() + value.size())
    throw std::invalid_argument("option " + key + ": not a count: '" + value +
                                "'");
  return out;
}

IteratorStack buildStackImpl(Store& store, const Options& options,
                             const std::optional<std::string>& afterRow) {
  for (const auto& [key, value] : options)
    if (!knownOptionKeys().count(key))
      throw std::invalid_argument("unknown iterator option: " + key);
  auto required = [&options](const std::string& key) -> const std::string& {
    auto it = options.find(key);
    if (it == options.end())
      throw std::invalid_argument("missing iterator option: " + key);
    return it->second;
  };
  auto optional = [&options](const std::string& key,
                             const std::string& dflt) -> std::string {
    auto it = options.find(key);
    return it == options.end() ? dflt : it->second;
  };

  const std::string& atName = required("AT.table");
  const std::string& bName = required("B.table");
  const std::string& cName = required("C.table");
  if (cName == atName || cName == bName)
    throw std::invalid_argument(
        "multiplying into an input table is unsupported");

  const Semiring& semiring =
      SemiringRegistry::get(optional("semiring", "plus-times"));

  std::string transpose = optional("C.transpose", "c");
  TransposeMode mode;
  if (transpose == "c")
    mode = TransposeMode::kC;
  else if (transpose == "ct")
    mode = TransposeMode::kCT;
  else if (transpose == "both")
    mode = TransposeMode::kBoth;
  else
    throw std::invalid_argument("option C.transpose: expected c|ct|both, got '" +
                                transpose + "'");

  RangeSet subset = RangeSet::parse(optional("B.rowSubset", ""));
  if (afterRow) subset = subset.intersect(RowRange::afterRow(*afterRow));

  TwoTableIterator::Config multCfg;
  multCfg.semiring = &semiring;
  std::string seekAlign = optional("mult.seekAlign", "false");
  if (seekAlign != "true" && seekAlign != "false")
    throw std::invalid_argument("option mult.seekAlign: expected true|false");
  multCfg.seekAlign = seekAlign == "true";
  if (options.count("mult.rowCap"))
    multCfg.rowCapEntries = parseUint("mult.rowCap", options.at("mult.rowCap"));

  RemoteWriteIterator::Config writeCfg;
  writeCfg.targetTable = cName;
  writeCfg.mode = mode;
  writeCfg.transposeTable = optional("C.transposeTable",
                                     mode == TransposeMode::kBoth
                                         ? cName + "T"
                                         : std::string{});
  if (options.count("monitor.everyN"))
    writeCfg.monitorEveryN =
        parseUint("monitor.everyN", options.at("monitor.everyN"));
  writeCfg.ranges = subset;

  auto srcAT = std::make_unique<RemoteSourceIterator>(store, atName, subset);
  auto srcB = std::make_unique<RemoteSourceIterator>(store, bName, subset);
  IteratorStack stack;
  stack.sourceAT = srcAT.get();
  stack.sourceB = srcB.get();
  auto mult = std::make_unique<TwoTableIterator>(std::move(srcAT),
                                                 std::move(srcB), multCfg);
  stack.mult = mult.get();
  stack.writer = std::make_unique<RemoteWriteIterator>(store, std::move(mult),
                                                       writeCfg);
  return stack;
}

}  // namespace

IteratorStack buildStack(Store& store, const Options& options) {
  return buildStackImpl(store, options, std::nullopt);
}

IteratorStack rebuildAndResume(Store& store, const Options& options,
                               const Key& lastMonitorKey) {
  if (lastMonitorKey.col != kMonitorCol)
    throw std::invalid_argument(
        "resume token is not a monitoring entry (col '" + lastMonitorKey.col +
        "')");
  std::optional<std::string> afterRow;
  if (!lastMonitorKey.row.empty()) afterRow = lastMonitorKey.row;
  return buildStackImpl(store, options, afterRow);
}

}  // namespace tablestore

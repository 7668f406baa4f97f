#include "tablestore/spgemm.hpp"

#include <chrono>
#include <exception>
#include <stdexcept>
#include <thread>

namespace tablestore {

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void requireCombiner(const Table& table, const Semiring& semiring) {
  const auto& cfg = table.config();
  if (!cfg.combiner || cfg.combiner->semiringName != semiring.name ||
      (cfg.combiner->scopes & kAllScopes) != kAllScopes)
    throw std::invalid_argument(
        "target table '" + table.name() + "' must have the '" +
        semiring.name +
        "' plus combiner installed at scan, flush and compact scopes");
}

void requireDistinctTarget(const std::string& target, const std::string& a,
                           const std::string& b) {
  if (target == a || target == b)
    throw std::invalid_argument(
        "multiplying into an input table is unsupported");
}

// Buffered writer for the client-style multiply drivers; hand-offs to the
// table are not counted as flushes.
class RowWriter {
 public:
  explicit RowWriter(std::shared_ptr<Table> table)
      : table_(std::move(table)) {}

  void add(std::string row, std::string col, std::string value) {
    buffer_.push_back(
        Entry{Key{std::move(row), std::move(col)}, std::move(value)});
    ++written_;
    if (buffer_.size() >= 65536) handOff();
  }
  void flush() {
    handOff();
    ++flushes_;
  }
  std::uint64_t written() const { return written_; }
  std::uint64_t flushes() const { return flushes_; }

 private:
  void handOff() {
    if (buffer_.empty()) return;
    table_->write(buffer_);
    buffer_.clear();
  }
  std::shared_ptr<Table> table_;
  std::vector<Entry> buffer_;
  std::uint64_t written_ = 0;
  std::uint64_t flushes_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Outer product via the iterator stack

MultiplyStats tableMult(Store& store, const std::string& atTable,
                        const std::string& bTable,
                        const std::string& targetTable,
                        const Semiring& semiring, MultOptions opts) {
  requireDistinctTarget(targetTable, atTable, bTable);
  auto target = store.get(targetTable);
  requireCombiner(*target, semiring);
  std::shared_ptr<Table> transposeTarget;
  std::string transposeName = opts.transposeTable.empty()
                                  ? targetTable + "T"
                                  : opts.transposeTable;
  if (opts.transpose == TransposeMode::kBoth) {
    transposeTarget = store.get(transposeName);
    requireCombiner(*transposeTarget, semiring);
  }

  Options stackOpts;
  stackOpts["AT.table"] = atTable;
  stackOpts["B.table"] = bTable;
  stackOpts["C.table"] = targetTable;
  stackOpts["semiring"] = semiring.name;
  if (!opts.bRowSubset.empty()) stackOpts["B.rowSubset"] = opts.bRowSubset;
  switch (opts.transpose) {
    case TransposeMode::kC:
      break;
    case TransposeMode::kCT:
      stackOpts["C.transpose"] = "ct";
      break;
    case TransposeMode::kBoth:
      stackOpts["C.transpose"] = "both";
      stackOpts["C.transposeTable"] = transposeName;
      break;
  }
  if (opts.monitorEveryN)
    stackOpts["monitor.everyN"] = std::to_string(*opts.monitorEveryN);
  if (opts.seekAlign) stackOpts["mult.seekAlign"] = "true";
  stackOpts["mult.rowCap"] = std::to_string(opts.rowCap);

  std::vector<RowRange> tablets = store.get(bTable)->tabletRanges();
  double maintenanceBefore = target->maintenanceSeconds() +
                             (transposeTarget
                                  ? transposeTarget->maintenanceSeconds()
                                  : 0.0);
  auto start = Clock::now();

  // One multiply stack per tablet of B, run concurrently.
  std::vector<MultiplyStats> perTablet(tablets.size());
  std::vector<std::exception_ptr> errors(tablets.size());
  auto runTablet = [&](std::size_t idx) {
    try {
      IteratorStack stack = buildStack(store, stackOpts);
      stack.writer->seek(SeekRange{tablets[idx], {}});
      while (stack.writer->hasTop()) stack.writer->next();
      MultiplyStats& s = perTablet[idx];
      s.partialProducts = stack.mult->partialProducts();
      s.entriesReadA = stack.mult->entriesReadA();
      s.entriesReadB = stack.mult->entriesReadB();
      s.entriesWrittenC = stack.writer->entriesWritten();
      s.flushCount = stack.writer->flushCount();
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };
  if (tablets.size() == 1) {
    runTablet(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(tablets.size());
    for (std::size_t i = 0; i < tablets.size(); ++i)
      threads.emplace_back(runTablet, i);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  MultiplyStats stats;
  for (const MultiplyStats& s : perTablet) stats += s;
  stats.passesOverB = 1;
  stats.elapsedSeconds = secondsSince(start);
  stats.maintenanceSeconds =
      target->maintenanceSeconds() +
      (transposeTarget ? transposeTarget->maintenanceSeconds() : 0.0) -
      maintenanceBefore;
  return stats;
}

// ---------------------------------------------------------------------------
// Inner product

MultiplyStats innerProductMult(Store& store, const std::string& aTable,
                               const std::string& bTable,
                               const std::string& targetTable,
                               const Semiring& semiring) {
  requireDistinctTarget(targetTable, aTable, bTable);
  auto target = store.get(targetTable);
  requireCombiner(*target, semiring);
  auto a = store.get(aTable);
  auto b = store.get(bTable);

  MultiplyStats stats;
  auto start = Clock::now();
  TableSnapshot bSnap = b->snapshot();
  RowWriter writer(target);

  TableScanner aScan(a->snapshot(), RangeSet{});
  aScan.seek(RowRange::all());
  while (aScan.hasTop()) {
    // Gather one row of A.
    std::string rowI(aScan.topKey().row);
    std::map<std::string, std::string, std::less<>> rowA;
    while (aScan.hasTop() && aScan.topKey().row == rowI) {
      rowA.emplace(std::string(aScan.topKey().col),
                   std::string(aScan.topValue()));
      ++stats.entriesReadA;
      aScan.next();
    }

    // One full pass over B, pre-summing this row of the result.
    ++stats.passesOverB;
    std::map<std::string, std::string> acc;
    TableScanner bScan(bSnap, RangeSet{});
    bScan.seek(RowRange::all());
    while (bScan.hasTop()) {
      ++stats.entriesReadB;
      auto it = rowA.find(bScan.topKey().row);
      if (it != rowA.end()) {
        ++stats.partialProducts;
        std::string product = semiring.times(it->second, bScan.topValue());
        if (!semiring.isZero(product)) {
          std::string colJ(bScan.topKey().col);
          auto [accIt, inserted] = acc.try_emplace(std::move(colJ), product);
          if (!inserted)
            accIt->second = semiring.plus(accIt->second, product);
        }
      }
      bScan.next();
    }
    for (auto& [colJ, value] : acc) {
      if (semiring.isZero(value)) continue;
      writer.add(rowI, colJ, std::move(value));
    }
  }
  writer.flush();
  stats.entriesWrittenC = writer.written();
  stats.flushCount = writer.flushes();
  stats.elapsedSeconds = secondsSince(start);
  stats.maintenanceSeconds = 0;
  return stats;
}

// ---------------------------------------------------------------------------
// Hybrid

MultiplyStats hybridMult(Store& store, const std::string& aTable,
                         const std::string& bTable,
                         const std::string& targetTable,
                         const Semiring& semiring, std::uint64_t partitions,
                         HybridOptions opts) {
  requireDistinctTarget(targetTable, aTable, bTable);
  auto target = store.get(targetTable);
  requireCombiner(*target, semiring);
  auto a = store.get(aTable);
  auto b = store.get(bTable);

  // Distinct rows of A in sorted order; the paper-style integer index i
  // maps to the rank of a row key here.
  std::vector<std::string> rows;
  a->visitScan([&rows](const EntryView& e) {
    if (rows.empty() || rows.back() != e.row) rows.emplace_back(e.row);
  });
  const std::uint64_t n = rows.size();
  if (partitions < 1 || partitions > n)
    throw std::invalid_argument("hybrid multiply: partition count " +
                                std::to_string(partitions) +
                                " out of range [1, " + std::to_string(n) +
                                "]");

  MultiplyStats stats;
  auto start = Clock::now();
  TableSnapshot aSnap = a->snapshot();
  TableSnapshot bSnap = b->snapshot();
  RowWriter writer(target);

  for (std::uint64_t p = 1; p <= partitions; ++p) {
    const std::uint64_t lo = (p - 1) * n / partitions;  // exclusive rank
    const std::uint64_t hi = p * n / partitions;        // inclusive rank
    if (lo == hi) continue;
    RangeSet window(std::vector<RowRange>{
        RowRange{rows[lo], true, rows[hi - 1], true}});

    // Column index of this partition of A: k -> [(i, value)], i ascending.
    std::map<std::string, std::vector<std::pair<std::string, std::string>>,
             std::less<>>
        colIndex;
    TableScanner aScan(aSnap, window);
    aScan.seek(RowRange::all());
    while (aScan.hasTop()) {
      colIndex[std::string(aScan.topKey().col)].emplace_back(
          std::string(aScan.topKey().row), std::string(aScan.topValue()));
      ++stats.entriesReadA;
      aScan.next();
    }

    // One pass over B for this partition.
    ++stats.passesOverB;
    std::map<Key, std::string> acc;
    auto spill = [&] {
      for (auto& [key, value] : acc) {
        if (semiring.isZero(value)) continue;
        writer.add(key.row, key.col, std::move(value));
      }
      acc.clear();
    };
    TableScanner bScan(bSnap, RangeSet{});
    bScan.seek(RowRange::all());
    while (bScan.hasTop()) {
      // Gather one row of B.
      std::string rowK(bScan.topKey().row);
      std::vector<std::pair<std::string, std::string>> rowB;
      while (bScan.hasTop() && bScan.topKey().row == rowK) {
        rowB.emplace_back(std::string(bScan.topKey().col),
                          std::string(bScan.topValue()));
        ++stats.entriesReadB;
        bScan.next();
      }
      auto it = colIndex.find(rowK);
      if (it == colIndex.end()) continue;
      for (const auto& [i, av] : it->second) {
        for (const auto& [j, bv] : rowB) {
          ++stats.partialProducts;
          std::string product = semiring.times(av, bv);
          if (semiring.isZero(product)) continue;
          if (opts.presumCap == 0) {
            writer.add(i, j, std::move(product));
            continue;
          }
          auto [accIt, inserted] = acc.try_emplace(Key{i, j}, product);
          if (!inserted)
            accIt->second = semiring.plus(accIt->second, product);
          if (acc.size() > opts.presumCap) spill();
        }
      }
    }
    spill();
  }
  writer.flush();
  stats.entriesWrittenC = writer.written();
  stats.flushCount = writer.flushes();
  stats.elapsedSeconds = secondsSince(start);
  return stats;
}

// ---------------------------------------------------------------------------
// Oracle and counters

std::map<Key, std::string> denseOracle(const std::vector<Entry>& entriesA,
                                       const std::vector<Entry>& entriesB,
                                       const Semiring& semiring) {
  std::map<std::string, std::map<std::string, std::string>> matA, matB;
  for (const Entry& e : entriesA)
    if (!semiring.isZero(e.value)) matA[e.key.row][e.key.col] = e.value;
  for (const Entry& e : entriesB)
    if (!semiring.isZero(e.value)) matB[e.key.row][e.key.col] = e.value;

  std::map<Key, std::string> result;
  for (const auto& [i, rowA] : matA) {
    for (const auto& [k, av] : rowA) {
      auto bIt = matB.find(k);
      if (bIt == matB.end()) continue;
      for (const auto& [j, bv] : bIt->second) {
        std::string product = semiring.times(av, bv);
        Key key{i, j};
        auto [it, inserted] = result.emplace(key, product);
        if (!inserted) it->second = semiring.plus(it->second, product);
      }
    }
  }
  for (auto it = result.begin(); it != result.end();) {
    if (semiring.isZero(it->second))
      it = result.erase(it);
    else
      ++it;
  }
  return result;
}

std::uint64_t countPartialProducts(Store& store, const std::string& atTable,
                                   const std::string& bTable) {
  std::map<std::string, std::uint64_t> rowsAT, rowsB;
  store.get(atTable)->visitScan(
      [&rowsAT](const EntryView& e) { ++rowsAT[std::string(e.row)]; });
  store.get(bTable)->visitScan(
      [&rowsB](const EntryView& e) { ++rowsB[std::string(e.row)]; });
  std::uint64_t total = 0;
  for (const auto& [row, countAT] : rowsAT) {
    auto it = rowsB.find(row);
    if (it != rowsB.end()) total += countAT * it->second;
  }
  return total;
}

}  // namespace tablestore

#include "tablestore/kvstore.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace tablestore {

// ---------------------------------------------------------------------------
// Run

EntryView Run::at(std::size_t i) const {
  const Slot& s = slots_[i];
  const char* base = pool_.data() + s.off;
  return EntryView{
      std::string_view(base, s.rowLen),
      std::string_view(base + s.rowLen, s.colLen),
      std::string_view(base + s.rowLen + s.colLen, s.valLen),
  };
}

std::size_t Run::lowerBound(const KeyView& k) const {
  std::size_t lo = 0, hi = slots_.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (at(mid).key() < k)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

std::size_t Run::upperBound(const KeyView& k) const {
  std::size_t lo = 0, hi = slots_.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (at(mid).key() <= k)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

std::size_t Run::lowerBoundRow(std::string_view row) const {
  std::size_t lo = 0, hi = slots_.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (at(mid).row < row)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

std::size_t Run::upperBoundRow(std::string_view row) const {
  std::size_t lo = 0, hi = slots_.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (at(mid).row <= row)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

void Run::Builder::append(std::string_view row, std::string_view col,
                          std::string_view value) {
  Run& r = *run_;
  Slot s;
  s.off = r.pool_.size();
  s.rowLen = static_cast<std::uint32_t>(row.size());
  s.colLen = static_cast<std::uint32_t>(col.size());
  s.valLen = static_cast<std::uint32_t>(value.size());
  r.pool_.insert(r.pool_.end(), row.begin(), row.end());
  r.pool_.insert(r.pool_.end(), col.begin(), col.end());
  r.pool_.insert(r.pool_.end(), value.begin(), value.end());
  r.slots_.push_back(s);
}

std::shared_ptr<const Run> Run::Builder::build() {
  run_->pool_.shrink_to_fit();
  run_->slots_.shrink_to_fit();
  return std::move(run_);
}

// ---------------------------------------------------------------------------
// Run merging (used by compaction)

namespace {

enum class MergeMode { kFold, kNewestWins, kKeepAllOldestFirst };

RunPtr mergeRuns(const std::vector<RunPtr>& runs, MergeMode mode,
                 const Semiring* combiner) {
  struct Cur {
    const Run* run;
    std::size_t pos;
    int priority;
  };
  std::vector<Cur> curs;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i]->size() > 0)
      curs.push_back({runs[i].get(), 0, static_cast<int>(i)});

  auto less = [](const Cur& a, const Cur& b) {
    auto ka = a.run->at(a.pos).key();
    auto kb = b.run->at(b.pos).key();
    if (ka != kb) return ka < kb;
    return a.priority > b.priority;  // newest first on ties
  };

  Run::Builder out;
  while (!curs.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < curs.size(); ++i)
      if (less(curs[i], curs[best])) best = i;
    EntryView top = curs[best].run->at(curs[best].pos);
    Key key{std::string(top.row), std::string(top.col)};

    // Gather the whole equal-key group: (value, priority, pos) tuples.
    struct Member {
      std::string value;
      int priority;
      std::size_t pos;
    };
    std::vector<Member> group;
    auto popMatching = [&] {
      for (std::size_t i = 0; i < curs.size();) {
        EntryView e = curs[i].run->at(curs[i].pos);
        if (e.row == key.row && e.col == key.col) {
          group.push_back(
              {std::string(e.value), curs[i].priority, curs[i].pos});
          if (++curs[i].pos >= curs[i].run->size())
            curs.erase(curs.begin() + i);
          // Re-check same index: the cursor may expose another duplicate.
        } else {
          ++i;
        }
      }
    };
    // Cursors only advance one entry per pass over the key; loop until no
    // cursor tops the same key.
    std::size_t before;
    do {
      before = group.size();
      popMatching();
    } while (group.size() != before);

    std::sort(group.begin(), group.end(), [](const Member& a,
                                             const Member& b) {
      if (a.priority != b.priority) return a.priority < b.priority;
      return a.pos < b.pos;  // oldest first
    });

    switch (mode) {
      case MergeMode::kFold: {
        std::string acc = group.front().value;
        for (std::size_t i = 1; i < group.size(); ++i)
          acc = combiner->plus(acc, group[i].value);
        out.append(key.row, key.col, acc);
        break;
      }
      case MergeMode::kNewestWins:
        out.append(key.row, key.col, group.back().value);
        break;
      case MergeMode::kKeepAllOldestFirst:
        for (const Member& m : group) out.append(key.row, key.col, m.value);
        break;
    }
  }
  return out.build();
}

}  // namespace

// ---------------------------------------------------------------------------
// TableScanner

TableScanner::TableScanner(TableSnapshot snapshot, RangeSet domain)
    : snap_(std::move(snapshot)), domain_(std::move(domain)) {}

void TableScanner::seek(const RowRange& rows,
                        const std::optional<Key>& startAfter) {
  active_ = domain_.intersect(rows);
  rangeIdx_ = 0;
  cursors_.clear();
  for (const TabletSnapshot& t : snap_.tablets) {
    for (std::size_t i = 0; i < t.runs.size(); ++i)
      cursors_.push_back({t.runs[i], 0, static_cast<int>(i)});
  }
  positionAtRange(startAfter);
  advance();
}

void TableScanner::seekCursors(std::string_view row, bool inclusive,
                               const std::optional<Key>& startAfter) {
  for (Cursor& c : cursors_) {
    std::size_t p =
        inclusive ? c.run->lowerBoundRow(row) : c.run->upperBoundRow(row);
    if (startAfter) {
      std::size_t q = c.run->upperBound(
          KeyView{startAfter->row, startAfter->col});
      p = std::max(p, q);
    }
    c.pos = p;
  }
  heapInit();
}

void TableScanner::positionAtRange(const std::optional<Key>& startAfter) {
  if (rangeIdx_ >= active_.ranges().size()) {
    heap_.clear();
    return;
  }
  const RowRange& r = active_.ranges()[rangeIdx_];
  if (r.low)
    seekCursors(*r.low, r.lowInclusive, startAfter);
  else if (startAfter)
    seekCursors("", true, startAfter);
  else {
    for (Cursor& c : cursors_) c.pos = 0;
    heapInit();
  }
}

bool TableScanner::heapLess(std::size_t a, std::size_t b) const {
  const Cursor& ca = cursors_[a];
  const Cursor& cb = cursors_[b];
  auto ka = ca.run->at(ca.pos).key();
  auto kb = cb.run->at(cb.pos).key();
  if (ka != kb) return ka < kb;
  if (ca.priority != cb.priority) return ca.priority > cb.priority;
  return a < b;
}

void TableScanner::heapInit() {
  heap_.clear();
  for (std::size_t i = 0; i < cursors_.size(); ++i)
    if (cursors_[i].pos < cursors_[i].run->size()) heap_.push_back(i);
  if (heap_.empty()) return;
  for (std::size_t i = heap_.size(); i-- > 0;) heapSiftDown(i);
}

void TableScanner::heapSiftDown(std::size_t i) {
  const std::size_t n = heap_.size();
  while (true) {
    std::size_t l = 2 * i + 1, r = 2 * i + 2, m = i;
    if (l < n && heapLess(heap_[l], heap_[m])) m = l;
    if (r < n && heapLess(heap_[r], heap_[m])) m = r;
    if (m == i) return;
    std::swap(heap_[i], heap_[m]);
    i = m;
  }
}

EntryView TableScanner::rawTop() const {
  const Cursor& c = cursors_[heap_.front()];
  return c.run->at(c.pos);
}

void TableScanner::rawPop() {
  ++stats_.entriesRead;
  Cursor& c = cursors_[heap_.front()];
  if (++c.pos >= c.run->size()) {
    heap_.front() = heap_.back();
    heap_.pop_back();
  }
  if (!heap_.empty()) heapSiftDown(0);
}

void TableScanner::advance() {
  topValid_ = false;
  while (true) {
    if (rangeIdx_ >= active_.ranges().size()) return;
    if (rawEmpty()) return;
    EntryView top = rawTop();
    const RowRange* r = &active_.ranges()[rangeIdx_];
    if (r->pastHigh(top.row)) {
      ++rangeIdx_;
      positionAtRange(std::nullopt);
      continue;
    }
    if (r->beforeLow(top.row)) {
      seekCursors(*r->low, r->lowInclusive, std::nullopt);
      continue;
    }

    // Collapse the equal-key group.
    topKey_ = Key{std::string(top.row), std::string(top.col)};
    if (snap_.scanCombiner) {
      std::string acc(top.value);
      rawPop();
      while (!rawEmpty()) {
        EntryView e = rawTop();
        if (e.row != topKey_.row || e.col != topKey_.col) break;
        acc = snap_.scanCombiner->plus(acc, e.value);
        rawPop();
      }
      // A group that folds to the additive identity is not a nonzero of
      // the table: it never leaves the scan.
      if (snap_.scanCombiner->isZero(acc)) continue;
      topValue_ = std::move(acc);
    } else {
      // Newest wins: max (priority, pos) in the group.
      const Cursor& c0 = cursors_[heap_.front()];
      int bestPriority = c0.priority;
      std::size_t bestPos = c0.pos;
      std::string bestValue(top.value);
      rawPop();
      while (!rawEmpty()) {
        EntryView e = rawTop();
        if (e.row != topKey_.row || e.col != topKey_.col) break;
        const Cursor& c = cursors_[heap_.front()];
        if (c.priority > bestPriority ||
            (c.priority == bestPriority && c.pos > bestPos)) {
          bestPriority = c.priority;
          bestPos = c.pos;
          bestValue.assign(e.value);
        }
        rawPop();
      }
      topValue_ = std::move(bestValue);
    }
    topValid_ = true;
    return;
  }
}

bool TableScanner::hasTop() { return topValid_; }

KeyView TableScanner::topKey() const {
  return KeyView{topKey_.row, topKey_.col};
}

std::string_view TableScanner::topValue() const { return topValue_; }

void TableScanner::next() { advance(); }

// ---------------------------------------------------------------------------
// Table

Table::Table(TableConfig config, const Semiring* combinerSemiring)
    : config_(std::move(config)), combiner_(combinerSemiring) {
  if (!std::is_sorted(config_.splits.begin(), config_.splits.end()) ||
      std::adjacent_find(config_.splits.begin(), config_.splits.end()) !=
          config_.splits.end())
    throw std::invalid_argument("table '" + config_.name +
                                "': splits must be strictly increasing");
  eager_ = combiner_ && config_.combiner &&
           (config_.combiner->scopes & kAllScopes) == kAllScopes;
  std::optional<std::string> prev;
  for (std::size_t i = 0; i <= config_.splits.size(); ++i) {
    auto t = std::make_unique<Tablet>();
    t->lowExclusive = prev;
    if (i < config_.splits.size()) {
      t->highInclusive = config_.splits[i];
      prev = config_.splits[i];
    }
    tablets_.push_back(std::move(t));
  }
}

std::size_t Table::tabletIndexFor(std::string_view row) const {
  const auto& s = config_.splits;
  return static_cast<std::size_t>(
      std::lower_bound(s.begin(), s.end(), row) - s.begin());
}

WriteStats Table::write(std::span<const Entry> entries) {
  if (dropped_.load())
    throw std::runtime_error("write to dropped table '" + config_.name + "'");
  WriteStats stats;
  std::shared_lock structLock(structMu_);
  // Bucket by tablet so each tablet is locked once per batch.
  std::vector<std::vector<const Entry*>> buckets(tablets_.size());
  for (const Entry& e : entries)
    buckets[tabletIndexFor(e.key.row)].push_back(&e);
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (buckets[i].empty()) continue;
    Tablet& t = *tablets_[i];
    std::lock_guard lock(t.mu);
    for (const Entry* e : buckets[i]) {
      if (eager_) {
        auto [it, inserted] = t.acc.try_emplace(e->key, e->value);
        if (!inserted) it->second = combiner_->plus(it->second, e->value);
        t.memEntries = t.acc.size();
      } else {
        t.mem[e->key].push_back(e->value);
        ++t.memEntries;
      }
      ++stats.entriesWritten;
    }
    stats.flushes += maybeMaintainLocked(t);
  }
  return stats;
}

std::uint64_t Table::maybeMaintainLocked(Tablet& t) {
  std::uint64_t flushes = 0;
  if (t.memEntries > config_.autoFlushEntries) {
    auto start = std::chrono::steady_clock::now();
    flushTabletLocked(t);
    ++flushes;
    if (t.runs.size() >= config_.autoCompactRuns) compactTabletLocked(t);
    auto elapsed = std::chrono::steady_clock::now() - start;
    maintenanceNanos_ += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed)
            .count());
  }
  return flushes;
}

RunPtr Table::materializeMem(Tablet& t) const {
  Run::Builder b;
  if (eager_) {
    std::vector<const std::pair<const Key, std::string>*> items;
    items.reserve(t.acc.size());
    for (const auto& kv : t.acc) items.push_back(&kv);
    std::sort(items.begin(), items.end(),
              [](auto* a, auto* b) { return a->first < b->first; });
    for (auto* kv : items)
      b.append(kv->first.row, kv->first.col, kv->second);
  } else {
    for (const auto& [key, values] : t.mem)
      for (const std::string& v : values) b.append(key.row, key.col, v);
  }
  return b.build();
}

void Table::flushTabletLocked(Tablet& t) {
  if (t.memEntries == 0) return;
  if (eager_) {
    t.runs.push_back(materializeMem(t));
    t.acc.clear();
  } else {
    Run::Builder b;
    for (const auto& [key, values] : t.mem) {
      if (combinerInScope(kFlushScope)) {
        std::string acc = values.front();
        for (std::size_t i = 1; i < values.size(); ++i)
          acc = combiner_->plus(acc, values[i]);
        b.append(key.row, key.col, acc);
      } else if (!combiner_) {
        b.append(key.row, key.col, values.back());
      } else {
        // Combiner exists but not at flush scope: preserve duplicates,
        // oldest first, for a later scope to collapse.
        for (const std::string& v : values) b.append(key.row, key.col, v);
      }
    }
    t.runs.push_back(b.build());
    t.mem.clear();
  }
  t.memEntries = 0;
}

void Table::compactTabletLocked(Tablet& t) {
  flushTabletLocked(t);
  if (t.runs.empty()) return;
  MergeMode mode;
  if (combinerInScope(kCompactScope))
    mode = MergeMode::kFold;
  else if (!combiner_)
    mode = MergeMode::kNewestWins;
  else
    mode = MergeMode::kKeepAllOldestFirst;
  RunPtr merged = mergeRuns(t.runs, mode, combiner_);
  t.runs.clear();
  if (merged->size() > 0) t.runs.push_back(std::move(merged));
}

void Table::flush() {
  std::shared_lock structLock(structMu_);
  for (auto& t : tablets_) {
    std::lock_guard lock(t->mu);
    flushTabletLocked(*t);
  }
}

void Table::compact() {
  std::shared_lock structLock(structMu_);
  for (auto& t : tablets_) {
    std::lock_guard lock(t->mu);
    compactTabletLocked(*t);
  }
}

void Table::addSplit(const std::string& splitRow) {
  std::unique_lock structLock(structMu_);
  if (std::binary_search(config_.splits.begin(), config_.splits.end(),
                         splitRow))
    throw std::invalid_argument("split already present: " + splitRow);
  std::size_t idx = tabletIndexFor(splitRow);
  Tablet& old = *tablets_[idx];
  std::lock_guard lock(old.mu);

  auto left = std::make_unique<Tablet>();
  auto right = std::make_unique<Tablet>();
  left->lowExclusive = old.lowExclusive;
  left->highInclusive = splitRow;
  right->lowExclusive = splitRow;
  right->highInclusive = old.highInclusive;

  for (const RunPtr& run : old.runs) {
    std::size_t cut = run->upperBoundRow(splitRow);
    Run::Builder lb, rb;
    for (std::size_t i = 0; i < cut; ++i) {
      EntryView e = run->at(i);
      lb.append(e.row, e.col, e.value);
    }
    for (std::size_t i = cut; i < run->size(); ++i) {
      EntryView e = run->at(i);
      rb.append(e.row, e.col, e.value);
    }
    if (lb.size() > 0) left->runs.push_back(lb.build());
    if (rb.size() > 0) right->runs.push_back(rb.build());
  }
  if (eager_) {
    for (auto& [key, value] : old.acc)
      (key.row <= splitRow ? left : right)->acc.emplace(key, value);
    left->memEntries = left->acc.size();
    right->memEntries = right->acc.size();
  } else {
    for (auto& [key, values] : old.mem) {
      auto& dst = key.row <= splitRow ? left : right;
      dst->memEntries += values.size();
      dst->mem.emplace(key, values);
    }
  }

  tablets_[idx] = std::move(left);
  tablets_.insert(tablets_.begin() + static_cast<std::ptrdiff_t>(idx) + 1,
                  std::move(right));
  config_.splits.insert(
      std::lower_bound(config_.splits.begin(), config_.splits.end(),
                       splitRow),
      splitRow);
}

std::size_t Table::tabletCount() const {
  std::shared_lock lock(structMu_);
  return tablets_.size();
}

std::vector<RowRange> Table::tabletRanges() const {
  std::shared_lock lock(structMu_);
  std::vector<RowRange> out;
  for (const auto& t : tablets_) {
    RowRange r;
    if (t->lowExclusive) {
      r.low = t->lowExclusive;
      r.lowInclusive = false;
    }
    if (t->highInclusive) {
      r.high = t->highInclusive;
      r.highInclusive = true;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::uint64_t> Table::tabletRawCounts() const {
  std::shared_lock lock(structMu_);
  std::vector<std::uint64_t> out;
  for (const auto& t : tablets_) {
    std::lock_guard tlock(t->mu);
    std::uint64_t n = t->memEntries;
    for (const RunPtr& r : t->runs) n += r->size();
    out.push_back(n);
  }
  return out;
}

TableSnapshot Table::snapshot() const {
  std::shared_lock lock(structMu_);
  TableSnapshot snap;
  snap.scanCombiner = combinerInScope(kScanScope) ? combiner_ : nullptr;
  for (const auto& t : tablets_) {
    std::lock_guard tlock(t->mu);
    TabletSnapshot ts;
    ts.runs = t->runs;
    if (t->memEntries > 0) ts.runs.push_back(materializeMem(*t));
    snap.tablets.push_back(std::move(ts));
  }
  return snap;
}

std::vector<Entry> Table::scanAll(const RangeSet& domain) const {
  std::vector<Entry> out;
  TableScanner sc(snapshot(), domain);
  sc.seek(RowRange::all());
  while (sc.hasTop()) {
    out.push_back(Entry{sc.topKey().owned(), std::string(sc.topValue())});
    sc.next();
  }
  return out;
}

void Table::visitScan(const std::function<void(const EntryView&)>& fn,
                      const RangeSet& domain) const {
  TableScanner sc(snapshot(), domain);
  sc.seek(RowRange::all());
  while (sc.hasTop()) {
    KeyView k = sc.topKey();
    fn(EntryView{k.row, k.col, sc.topValue()});
    sc.next();
  }
}

std::uint64_t Table::countEntries() const {
  std::uint64_t n = 0;
  TableScanner sc(snapshot(), RangeSet{});
  sc.seek(RowRange::all());
  while (sc.hasTop()) {
    ++n;
    sc.next();
  }
  return n;
}

double Table::maintenanceSeconds() const {
  return static_cast<double>(maintenanceNanos_.load()) * 1e-9;
}

void Table::markDropped() { dropped_.store(true); }

bool Table::dropped() const { return dropped_.load(); }

// ---------------------------------------------------------------------------
// Store

std::shared_ptr<Table> Store::createTable(TableConfig config) {
  const Semiring* combiner = nullptr;
  if (config.combiner)
    combiner = &SemiringRegistry::get(config.combiner->semiringName);
  std::lock_guard lock(mu_);
  if (tables_.count(config.name))
    throw std::invalid_argument("table already exists: " + config.name);
  auto name = config.name;
  auto table = std::make_shared<Table>(std::move(config), combiner);
  tables_.emplace(std::move(name), table);
  return table;
}

std::shared_ptr<Table> Store::get(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw std::out_of_range("unknown table: " + name);
  return it->second;
}

bool Store::has(const std::string& name) const {
  std::lock_guard lock(mu_);
  return tables_.count(name) > 0;
}

void Store::drop(const std::string& name) {
  std::lock_guard lock(mu_);
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw std::out_of_range("unknown table: " + name);
  it->second->markDropped();
  tables_.erase(it);
}

// ---------------------------------------------------------------------------
// Dump / load

void dumpTable(const Table& table, std::ostream& out) {
  table.visitScan([&out](const EntryView& e) {
    out.write(e.row.data(), static_cast<std::streamsize>(e.row.size()));
    out.put('\t');
    out.write(e.col.data(), static_cast<std::streamsize>(e.col.size()));
    out.put('\t');
    out.write(e.value.data(), static_cast<std::streamsize>(e.value.size()));
    out.put('\n');
  });
}

WriteStats loadTable(Table& table, std::istream& in) {
  WriteStats total;
  std::vector<Entry> batch;
  std::string line;
  std::size_t lineNo = 0;
  auto flushBatch = [&] {
    WriteStats s = table.write(batch);
    total.entriesWritten += s.entriesWritten;
    total.flushes += s.flushes;
    batch.clear();
  };
  while (std::getline(in, line)) {
    ++lineNo;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw std::invalid_argument("load: malformed line " +
                                  std::to_string(lineNo));
    batch.push_back(Entry{Key{line.substr(0, t1),
                              line.substr(t1 + 1, t2 - t1 - 1)},
                          line.substr(t2 + 1)});
    if (batch.size() >= 65536) flushBatch();
  }
  flushBatch();
  return total;
}

}  // namespace tablestore

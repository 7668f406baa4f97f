#include "tablestore/graphgen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tablestore {

std::vector<std::pair<std::uint64_t, std::uint64_t>> generateEdges(
    const GenSpec& spec) {
  if (spec.scale < 1) throw std::invalid_argument("generator: scale must be >= 1");
  // Standard Kronecker quadrant probabilities (a, b, c; d is the rest).
  constexpr double kA = 0.57, kB = 0.19, kC = 0.19;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const std::uint64_t edgeCount = spec.edgesPerVertex
                                  << spec.scale;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  edges.reserve(edgeCount);
  for (std::uint64_t e = 0; e < edgeCount; ++e) {
    std::uint64_t u = 0, v = 0;
    for (std::uint32_t level = 0; level < spec.scale; ++level) {
      double x = uniform(rng);
      int quadrant = x < kA ? 0 : x < kA + kB ? 1 : x < kA + kB + kC ? 2 : 3;
      u = (u << 1) | static_cast<std::uint64_t>(quadrant >> 1);
      v = (v << 1) | static_cast<std::uint64_t>(quadrant & 1);
    }
    edges.emplace_back(u, v);
  }
  return edges;
}

int vertexKeyWidth(std::uint32_t scale) {
  return static_cast<int>(std::ceil(scale * std::log10(2.0))) + 1;
}

std::string vertexKey(std::uint64_t v, int width) {
  std::string digits = std::to_string(v);
  if (digits.size() < static_cast<std::size_t>(width))
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return digits;
}

IngestResult ingestAdjacency(
    Store& store,
    std::span<const std::pair<std::uint64_t, std::uint64_t>> edges,
    const std::string& tableName, bool alsoTranspose, std::uint32_t scale) {
  CombinerSpec sum{"plus-times", kAllScopes};
  IngestResult result;
  result.table =
      store.createTable(TableConfig{tableName, {}, sum});
  if (alsoTranspose)
    result.transpose =
        store.createTable(TableConfig{tableName + "T", {}, sum});

  const int width = vertexKeyWidth(scale);
  std::vector<Entry> batch, batchT;
  batch.reserve(65536);
  auto flush = [&] {
    if (!batch.empty()) {
      result.table->write(batch);
      batch.clear();
    }
    if (!batchT.empty()) {
      result.transpose->write(batchT);
      batchT.clear();
    }
  };
  for (const auto& [u, v] : edges) {
    std::string ru = vertexKey(u, width);
    std::string rv = vertexKey(v, width);
    batch.push_back(Entry{Key{ru, rv}, "1"});
    if (alsoTranspose) batchT.push_back(Entry{Key{std::move(rv), std::move(ru)}, "1"});
    if (batch.size() >= 65536) flush();
  }
  flush();
  return result;
}

std::string findEvenSplit(const Table& table) {
  // Entry counts per row, pre-combining irrelevant here: counts come
  // from the combined scan view.
  std::vector<std::pair<std::string, std::uint64_t>> rowCounts;
  table.visitScan([&rowCounts](const EntryView& e) {
    if (rowCounts.empty() || rowCounts.back().first != e.row)
      rowCounts.emplace_back(std::string(e.row), 0);
    ++rowCounts.back().second;
  });
  if (rowCounts.size() < 2)
    throw std::invalid_argument("no even split exists for table '" +
                                table.name() + "'");
  std::uint64_t total = 0;
  for (const auto& [row, n] : rowCounts) total += n;

  // Minimize the tablet imbalance over all candidate split rows (the
  // last row is excluded so both tablets stay non-empty).
  std::uint64_t prefix = 0;
  std::uint64_t bestImbalance = total + 1;
  std::string bestRow;
  for (std::size_t i = 0; i + 1 < rowCounts.size(); ++i) {
    prefix += rowCounts[i].second;
    std::uint64_t left = prefix;
    std::uint64_t right = total - prefix;
    std::uint64_t imbalance = left > right ? left - right : right - left;
    if (imbalance < bestImbalance) {
      bestImbalance = imbalance;
      bestRow = rowCounts[i].first;
    }
  }
  return bestRow;
}

}  // namespace tablestore

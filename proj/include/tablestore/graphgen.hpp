#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tablestore/kvstore.hpp"

namespace tablestore {

// Unpermuted power-law random graph: 2^scale vertices,
// edgesPerVertex * 2^scale edge insertions. With no vertex permutation,
// vertex 0 carries the highest degree and degree decays with index.
struct GenSpec {
  std::uint32_t scale = 10;
  std::uint64_t edgesPerVertex = 16;
  std::uint64_t seed = 0;
};

// Deterministic for a fixed spec. Self-loops and duplicate edges are
// kept; duplicates later accumulate as multiplicities.
std::vector<std::pair<std::uint64_t, std::uint64_t>> generateEdges(
    const GenSpec& spec);

// Zero-padded decimal row keys, so lexicographic order equals numeric
// vertex order. Width is ceil(scale*log10(2)) + 1.
int vertexKeyWidth(std::uint32_t scale);
std::string vertexKey(std::uint64_t v, int width);

struct IngestResult {
  std::shared_ptr<Table> table;
  std::shared_ptr<Table> transpose;  // null unless requested
};

// Creates the adjacency table (and optionally its transpose, suffixed
// "T") with a sum combiner at all scopes and writes one count-1 entry
// per edge; duplicate edges sum.
IngestResult ingestAdjacency(
    Store& store, std::span<const std::pair<std::uint64_t, std::uint64_t>> edges,
    const std::string& tableName, bool alsoTranspose, std::uint32_t scale);

// The split row that most evenly divides the table's entries into two
// tablets. Throws when no split exists (fewer than two distinct rows).
std::string findEvenSplit(const Table& table);

}  // namespace tablestore

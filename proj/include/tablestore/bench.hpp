#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tablestore/kvstore.hpp"

namespace tablestore {

enum class Method { kOuter, kInner, kHybrid };

std::string methodName(Method m);
Method parseMethod(const std::string& name);

struct ExperimentSpec {
  std::vector<std::uint32_t> scales;
  int tablets = 1;  // 1 or 2
  Method method = Method::kOuter;
  std::uint64_t p = 1;  // hybrid partitions
  std::uint64_t seedA = 1;
  std::uint64_t seedB = 2;
  std::uint64_t edgesPerVertex = 16;
  std::optional<std::uint64_t> monitorEveryN = std::uint64_t{1} << 16;
  std::uint64_t presumCap = std::uint64_t{1} << 20;
  bool withOracle = false;  // verify the result against the reference product
};

struct ResultRow {
  std::uint32_t scale = 0;
  int tablets = 1;
  std::string method;
  std::uint64_t p = 1;
  std::uint64_t partialProducts = 0;
  std::uint64_t afterSum = 0;
  double elapsedSeconds = 0;
  double ratePps = 0;
  std::uint64_t passesOverB = 0;
  std::uint64_t entriesWrittenC = 0;
};

extern const char* const kCsvHeader;
std::string toCsv(const ResultRow& row);

// One multiply per scale in the spec; input tables are built fresh per
// scale and dropped afterwards. Rows come back in scale order.
std::vector<ResultRow> runExperiment(const ExperimentSpec& spec,
                                     std::ostream* progress = nullptr);

// Runs every method (hybrid once per entry of pList) at a single scale on
// identical inputs and checks each result table against the reference
// product, throwing on any divergence. Returns one row per run plus a
// final row (method "oracle") timing the in-memory reference itself.
std::vector<ResultRow> compareMethods(std::uint32_t scale,
                                      const std::vector<std::uint64_t>& pList,
                                      std::uint64_t seedA, std::uint64_t seedB,
                                      std::ostream* progress = nullptr);

}  // namespace tablestore

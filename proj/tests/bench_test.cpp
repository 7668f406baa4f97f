#include "doctest.h"
#include "tablestore/bench.hpp"

#include <algorithm>
#include <sstream>

using namespace tablestore;

namespace {

ExperimentSpec smallSpec(Method m) {
  ExperimentSpec spec;
  spec.scales = {5};
  spec.method = m;
  spec.seedA = 1;
  spec.seedB = 2;
  spec.monitorEveryN = 64;
  return spec;
}

}  // namespace

TEST_CASE("csv header and row shape") {
  CHECK(std::string(kCsvHeader) ==
        "scale,tablets,method,p,partial_products,after_sum,elapsed_s,rate_pps,"
        "passes_over_b,entries_written_c");
  ResultRow row;
  row.scale = 10;
  row.method = "outer";
  row.partialProducts = 5;
  row.afterSum = 3;
  row.passesOverB = 1;
  row.entriesWrittenC = 5;
  auto csv = toCsv(row);
  CHECK(csv.substr(0, 13) == "10,1,outer,1,");
  CHECK(std::count(csv.begin(), csv.end(), ',') == 9);
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::kOuter, Method::kInner, Method::kHybrid})
    CHECK(parseMethod(methodName(m)) == m);
  CHECK_THROWS_AS(parseMethod("sideways"), std::invalid_argument);
}

TEST_CASE("equal seeds are rejected") {
  ExperimentSpec spec = smallSpec(Method::kOuter);
  spec.seedB = spec.seedA;
  CHECK_THROWS_AS(runExperiment(spec), std::invalid_argument);
}

TEST_CASE("identical specs give identical deterministic columns") {
  auto spec = smallSpec(Method::kOuter);
  spec.withOracle = true;
  auto r1 = runExperiment(spec);
  auto r2 = runExperiment(spec);
  REQUIRE(r1.size() == 1);
  REQUIRE(r2.size() == 1);
  CHECK(r1[0].partialProducts == r2[0].partialProducts);
  CHECK(r1[0].afterSum == r2[0].afterSum);
  CHECK(r1[0].entriesWrittenC == r2[0].entriesWrittenC);
  CHECK(r1[0].partialProducts > 0);
  CHECK(r1[0].afterSum <= r1[0].partialProducts);
}

TEST_CASE("two tablets produce the same deterministic columns as one") {
  auto one = smallSpec(Method::kOuter);
  one.withOracle = true;
  auto two = one;
  two.tablets = 2;
  auto r1 = runExperiment(one);
  auto r2 = runExperiment(two);
  CHECK(r1[0].partialProducts == r2[0].partialProducts);
  CHECK(r1[0].afterSum == r2[0].afterSum);
  CHECK(r2[0].tablets == 2);
}

TEST_CASE("compare cross-checks all methods and appends the reference row") {
  auto rows = compareMethods(5, {1, 2, 4}, 1, 2);
  REQUIRE(rows.size() == 6);  // outer, inner, 3 hybrids, oracle
  CHECK(rows[0].method == "outer");
  CHECK(rows[1].method == "inner");
  CHECK(rows.back().method == "oracle");

  // All methods agree on the summed result size.
  for (const auto& row : rows) CHECK(row.afterSum == rows[0].afterSum);
  // Outer writes every partial product; inner writes nnz(C).
  CHECK(rows[0].entriesWrittenC == rows[0].partialProducts);
  CHECK(rows[1].entriesWrittenC == rows[0].afterSum);
  // passesOverB: outer=1, inner=|rows(A)|, hybrid=P.
  CHECK(rows[0].passesOverB == 1);
  CHECK(rows[1].passesOverB == rows[1].p);
  CHECK(rows[2].passesOverB == 1);
  CHECK(rows[3].passesOverB == 2);
  CHECK(rows[4].passesOverB == 4);
}

TEST_CASE("hybrid P=1 without pre-summing matches the outer row") {
  auto outerSpec = smallSpec(Method::kOuter);
  auto hybridSpec = smallSpec(Method::kHybrid);
  hybridSpec.p = 1;
  hybridSpec.presumCap = 0;
  auto ro = runExperiment(outerSpec);
  auto rh = runExperiment(hybridSpec);
  CHECK(rh[0].passesOverB == ro[0].passesOverB);
  CHECK(rh[0].entriesWrittenC == ro[0].entriesWrittenC);
  CHECK(rh[0].partialProducts == ro[0].partialProducts);
  CHECK(rh[0].afterSum == ro[0].afterSum);
}

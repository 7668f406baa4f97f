#include "doctest.h"
#include "tablestore/graphgen.hpp"

#include <cmath>
#include <map>
#include <sstream>

using namespace tablestore;

TEST_CASE("generation is deterministic and sized by the count formula") {
  GenSpec spec{4, 16, 42};
  auto first = generateEdges(spec);
  auto second = generateEdges(spec);
  CHECK(first == second);
  CHECK(first.size() == 256);  // 16 * 2^4

  auto other = generateEdges(GenSpec{4, 16, 43});
  CHECK(first != other);
}

TEST_CASE("vertex keys are zero-padded to the scale's width") {
  CHECK(vertexKeyWidth(4) == 3);    // ceil(4*log10(2)) + 1 = 2+1
  CHECK(vertexKeyWidth(10) == 5);   // ceil(3.01) + 1
  CHECK(vertexKeyWidth(14) == 6);   // ceil(4.21) + 1
  CHECK(vertexKey(7, 5) == "00007");
  CHECK(vertexKey(12345, 5) == "12345");
  // Lexicographic order equals numeric order at fixed width.
  CHECK(vertexKey(9, 5) < vertexKey(10, 5));
}

TEST_CASE("vertex 0 attains the maximum out-degree") {
  auto edges = generateEdges(GenSpec{10, 16, 7});
  std::map<std::uint64_t, std::uint64_t> outDegree;
  for (const auto& [u, v] : edges) ++outDegree[u];
  std::uint64_t best = 0;
  for (const auto& [v, d] : outDegree)
    if (d > outDegree[0]) best = v;
  CHECK(best == 0);
}

TEST_CASE("log-degree falls with vertex index (power-law sanity)") {
  auto edges = generateEdges(GenSpec{8, 16, 3});
  std::map<std::uint64_t, double> outDegree;
  for (const auto& [u, v] : edges) ++outDegree[u];
  // Least-squares slope of log(degree) on index over vertices with edges.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto& [v, d] : outDegree) {
    double x = static_cast<double>(v), y = std::log(d);
    sx += x; sy += y; sxx += x * x; sxy += x * y; ++n;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope < 0);
}

TEST_CASE("ingest sums duplicate edges and conserves the edge count") {
  Store store;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges = {{1, 2}, {1, 2}};
  auto result = ingestAdjacency(store, edges, "G", false, 4);
  auto out = result.table->scanAll();
  REQUIRE(out.size() == 1);
  CHECK(out[0].key == Key{"001", "002"});
  CHECK(out[0].value == "2");
}

TEST_CASE("ingest at scale 10 conserves multiplicity mass") {
  Store store;
  auto edges = generateEdges(GenSpec{10, 16, 5});
  auto result = ingestAdjacency(store, edges, "G", true, 10);
  std::uint64_t nnz = 0, mass = 0;
  result.table->visitScan([&](const EntryView& e) {
    ++nnz;
    mass += std::stoull(std::string(e.value));
  });
  CHECK(mass == 16 * 1024);
  CHECK(nnz <= 16 * 1024);

  // Transpose is the column-swapped main table.
  std::map<Key, std::string> swapped;
  result.table->visitScan([&](const EntryView& e) {
    swapped[Key{std::string(e.col), std::string(e.row)}] = e.value;
  });
  std::vector<Entry> expect;
  for (auto& [k, v] : swapped) expect.push_back(Entry{k, v});
  CHECK(result.transpose->scanAll() == expect);
}

TEST_CASE("identical specs dump byte-identically") {
  std::ostringstream d1, d2;
  for (auto* out : {&d1, &d2}) {
    Store store;
    auto edges = generateEdges(GenSpec{6, 16, 11});
    auto result = ingestAdjacency(store, edges, "G", false, 6);
    result.table->flush();
    dumpTable(*result.table, *out);
  }
  CHECK(d1.str() == d2.str());
  CHECK_FALSE(d1.str().empty());
}

TEST_CASE("findEvenSplit") {
  Store store;

  SUBCASE("uniform counts split in the middle") {
    auto t = store.createTable(TableConfig{"T", {}, std::nullopt});
    std::vector<Entry> in;
    for (std::string row : {"r1", "r2", "r3", "r4"})
      in.push_back(Entry{Key{row, "c"}, "v"});
    t->write(in);
    CHECK(findEvenSplit(*t) == "r2");
  }

  SUBCASE("skewed counts pick the least-bad boundary") {
    auto t = store.createTable(TableConfig{"T", {}, std::nullopt});
    std::vector<Entry> in;
    for (int i = 0; i < 10; ++i)
      in.push_back(Entry{Key{"r1", "c" + std::to_string(i)}, "v"});
    in.push_back(Entry{Key{"r2", "c"}, "v"});
    in.push_back(Entry{Key{"r3", "c"}, "v"});
    t->write(in);
    CHECK(findEvenSplit(*t) == "r1");  // 10/2 beats 11/1
  }

  SUBCASE("single-row table has no split") {
    auto t = store.createTable(TableConfig{"T", {}, std::nullopt});
    std::vector<Entry> in = {Entry{Key{"only", "c1"}, "v"},
                             Entry{Key{"only", "c2"}, "v"}};
    t->write(in);
    CHECK_THROWS_AS(findEvenSplit(*t), std::invalid_argument);
  }

  SUBCASE("split row lands entries evenly across tablets") {
    auto t = store.createTable(TableConfig{"T", {}, std::nullopt});
    std::vector<Entry> in;
    for (int i = 0; i < 100; ++i)
      in.push_back(Entry{Key{"r" + std::to_string(100 + i), "c"}, "v"});
    t->write(in);
    t->addSplit(findEvenSplit(*t));
    t->flush();
    auto counts = t->tabletRawCounts();
    CHECK(counts[0] == 50);
    CHECK(counts[1] == 50);
  }
}

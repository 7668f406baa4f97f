#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tablestore/bench.hpp"
#include "tablestore/graphgen.hpp"

namespace {

// "10..14" (inclusive range) or "10,12,14".
std::vector<std::uint32_t> parseScales(const std::string& text) {
  std::vector<std::uint32_t> scales;
  auto dots = text.find("..");
  if (dots != std::string::npos) {
    std::uint32_t lo = std::stoul(text.substr(0, dots));
    std::uint32_t hi = std::stoul(text.substr(dots + 2));
    if (lo > hi) throw CLI::ValidationError("--scales", "range is reversed");
    for (std::uint32_t s = lo; s <= hi; ++s) scales.push_back(s);
    return scales;
  }
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) scales.push_back(std::stoul(token));
  if (scales.empty()) throw CLI::ValidationError("--scales", "empty");
  return scales;
}

void writeCsv(std::ostream& out, const std::vector<tablestore::ResultRow>& rows) {
  out << tablestore::kCsvHeader << "\n";
  for (const auto& row : rows) out << tablestore::toCsv(row) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table-backed sparse matrix multiply benchmark"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "Sweep scales with one method");
  std::string scalesText = "10..14";
  int tablets = 1;
  std::string methodText = "outer";
  std::uint64_t p = 1, seedA = 1, seedB = 2, edgesPerVertex = 16;
  std::string outPath;
  bool withOracle = false;
  run->add_option("--scales", scalesText, "Range lo..hi or comma list");
  run->add_option("--tablets", tablets)->check(CLI::IsMember({1, 2}));
  run->add_option("--method", methodText)
      ->check(CLI::IsMember({"outer", "inner", "hybrid"}));
  run->add_option("--p", p, "Hybrid partition count");
  run->add_option("--seed-a", seedA);
  run->add_option("--seed-b", seedB);
  run->add_option("--edges-per-vertex", edgesPerVertex);
  run->add_option("--out", outPath, "CSV output path (default stdout)");
  run->add_flag("--with-oracle", withOracle,
                "Verify each result against the in-memory reference");

  // --- compare ---
  auto* compare =
      app.add_subcommand("compare", "All methods at one scale, cross-checked");
  std::uint32_t cmpScale = 10;
  std::string pListText = "1,2,4";
  compare->add_option("--scale", cmpScale)->required();
  compare->add_option("--p-list", pListText, "Hybrid partition counts");
  compare->add_option("--seed-a", seedA);
  compare->add_option("--seed-b", seedB);
  compare->add_option("--out", outPath, "CSV output path (default stdout)");

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "Dump a generated adjacency table");
  std::uint32_t genScale = 10;
  std::uint64_t genSeed = 1;
  gen->add_option("--scale", genScale)->required();
  gen->add_option("--edges-per-vertex", edgesPerVertex);
  gen->add_option("--seed", genSeed);
  gen->add_option("--out", outPath, "Dump path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<tablestore::ResultRow> rows;
    if (run->parsed()) {
      tablestore::ExperimentSpec spec;
      spec.scales = parseScales(scalesText);
      spec.tablets = tablets;
      spec.method = tablestore::parseMethod(methodText);
      spec.p = p;
      spec.seedA = seedA;
      spec.seedB = seedB;
      spec.edgesPerVertex = edgesPerVertex;
      spec.withOracle = withOracle;
      rows = tablestore::runExperiment(spec, &std::cerr);
    } else if (compare->parsed()) {
      std::vector<std::uint64_t> pList;
      std::stringstream ss(pListText);
      std::string token;
      while (std::getline(ss, token, ',')) pList.push_back(std::stoull(token));
      rows = tablestore::compareMethods(cmpScale, pList, seedA, seedB,
                                        &std::cerr);
    } else {
      tablestore::Store store;
      auto edges = tablestore::generateEdges(
          tablestore::GenSpec{genScale, edgesPerVertex, genSeed});
      auto result = tablestore::ingestAdjacency(store, edges, "G",
                                                /*alsoTranspose=*/false,
                                                genScale);
      if (outPath.empty()) {
        tablestore::dumpTable(*result.table, std::cout);
      } else {
        std::ofstream out(outPath);
        if (!out) throw std::runtime_error("cannot open " + outPath);
        tablestore::dumpTable(*result.table, out);
      }
      return 0;
    }

    if (outPath.empty()) {
      writeCsv(std::cout, rows);
    } else {
      std::ofstream out(outPath);
      if (!out) throw std::runtime_error("cannot open " + outPath);
      writeCsv(out, rows);
      std::cerr << "wrote " << rows.size() << " rows to " << outPath << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

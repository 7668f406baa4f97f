#include "tablestore/bench.hpp"

#include <chrono>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tablestore/graphgen.hpp"
#include "tablestore/spgemm.hpp"

namespace tablestore {

namespace {

std::string formatDouble(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

struct Inputs {
  std::shared_ptr<Table> a, at, b;
};

Inputs buildInputs(Store& store, std::uint32_t scale, int tablets,
                   std::uint64_t seedA, std::uint64_t seedB,
                   std::uint64_t edgesPerVertex, std::ostream* progress) {
  if (tablets != 1 && tablets != 2)
    throw std::invalid_argument("tablets must be 1 or 2");
  if (progress)
    *progress << "scale " << scale << ": generating inputs\n" << std::flush;
  auto edgesA = generateEdges(GenSpec{scale, edgesPerVertex, seedA});
  auto ra = ingestAdjacency(store, edgesA, "A", /*alsoTranspose=*/true, scale);
  edgesA.clear();
  edgesA.shrink_to_fit();
  auto edgesB = generateEdges(GenSpec{scale, edgesPerVertex, seedB});
  auto rb = ingestAdjacency(store, edgesB, "B", /*alsoTranspose=*/false, scale);

  Inputs in{ra.table, ra.transpose, rb.table};
  if (tablets == 2) {
    in.a->addSplit(findEvenSplit(*in.a));
    in.at->addSplit(findEvenSplit(*in.at));
    in.b->addSplit(findEvenSplit(*in.b));
  }
  in.a->compact();
  in.at->compact();
  in.b->compact();
  return in;
}

std::shared_ptr<Table> makeTarget(Store& store, const std::string& name,
                                  const Inputs& in, int tablets) {
  TableConfig cfg{name, {}, CombinerSpec{"plus-times", kAllScopes}};
  // Result rows are A's rows, so A's even split is the best available
  // guess for balancing the result.
  if (tablets == 2) cfg.splits.push_back(findEvenSplit(*in.a));
  return store.createTable(std::move(cfg));
}

MultiplyStats dispatch(Store& store, const ExperimentSpec& spec,
                       const std::string& target) {
  const Semiring& sr = SemiringRegistry::get("plus-times");
  switch (spec.method) {
    case Method::kOuter: {
      MultOptions opts;
      opts.monitorEveryN = spec.monitorEveryN;
      return tableMult(store, "AT", "B", target, sr, std::move(opts));
    }
    case Method::kInner:
      return innerProductMult(store, "A", "B", target, sr);
    case Method::kHybrid:
      return hybridMult(store, "A", "B", target, sr, spec.p,
                        HybridOptions{spec.presumCap});
  }
  throw std::logic_error("unreachable");
}

void verifyAgainstOracle(const Table& result,
                         const std::map<Key, std::string>& oracle) {
  const Semiring& sr = SemiringRegistry::get("plus-times");
  std::uint64_t seen = 0;
  std::string mismatch;
  result.visitScan([&](const EntryView& e) {
    if (!mismatch.empty()) return;
    ++seen;
    Key k{std::string(e.row), std::string(e.col)};
    auto it = oracle.find(k);
    if (it == oracle.end()) {
      mismatch = "unexpected result entry (" + k.row + ", " + k.col + ")";
    } else if (sr.plus(it->second, sr.zero) != sr.plus(e.value, sr.zero)) {
      mismatch = "value mismatch at (" + k.row + ", " + k.col + "): got " +
                 std::string(e.value) + ", want " + it->second;
    }
  });
  if (mismatch.empty() && seen != oracle.size())
    mismatch = "result has " + std::to_string(seen) + " entries, reference has " +
               std::to_string(oracle.size());
  if (!mismatch.empty())
    throw std::runtime_error("result table '" + result.name() +
                             "' diverges from reference product: " + mismatch);
}

ResultRow makeRow(const ExperimentSpec& spec, std::uint32_t scale,
                  const MultiplyStats& stats, std::uint64_t afterSum) {
  ResultRow row;
  row.scale = scale;
  row.tablets = spec.tablets;
  row.method = methodName(spec.method);
  switch (spec.method) {
    case Method::kOuter: row.p = 1; break;
    case Method::kInner: row.p = stats.passesOverB; break;
    case Method::kHybrid: row.p = spec.p; break;
  }
  row.partialProducts = stats.partialProducts;
  row.afterSum = afterSum;
  row.elapsedSeconds = stats.elapsedSeconds;
  double effective = stats.elapsedSeconds - stats.maintenanceSeconds;
  row.ratePps = effective > 0
                    ? static_cast<double>(stats.partialProducts) / effective
                    : 0;
  row.passesOverB = stats.passesOverB;
  row.entriesWrittenC = stats.entriesWrittenC;
  return row;
}

ResultRow runOne(Store& store, const ExperimentSpec& spec, std::uint32_t scale,
                 const Inputs& in, const std::string& target,
                 const std::map<Key, std::string>* oracle,
                 std::ostream* progress) {
  makeTarget(store, target, in, spec.tablets);
  if (progress)
    *progress << "scale " << scale << ": " << methodName(spec.method)
              << " multiply into " << target << "\n"
              << std::flush;
  MultiplyStats stats = dispatch(store, spec, target);
  auto c = store.get(target);
  c->compact();
  ResultRow row = makeRow(spec, scale, stats, c->countEntries());
  if (oracle) verifyAgainstOracle(*c, *oracle);
  return row;
}

}  // namespace

const char* const kCsvHeader =
    "scale,tablets,method,p,partial_products,after_sum,elapsed_s,rate_pps,"
    "passes_over_b,entries_written_c";

std::string methodName(Method m) {
  switch (m) {
    case Method::kOuter: return "outer";
    case Method::kInner: return "inner";
    case Method::kHybrid: return "hybrid";
  }
  throw std::logic_error("unreachable");
}

Method parseMethod(const std::string& name) {
  if (name == "outer") return Method::kOuter;
  if (name == "inner") return Method::kInner;
  if (name == "hybrid") return Method::kHybrid;
  throw std::invalid_argument("unknown method '" + name +
                              "'; expected outer, inner, or hybrid");
}

std::string toCsv(const ResultRow& row) {
  std::ostringstream os;
  os << row.scale << ',' << row.tablets << ',' << row.method << ',' << row.p
     << ',' << row.partialProducts << ',' << row.afterSum << ','
     << formatDouble(row.elapsedSeconds) << ',' << formatDouble(row.ratePps)
     << ',' << row.passesOverB << ',' << row.entriesWrittenC;
  return os.str();
}

std::vector<ResultRow> runExperiment(const ExperimentSpec& spec,
                                     std::ostream* progress) {
  if (spec.seedA == spec.seedB)
    throw std::invalid_argument("seedA and seedB must differ");
  std::vector<ResultRow> rows;
  for (std::uint32_t scale : spec.scales) {
    // Fresh registry per scale: input tables of finished scales would
    // otherwise pin memory for the duration of the sweep.
    Store store;
    Inputs in = buildInputs(store, scale, spec.tablets, spec.seedA, spec.seedB,
                            spec.edgesPerVertex, progress);
    std::map<Key, std::string> oracle;
    if (spec.withOracle)
      oracle = denseOracle(in.a->scanAll(), in.b->scanAll(),
                           SemiringRegistry::get("plus-times"));
    rows.push_back(runOne(store, spec, scale, in, "C",
                          spec.withOracle ? &oracle : nullptr, progress));
    if (progress) *progress << toCsv(rows.back()) << "\n" << std::flush;
  }
  return rows;
}

std::vector<ResultRow> compareMethods(std::uint32_t scale,
                                      const std::vector<std::uint64_t>& pList,
                                      std::uint64_t seedA, std::uint64_t seedB,
                                      std::ostream* progress) {
  Store store;
  ExperimentSpec base;
  base.scales = {scale};
  base.seedA = seedA;
  base.seedB = seedB;
  base.withOracle = true;
  Inputs in =
      buildInputs(store, scale, 1, seedA, seedB, base.edgesPerVertex, progress);

  auto entriesA = in.a->scanAll();
  auto entriesB = in.b->scanAll();
  auto start = std::chrono::steady_clock::now();
  auto oracle =
      denseOracle(entriesA, entriesB, SemiringRegistry::get("plus-times"));
  std::chrono::duration<double> oracleElapsed =
      std::chrono::steady_clock::now() - start;
  entriesA.clear();
  entriesB.clear();

  std::vector<ResultRow> rows;
  ExperimentSpec outer = base;
  outer.method = Method::kOuter;
  rows.push_back(runOne(store, outer, scale, in, "Couter", &oracle, progress));

  ExperimentSpec inner = base;
  inner.method = Method::kInner;
  rows.push_back(runOne(store, inner, scale, in, "Cinner", &oracle, progress));

  for (std::uint64_t p : pList) {
    ExperimentSpec hybrid = base;
    hybrid.method = Method::kHybrid;
    hybrid.p = p;
    rows.push_back(runOne(store, hybrid, scale, in,
                          "Chybrid" + std::to_string(p), &oracle, progress));
  }

  // In-memory reference timing as its own labeled row, so the comparison
  // output carries a baseline alongside the table-backed methods.
  ResultRow oracleRow;
  oracleRow.scale = scale;
  oracleRow.tablets = 1;
  oracleRow.method = "oracle";
  oracleRow.p = 1;
  oracleRow.partialProducts = rows.front().partialProducts;
  oracleRow.afterSum = oracle.size();
  oracleRow.elapsedSeconds = oracleElapsed.count();
  oracleRow.ratePps =
      oracleElapsed.count() > 0
          ? static_cast<double>(oracleRow.partialProducts) / oracleElapsed.count()
          : 0;
  oracleRow.passesOverB = 1;
  oracleRow.entriesWrittenC = oracle.size();
  rows.push_back(oracleRow);
  return rows;
}

}  // namespace tablestore

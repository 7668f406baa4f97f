#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tablestore/iterstack.hpp"
#include "tablestore/kvstore.hpp"
#include "tablestore/semiring.hpp"

namespace tablestore {

struct MultOptions {
  // Subset expression restricting the matching-row domain of A^T and B.
  std::string bRowSubset;
  TransposeMode transpose = TransposeMode::kC;
  std::string transposeTable;  // default: target name + "T"
  std::optional<std::uint64_t> monitorEveryN;
  bool seekAlign = false;
  std::size_t rowCap = std::size_t{1} << 20;
};

// Outer-product multiply through the iterator stack: one stack per tablet
// of B, run concurrently, writing unsorted partial products to the target
// whose combiner performs the deferred plus. The target must carry the
// semiring's plus as a combiner at all scopes. Consumes A's transpose.
MultiplyStats tableMult(Store& store, const std::string& atTable,
                        const std::string& bTable,
                        const std::string& targetTable,
                        const Semiring& semiring, MultOptions opts = {});

// Inner-product multiply: a client-style loop over A's rows, each making
// a full pass over B and writing fully pre-summed rows of the result in
// sorted order. Consumes A un-transposed.
MultiplyStats innerProductMult(Store& store, const std::string& aTable,
                               const std::string& bTable,
                               const std::string& targetTable,
                               const Semiring& semiring);

struct HybridOptions {
  // Per-pass pre-sum accumulator capacity in distinct result positions;
  // exceeding it spills accumulated values and continues unsummed for
  // the remainder of the pass window. 0 disables pre-summing entirely,
  // reproducing the outer-product emission trace at P=1.
  std::uint64_t presumCap = std::uint64_t{1} << 20;
};

// Row-partitioned blend: pass p covers A rows with sorted rank in
// (floor((p-1)N/P), floor(pN/P)] and makes one pass over B, so P=1 is
// the outer product and P=N the inner product. Consumes A un-transposed.
MultiplyStats hybridMult(Store& store, const std::string& aTable,
                         const std::string& bTable,
                         const std::string& targetTable,
                         const Semiring& semiring, std::uint64_t partitions,
                         HybridOptions opts = {});

// Triple-loop reference product over in-memory maps; the ground truth
// for equivalence tests. Inputs are entry lists of A (un-transposed)
// and B; output has no explicit zeros.
std::map<Key, std::string> denseOracle(const std::vector<Entry>& entriesA,
                                       const std::vector<Entry>& entriesB,
                                       const Semiring& semiring);

// Sum over matching rows k of nnz(A^T row k) * nnz(B row k); equals the
// partialProducts counter of a completed tableMult on the same inputs.
std::uint64_t countPartialProducts(Store& store, const std::string& atTable,
                                   const std::string& bTable);

}  // namespace tablestore

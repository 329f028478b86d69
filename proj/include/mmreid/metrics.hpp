#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "mmreid/core.hpp"
#include "mmreid/mbsos.hpp"

namespace mmreid {

// Gallery ranking for a single query. `order` holds gallery indices sorted
// by ascending distance (ties by ascending index); `match_flags[k]` marks
// whether order[k] shares the query identity. Queries whose identity never
// appears in the gallery have `valid == false` and are skipped by the
// aggregate metrics while still counting toward num_queries.
struct RankedList {
  std::size_t query_index = 0;
  std::vector<std::size_t> order;
  std::vector<char> match_flags;
  bool valid = false;
};

struct PerQueryStats {
  std::size_t query_index = 0;
  double ap = 0.0;
  double inp = 0.0;
  std::size_t first_match_rank = 0;  // 1-based
};

struct EvalReport {
  std::map<std::size_t, double> cmc;  // requested rank -> fraction
  double mean_ap = 0.0;
  double mean_inp = 0.0;
  std::vector<PerQueryStats> per_query;  // valid queries only, query order
  std::size_t num_valid_queries = 0;
  std::size_t num_queries = 0;
};

// Sorts every gallery row of `distances` for the given query/gallery pair.
// Shapes must agree with the two sets.
std::vector<RankedList> rank_gallery(const Matrix& distances,
                                     const EmbeddingSet& query,
                                     const EmbeddingSet& gallery);

std::vector<RankedList> rank_gallery(const DistanceMap& distances,
                                     const EmbeddingSet& query,
                                     const EmbeddingSet& gallery);

std::vector<RankedList> rank_gallery(const OptimizedDistanceMap& distances,
                                     const EmbeddingSet& query,
                                     const EmbeddingSet& gallery);

// Mean of precision taken at each true-match position. The list must be
// valid (at least one true match).
double average_precision(const RankedList& list);

// |true matches| divided by the rank of the hardest (last) true match.
double inverse_negative_penalty(const RankedList& list);

// Fraction of valid queries whose first true match lands at or above each
// requested rank. Ranks must be 1-based and within the gallery size; at
// least one valid query is required.
std::map<std::size_t, double> cmc_curve(const std::vector<RankedList>& lists,
                                        const std::vector<std::size_t>& ranks);

// rank_gallery + per-query AP/INP + CMC in one pass.
EvalReport evaluate(const Matrix& distances, const EmbeddingSet& query,
                    const EmbeddingSet& gallery,
                    const std::vector<std::size_t>& ranks);

}  // namespace mmreid

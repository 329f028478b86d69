#include "mmreid/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mmreid {

std::vector<RankedList> rank_gallery(const Matrix& distances,
                                     const EmbeddingSet& query,
                                     const EmbeddingSet& gallery) {
  if (distances.rows() != query.size() || distances.cols() != gallery.size()) {
    throw Error(ErrorCode::shape_mismatch,
                "distance map is " + std::to_string(distances.rows()) + "x" +
                    std::to_string(distances.cols()) + " but sets hold " +
                    std::to_string(query.size()) + " queries and " +
                    std::to_string(gallery.size()) + " gallery records");
  }
  if (query.empty() || gallery.empty()) {
    throw Error(ErrorCode::empty_set, "ranking needs non-empty sets");
  }

  const std::size_t nq = query.size();
  const std::size_t ng = gallery.size();
  std::vector<RankedList> lists(nq);

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(nq); ++qi) {
    const std::size_t q = static_cast<std::size_t>(qi);
    RankedList& list = lists[q];
    list.query_index = q;
    list.order.resize(ng);
    std::iota(list.order.begin(), list.order.end(), std::size_t{0});
    const double* row = distances.row(q);
    // Ties break toward the lower gallery index so the order is a total
    // order and therefore reproducible.
    std::sort(list.order.begin(), list.order.end(),
              [row](std::size_t a, std::size_t b) {
                if (row[a] != row[b]) return row[a] < row[b];
                return a < b;
              });
    list.match_flags.resize(ng);
    const std::uint32_t id = query.identity(q);
    bool any = false;
    for (std::size_t k = 0; k < ng; ++k) {
      const bool match = gallery.identity(list.order[k]) == id;
      list.match_flags[k] = match ? 1 : 0;
      any = any || match;
    }
    list.valid = any;
  }
  return lists;
}

std::vector<RankedList> rank_gallery(const DistanceMap& distances,
                                     const EmbeddingSet& query,
                                     const EmbeddingSet& gallery) {
  return rank_gallery(distances.entries, query, gallery);
}

std::vector<RankedList> rank_gallery(const OptimizedDistanceMap& distances,
                                     const EmbeddingSet& query,
                                     const EmbeddingSet& gallery) {
  return rank_gallery(distances.entries, query, gallery);
}

double average_precision(const RankedList& list) {
  if (!list.valid) {
    throw Error(ErrorCode::invalid_argument,
                "query " + std::to_string(list.query_index) + " has no true match");
  }
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < list.match_flags.size(); ++k) {
    if (list.match_flags[k]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(hits);
}

double inverse_negative_penalty(const RankedList& list) {
  if (!list.valid) {
    throw Error(ErrorCode::invalid_argument,
                "query " + std::to_string(list.query_index) + " has no true match");
  }
  std::size_t hits = 0;
  std::size_t hardest_rank = 0;
  for (std::size_t k = 0; k < list.match_flags.size(); ++k) {
    if (list.match_flags[k]) {
      ++hits;
      hardest_rank = k + 1;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(hardest_rank);
}

std::map<std::size_t, double> cmc_curve(const std::vector<RankedList>& lists,
                                        const std::vector<std::size_t>& ranks) {
  if (lists.empty()) {
    throw Error(ErrorCode::invalid_argument, "cmc needs at least one ranked list");
  }
  const std::size_t ng = lists.front().order.size();
  for (std::size_t r : ranks) {
    if (r < 1 || r > ng) {
      throw Error(ErrorCode::invalid_argument,
                  "rank " + std::to_string(r) + " outside [1, " + std::to_string(ng) + "]");
    }
  }

  std::size_t num_valid = 0;
  std::vector<std::size_t> first_ranks;
  first_ranks.reserve(lists.size());
  for (const RankedList& list : lists) {
    if (!list.valid) continue;
    ++num_valid;
    const auto it = std::find(list.match_flags.begin(), list.match_flags.end(), char{1});
    first_ranks.push_back(static_cast<std::size_t>(it - list.match_flags.begin()) + 1);
  }
  if (num_valid == 0) {
    throw Error(ErrorCode::no_valid_queries, "no query identity appears in the gallery");
  }

  std::map<std::size_t, double> curve;
  for (std::size_t r : ranks) {
    std::size_t hits = 0;
    for (std::size_t fr : first_ranks) {
      if (fr <= r) ++hits;
    }
    curve[r] = static_cast<double>(hits) / static_cast<double>(num_valid);
  }
  return curve;
}

EvalReport evaluate(const Matrix& distances, const EmbeddingSet& query,
                    const EmbeddingSet& gallery,
                    const std::vector<std::size_t>& ranks) {
  const std::vector<RankedList> lists = rank_gallery(distances, query, gallery);

  EvalReport report;
  report.num_queries = lists.size();
  double ap_sum = 0.0;
  double inp_sum = 0.0;
  for (const RankedList& list : lists) {
    if (!list.valid) continue;
    PerQueryStats stats;
    stats.query_index = list.query_index;
    stats.ap = average_precision(list);
    stats.inp = inverse_negative_penalty(list);
    const auto it = std::find(list.match_flags.begin(), list.match_flags.end(), char{1});
    stats.first_match_rank = static_cast<std::size_t>(it - list.match_flags.begin()) + 1;
    ap_sum += stats.ap;
    inp_sum += stats.inp;
    report.per_query.push_back(stats);
  }
  report.num_valid_queries = report.per_query.size();
  if (report.num_valid_queries == 0) {
    throw Error(ErrorCode::no_valid_queries, "no query identity appears in the gallery");
  }
  report.mean_ap = ap_sum / static_cast<double>(report.num_valid_queries);
  report.mean_inp = inp_sum / static_cast<double>(report.num_valid_queries);
  report.cmc = cmc_curve(lists, ranks);
  return report;
}

}  // namespace mmreid

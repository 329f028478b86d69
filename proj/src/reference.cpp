#include "mmreid/reference.hpp"

#include <cmath>
#include <string>

namespace mmreid::reference {

DistanceMap pairwise_distances_naive(const EmbeddingSet& rows, const EmbeddingSet& cols) {
  if (rows.empty() || cols.empty()) {
    throw Error(ErrorCode::empty_set, "pairwise distances need non-empty sets");
  }
  if (rows.dimension() != cols.dimension()) {
    throw Error(ErrorCode::dimension_mismatch, "sets disagree on dimension");
  }
  const std::size_t d = rows.dimension();
  DistanceMap map;
  map.entries = Matrix(rows.size(), cols.size());
  map.row_modality = rows.modalities();
  map.col_modality = cols.modalities();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double* a = rows.features().row(i);
      const double* b = cols.features().row(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        sum += diff * diff;
      }
      map.entries(i, j) = std::sqrt(sum);
    }
  }
  return map;
}

OptimizedDistanceMap bridge_optimize_naive(const DistanceMap& qg, const DistanceMap& gg) {
  if (!qg.scaled || !gg.scaled) {
    throw Error(ErrorCode::not_scaled, "bridge optimization expects scaled maps");
  }
  if (gg.rows() != gg.cols() || qg.cols() != gg.rows()) {
    throw Error(ErrorCode::shape_mismatch,
                "query-gallery is " + std::to_string(qg.rows()) + "x" +
                    std::to_string(qg.cols()) + ", gallery-gallery " +
                    std::to_string(gg.rows()) + "x" + std::to_string(gg.cols()));
  }
  const std::size_t nq = qg.rows();
  const std::size_t ng = qg.cols();
  OptimizedDistanceMap out;
  out.base = qg;
  out.entries = Matrix(nq, ng);
  out.argmin_bridge.assign(nq * ng, 0);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      double best = qg.entries(i, 0) + gg.entries(0, j);
      std::uint32_t best_t = 0;
      for (std::size_t t = 1; t < ng; ++t) {
        const double cand = qg.entries(i, t) + gg.entries(t, j);
        if (cand < best) {
          best = cand;
          best_t = static_cast<std::uint32_t>(t);
        }
      }
      out.entries(i, j) = best;
      out.argmin_bridge[i * ng + j] = best_t;
    }
  }
  return out;
}

}  // namespace mmreid::reference

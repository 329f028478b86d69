#pragma once

#include <cstdint>
#include <vector>

#include "mmreid/core.hpp"

namespace mmreid {

// Result of bridge optimization. `entries(i, j)` is the best one-stop
// distance from query i to gallery j and `bridge(i, j)` the gallery sample
// routed through. Keeping t == j a candidate (the gallery self-loop has
// distance scaled-diagonal == 0) guarantees entries <= base.entries.
struct OptimizedDistanceMap {
  DistanceMap base;                        // scaled query-gallery map
  Matrix entries;                          // bridged distances, same shape
  std::vector<std::uint32_t> argmin_bridge; // row-major, rows * cols

  std::size_t rows() const { return entries.rows(); }
  std::size_t cols() const { return entries.cols(); }

  std::uint32_t bridge(std::size_t i, std::size_t j) const {
    return argmin_bridge[i * entries.cols() + j];
  }
};

// Multiplies every same-modality entry by lambda, leaving cross-modality
// entries untouched. Throws already_scaled if the map went through this
// once before.
DistanceMap scale_same_modality(const DistanceMap& map, const ReRankConfig& cfg);

// Min-plus product of the scaled query-gallery map with the scaled
// gallery-gallery map: entries(i, j) = min_t qg(i, t) + gg(t, j). Ties keep
// the smallest t. Both inputs must be scaled and gg must be square with
// qg.cols() == gg.rows(). OpenMP-parallel over query rows; the result is
// bit-identical at any thread count.
OptimizedDistanceMap bridge_optimize(const DistanceMap& qg, const DistanceMap& gg);

// Full pipeline: pairwise distances, same-modality scaling of both maps,
// bridge optimization.
OptimizedDistanceMap rerank(const EmbeddingSet& query, const EmbeddingSet& gallery,
                            const ReRankConfig& cfg);

}  // namespace mmreid

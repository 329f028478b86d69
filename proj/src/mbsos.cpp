#include "mmreid/mbsos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mmreid {

namespace {

void check_annotations(const DistanceMap& map, const char* which) {
  if (map.row_modality.size() != map.rows() || map.col_modality.size() != map.cols()) {
    throw Error(ErrorCode::shape_mismatch,
                std::string(which) + " map has modality annotations that disagree with its shape");
  }
}

}  // namespace

DistanceMap scale_same_modality(const DistanceMap& map, const ReRankConfig& cfg) {
  if (map.scaled) {
    throw Error(ErrorCode::already_scaled, "same-modality scaling applied twice");
  }
  if (!std::isfinite(cfg.lambda) || cfg.lambda <= 0.0) {
    throw Error(ErrorCode::invalid_argument, "lambda must be positive and finite");
  }
  check_annotations(map, "input");
  DistanceMap out = map;
  const std::size_t rows = map.rows();
  const std::size_t cols = map.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = out.entries.row(i);
    const Modality rm = map.row_modality[i];
    for (std::size_t j = 0; j < cols; ++j) {
      if (rm == map.col_modality[j]) {
        row[j] *= cfg.lambda;
      }
    }
  }
  out.scaled = true;
  return out;
}

OptimizedDistanceMap bridge_optimize(const DistanceMap& qg, const DistanceMap& gg) {
  if (!qg.scaled || !gg.scaled) {
    throw Error(ErrorCode::not_scaled, "bridge optimization expects scaled maps");
  }
  check_annotations(qg, "query-gallery");
  check_annotations(gg, "gallery-gallery");
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
  out.entries = Matrix(nq, ng, std::numeric_limits<double>::infinity());
  out.argmin_bridge.assign(nq * ng, 0);

  // Row-blocked min-plus product. The bridge index t runs ascending in the
  // middle loop with strict-less updates, so every (i, j) cell sees the
  // exact comparison sequence of the naive i/j/t loop: values and argmins
  // are bit-identical to it, and threads only split disjoint row blocks.
  constexpr std::size_t kRowBlock = 16;
  const std::size_t num_blocks = (nq + kRowBlock - 1) / kRowBlock;

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(num_blocks); ++b) {
    const std::size_t i0 = static_cast<std::size_t>(b) * kRowBlock;
    const std::size_t i1 = std::min(nq, i0 + kRowBlock);
    for (std::size_t t = 0; t < ng; ++t) {
      const double* __restrict gg_row = gg.entries.row(t);
      for (std::size_t i = i0; i < i1; ++i) {
        const double reach = qg.entries(i, t);
        double* __restrict dst = out.entries.row(i);
        std::uint32_t* __restrict arg = out.argmin_bridge.data() + i * ng;
        for (std::size_t j = 0; j < ng; ++j) {
          const double cand = reach + gg_row[j];
          if (cand < dst[j]) {
            dst[j] = cand;
            arg[j] = static_cast<std::uint32_t>(t);
          }
        }
      }
    }
  }
  return out;
}

OptimizedDistanceMap rerank(const EmbeddingSet& query, const EmbeddingSet& gallery,
                            const ReRankConfig& cfg) {
  const DistanceMap qg = pairwise_distances(query, gallery);
  const DistanceMap gg = pairwise_distances(gallery, gallery);
  return bridge_optimize(scale_same_modality(qg, cfg), scale_same_modality(gg, cfg));
}

}  // namespace mmreid

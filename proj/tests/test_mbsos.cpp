#include <cmath>
#include <vector>

#include <doctest.h>
#include <omp.h>

#include "helpers.hpp"
#include "mmreid/mbsos.hpp"
#include "mmreid/metrics.hpp"
#include "mmreid/reference.hpp"
#include "mmreid/rng.hpp"

using namespace mmreid;
using testutil::rec;
using testutil::set_of;

namespace {

DistanceMap random_map(std::size_t rows, std::size_t cols, Rng& rng, bool symmetric) {
  DistanceMap map;
  map.entries = Matrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    map.row_modality.push_back(rng.below(2) == 0 ? Modality::Visible : Modality::Infrared);
  }
  if (symmetric) {
    map.col_modality = map.row_modality;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = i + 1; j < cols; ++j) {
        const double v = rng.unit() * 10.0;
        map.entries(i, j) = v;
        map.entries(j, i) = v;
      }
    }
  } else {
    for (std::size_t j = 0; j < cols; ++j) {
      map.col_modality.push_back(rng.below(2) == 0 ? Modality::Visible
                                                   : Modality::Infrared);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        map.entries(i, j) = rng.unit() * 10.0;
      }
    }
  }
  return map;
}

}  // namespace

TEST_CASE("scale_same_modality worked example and lambda=1") {
  DistanceMap map;
  map.entries = Matrix(1, 2);
  map.entries(0, 0) = 1.0;
  map.entries(0, 1) = 2.0;
  map.row_modality = {Modality::Visible};
  map.col_modality = {Modality::Visible, Modality::Infrared};

  const DistanceMap scaled = scale_same_modality(map, ReRankConfig{0.999});
  CHECK(scaled.entries(0, 0) == doctest::Approx(0.999).epsilon(1e-15));
  CHECK(scaled.entries(0, 1) == 2.0);
  CHECK(scaled.scaled);

  const DistanceMap identity = scale_same_modality(map, ReRankConfig{1.0});
  CHECK(testutil::bits_equal(identity.entries, map.entries));
}

TEST_CASE("scale_same_modality rejects double scaling and bad lambda") {
  DistanceMap map;
  map.entries = Matrix(1, 1);
  map.row_modality = {Modality::Visible};
  map.col_modality = {Modality::Visible};
  const DistanceMap once = scale_same_modality(map, ReRankConfig{0.5});
  CHECK_THROWS_AS(scale_same_modality(once, ReRankConfig{0.5}), Error);
  CHECK_THROWS_AS(scale_same_modality(map, ReRankConfig{0.0}), Error);
  CHECK_THROWS_AS(scale_same_modality(map, ReRankConfig{-1.0}), Error);
}

TEST_CASE("scaling keeps a symmetric gallery map symmetric") {
  Rng rng(5);
  const DistanceMap gg = random_map(8, 8, rng, true);
  const DistanceMap scaled = scale_same_modality(gg, ReRankConfig{0.999});
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(scaled.entries(i, j) == scaled.entries(j, i));
    }
  }
}

TEST_CASE("bridge_optimize worked 3-gallery example") {
  // q visible; g1 visible, g2 infrared, g3 infrared. Raw query distances
  // (1, 2, 3); raw gallery distances d(g1,g2)=0.5, d(g1,g3)=2.5, d(g2,g3)=0.4.
  DistanceMap qg;
  qg.entries = Matrix(1, 3);
  qg.entries(0, 0) = 1.0;
  qg.entries(0, 1) = 2.0;
  qg.entries(0, 2) = 3.0;
  qg.row_modality = {Modality::Visible};
  qg.col_modality = {Modality::Visible, Modality::Infrared, Modality::Infrared};

  DistanceMap gg;
  gg.entries = Matrix(3, 3);
  gg.entries(0, 1) = gg.entries(1, 0) = 0.5;
  gg.entries(0, 2) = gg.entries(2, 0) = 2.5;
  gg.entries(1, 2) = gg.entries(2, 1) = 0.4;
  gg.row_modality = qg.col_modality;
  gg.col_modality = qg.col_modality;

  const ReRankConfig cfg{0.999};
  const OptimizedDistanceMap out =
      bridge_optimize(scale_same_modality(qg, cfg), scale_same_modality(gg, cfg));

  CHECK(out.base.entries(0, 0) == doctest::Approx(0.999).epsilon(1e-15));
  CHECK(out.entries(0, 1) == doctest::Approx(1.499).epsilon(1e-12));
  CHECK(out.bridge(0, 1) == 0);  // through g1
  CHECK(out.entries(0, 2) == doctest::Approx(2.3996).epsilon(1e-12));
  CHECK(out.bridge(0, 2) == 1);  // through g2
  // Self-bridge keeps the direct distance for the same-modality column.
  CHECK(out.entries(0, 0) == out.base.entries(0, 0));
}

TEST_CASE("bridge_optimize with a single gallery sample is the identity") {
  DistanceMap qg;
  qg.entries = Matrix(2, 1);
  qg.entries(0, 0) = 1.5;
  qg.entries(1, 0) = 0.25;
  qg.row_modality = {Modality::Visible, Modality::Infrared};
  qg.col_modality = {Modality::Infrared};
  DistanceMap gg;
  gg.entries = Matrix(1, 1);
  gg.row_modality = {Modality::Infrared};
  gg.col_modality = {Modality::Infrared};
  const ReRankConfig cfg{0.999};
  const OptimizedDistanceMap out =
      bridge_optimize(scale_same_modality(qg, cfg), scale_same_modality(gg, cfg));
  CHECK(testutil::bits_equal(out.entries, out.base.entries));
  CHECK(out.bridge(0, 0) == 0);
}

TEST_CASE("bridge_optimize is bit-equal to the naive triple loop") {
  Rng rng(17);
  for (int iter = 0; iter < 20; ++iter) {
    const std::size_t nq = 1 + rng.below(40);
    const std::size_t ng = 2 + rng.below(150);
    DistanceMap qg = random_map(nq, ng, rng, false);
    DistanceMap gg = random_map(ng, ng, rng, true);
    gg.col_modality = gg.row_modality;
    const ReRankConfig cfg{0.999};
    const DistanceMap qg_s = scale_same_modality(qg, cfg);
    const DistanceMap gg_s = scale_same_modality(gg, cfg);
    const OptimizedDistanceMap fast = bridge_optimize(qg_s, gg_s);
    const OptimizedDistanceMap slow = reference::bridge_optimize_naive(qg_s, gg_s);
    CHECK(testutil::bits_equal(fast.entries, slow.entries));
    CHECK(fast.argmin_bridge == slow.argmin_bridge);
  }
}

TEST_CASE("bridged entries never exceed the scaled direct distance") {
  Rng rng(23);
  for (int iter = 0; iter < 10; ++iter) {
    const std::size_t nq = 1 + rng.below(20);
    const std::size_t ng = 2 + rng.below(60);
    DistanceMap qg = random_map(nq, ng, rng, false);
    DistanceMap gg = random_map(ng, ng, rng, true);
    const ReRankConfig cfg{0.999};
    const DistanceMap gg_s = scale_same_modality(gg, cfg);
    const OptimizedDistanceMap out =
        bridge_optimize(scale_same_modality(qg, cfg), gg_s);
    for (std::size_t i = 0; i < nq; ++i) {
      for (std::size_t j = 0; j < ng; ++j) {
        CHECK(out.entries(i, j) <= out.base.entries(i, j));
        // The stored bridge reproduces the minimum exactly.
        const std::size_t t = out.bridge(i, j);
        CHECK(out.entries(i, j) == out.base.entries(i, t) + gg_s.entries(t, j));
      }
    }
  }
}

TEST_CASE("decreasing an edge never increases a bridged distance") {
  Rng rng(31);
  DistanceMap qg = random_map(6, 12, rng, false);
  DistanceMap gg = random_map(12, 12, rng, true);
  const ReRankConfig cfg{0.999};
  const DistanceMap qg_s = scale_same_modality(qg, cfg);
  const DistanceMap gg_s = scale_same_modality(gg, cfg);
  const OptimizedDistanceMap before = bridge_optimize(qg_s, gg_s);

  DistanceMap qg_lower = qg_s;
  qg_lower.entries(3, 7) *= 0.5;
  const OptimizedDistanceMap after = bridge_optimize(qg_lower, gg_s);
  for (std::size_t i = 0; i < before.rows(); ++i) {
    for (std::size_t j = 0; j < before.cols(); ++j) {
      CHECK(after.entries(i, j) <= before.entries(i, j));
    }
  }
}

TEST_CASE("permuting the gallery permutes bridged columns consistently") {
  Rng rng(37);
  const std::size_t nq = 5;
  const std::size_t ng = 9;
  DistanceMap qg = random_map(nq, ng, rng, false);
  DistanceMap gg = random_map(ng, ng, rng, true);
  const ReRankConfig cfg{0.999};
  const DistanceMap qg_s = scale_same_modality(qg, cfg);
  const DistanceMap gg_s = scale_same_modality(gg, cfg);
  const OptimizedDistanceMap base = bridge_optimize(qg_s, gg_s);

  std::vector<std::size_t> perm(ng);
  for (std::size_t i = 0; i < ng; ++i) perm[i] = i;
  rng.shuffle(perm);

  DistanceMap qg_p = qg_s;
  DistanceMap gg_p = gg_s;
  for (std::size_t j = 0; j < ng; ++j) {
    qg_p.col_modality[j] = qg_s.col_modality[perm[j]];
    gg_p.row_modality[j] = gg_s.row_modality[perm[j]];
    gg_p.col_modality[j] = gg_s.col_modality[perm[j]];
    for (std::size_t i = 0; i < nq; ++i) {
      qg_p.entries(i, j) = qg_s.entries(i, perm[j]);
    }
  }
  for (std::size_t i = 0; i < ng; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      gg_p.entries(i, j) = gg_s.entries(perm[i], perm[j]);
    }
  }
  const OptimizedDistanceMap permuted = bridge_optimize(qg_p, gg_p);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      CHECK(permuted.entries(i, j) == base.entries(i, perm[j]));
      CHECK(perm[permuted.bridge(i, j)] ==
            static_cast<std::size_t>(base.bridge(i, perm[j])));
    }
  }
}

TEST_CASE("bridge_optimize validates shapes and scaling") {
  Rng rng(41);
  DistanceMap qg = random_map(3, 4, rng, false);
  DistanceMap gg = random_map(4, 4, rng, true);
  CHECK_THROWS_AS(bridge_optimize(qg, gg), Error);  // not scaled
  const ReRankConfig cfg{0.999};
  const DistanceMap qg_s = scale_same_modality(qg, cfg);
  const DistanceMap gg_s = scale_same_modality(gg, cfg);
  DistanceMap wrong = random_map(3, 3, rng, true);
  const DistanceMap wrong_s = scale_same_modality(wrong, cfg);
  CHECK_THROWS_AS(bridge_optimize(qg_s, wrong_s), Error);
}

TEST_CASE("rerank equals manual composition") {
  const auto pool = testutil::random_batch(4, 3, 6, 71).set;
  std::vector<std::size_t> query_idx{0, 5, 10, 15};
  std::vector<std::size_t> gallery_idx;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    bool used = false;
    for (std::size_t q : query_idx) used = used || q == i;
    if (!used) gallery_idx.push_back(i);
  }
  const EmbeddingSet query = pool.subset(query_idx);
  const EmbeddingSet gallery = pool.subset(gallery_idx);
  const ReRankConfig cfg{0.999};
  const OptimizedDistanceMap composed = rerank(query, gallery, cfg);
  const OptimizedDistanceMap manual =
      bridge_optimize(scale_same_modality(pairwise_distances(query, gallery), cfg),
                      scale_same_modality(pairwise_distances(gallery, gallery), cfg));
  CHECK(testutil::bits_equal(composed.entries, manual.entries));
  CHECK(composed.argmin_bridge == manual.argmin_bridge);
}

TEST_CASE("lambda=1 with mutually distant gallery keeps raw rankings") {
  // Gallery points far apart: every bridge detour costs more than any direct
  // edge, so rankings by bridged distance match rankings by raw distance.
  EmbeddingSet query(2), gallery(2);
  query.add(rec(1, Modality::Visible, {0.0, 0.0}));
  query.add(rec(2, Modality::Infrared, {1.0, 0.0}));
  gallery.add(rec(1, Modality::Infrared, {100.0, 0.0}));
  gallery.add(rec(2, Modality::Visible, {0.0, 100.0}));
  gallery.add(rec(3, Modality::Visible, {-100.0, -100.0}));
  const OptimizedDistanceMap bridged = rerank(query, gallery, ReRankConfig{1.0});
  const DistanceMap raw = pairwise_distances(query, gallery);
  const auto ranked_bridged = rank_gallery(bridged, query, gallery);
  const auto ranked_raw = rank_gallery(raw, query, gallery);
  for (std::size_t q = 0; q < 2; ++q) {
    CHECK(ranked_bridged[q].order == ranked_raw[q].order);
  }
}

TEST_CASE("multi-threaded bridge equals single-threaded exactly") {
  Rng rng(53);
  DistanceMap qg = random_map(37, 64, rng, false);
  DistanceMap gg = random_map(64, 64, rng, true);
  const ReRankConfig cfg{0.999};
  const DistanceMap qg_s = scale_same_modality(qg, cfg);
  const DistanceMap gg_s = scale_same_modality(gg, cfg);

  const int saved_threads = omp_get_max_threads();
  omp_set_num_threads(4);
  const OptimizedDistanceMap multi = bridge_optimize(qg_s, gg_s);
  omp_set_num_threads(1);
  const OptimizedDistanceMap single = bridge_optimize(qg_s, gg_s);
  omp_set_num_threads(saved_threads);

  CHECK(testutil::bits_equal(multi.entries, single.entries));
  CHECK(multi.argmin_bridge == single.argmin_bridge);
}

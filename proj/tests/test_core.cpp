#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "mmreid/core.hpp"
#include "mmreid/reference.hpp"
#include "mmreid/rng.hpp"

using namespace mmreid;
using testutil::rec;
using testutil::set_of;

TEST_CASE("euclidean_distance basic values") {
  const std::vector<double> a{0.0, 0.0};
  const std::vector<double> b{3.0, 4.0};
  CHECK(euclidean_distance(a, b) == 5.0);

  const std::vector<double> same{1.5, -2.0};
  CHECK(euclidean_distance(same, same) == 0.0);

  const std::vector<double> c{1.0, 1.0, 1.0};
  const std::vector<double> d{2.0, 3.0, 5.0};
  CHECK(euclidean_distance(c, d) == doctest::Approx(std::sqrt(21.0)).epsilon(1e-15));
}

TEST_CASE("euclidean_distance rejects ragged input") {
  const std::vector<double> a{1.0};
  const std::vector<double> b{1.0, 2.0};
  try {
    euclidean_distance(a, b);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("euclidean_distance triangle inequality on random triples") {
  Rng rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t dim = 1 + rng.below(6);
    std::vector<double> a(dim), b(dim), c(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      a[i] = rng.gaussian();
      b[i] = rng.gaussian();
      c[i] = rng.gaussian();
    }
    const double ab = euclidean_distance(a, b);
    const double bc = euclidean_distance(b, c);
    const double ac = euclidean_distance(a, c);
    CHECK(ac <= (ab + bc) * (1.0 + 1e-12));
  }
}

TEST_CASE("pairwise_distances small examples") {
  const EmbeddingSet one = set_of(2, {rec(1, Modality::Visible, {0.5, 0.5})});
  const DistanceMap self = pairwise_distances(one, one);
  CHECK(self.rows() == 1);
  CHECK(self.cols() == 1);
  CHECK(self.entries(0, 0) == 0.0);
  CHECK_FALSE(self.scaled);

  const EmbeddingSet two = set_of(1, {rec(1, Modality::Visible, {0.0}),
                                      rec(2, Modality::Infrared, {1.0})});
  const DistanceMap map = pairwise_distances(two, two);
  CHECK(map.entries(0, 0) == 0.0);
  CHECK(map.entries(0, 1) == 1.0);
  CHECK(map.entries(1, 0) == 1.0);
  CHECK(map.entries(1, 1) == 0.0);
  CHECK(map.row_modality == std::vector<Modality>{Modality::Visible, Modality::Infrared});
}

TEST_CASE("pairwise_distances matches the scalar double loop") {
  Rng rng(42);
  EmbeddingSet rows(3), cols(3);
  for (int i = 0; i < 5; ++i) {
    rows.add(rec(i, Modality::Visible, {rng.gaussian(), rng.gaussian(), rng.gaussian()}));
  }
  for (int j = 0; j < 7; ++j) {
    cols.add(rec(j, Modality::Infrared, {rng.gaussian(), rng.gaussian(), rng.gaussian()}));
  }
  const DistanceMap fast = pairwise_distances(rows, cols);
  const DistanceMap slow = reference::pairwise_distances_naive(rows, cols);
  CHECK(testutil::bits_equal(fast.entries, slow.entries));
}

TEST_CASE("pairwise self map is symmetric with zero diagonal") {
  const auto batch = testutil::random_batch(4, 3, 6, 9);
  const DistanceMap map = pairwise_distances(batch.set, batch.set);
  for (std::size_t i = 0; i < map.rows(); ++i) {
    CHECK(map.entries(i, i) == 0.0);
    for (std::size_t j = 0; j < map.cols(); ++j) {
      CHECK(map.entries(i, j) == map.entries(j, i));
    }
  }
  // Also bit-equal to the reference, which takes the plain full-loop path.
  const DistanceMap slow = reference::pairwise_distances_naive(batch.set, batch.set);
  CHECK(testutil::bits_equal(map.entries, slow.entries));
}

TEST_CASE("pairwise_distances rejects empty and mismatched sets") {
  const EmbeddingSet empty(3);
  const EmbeddingSet one = set_of(3, {rec(1, Modality::Visible, {1.0, 2.0, 3.0})});
  CHECK_THROWS_AS(pairwise_distances(empty, one), Error);
  const EmbeddingSet other_dim = set_of(2, {rec(1, Modality::Visible, {1.0, 2.0})});
  CHECK_THROWS_AS(pairwise_distances(one, other_dim), Error);
}

TEST_CASE("EmbeddingSet validates records") {
  EmbeddingSet set(2);
  CHECK_THROWS_AS(set.add(rec(1, Modality::Visible, {1.0})), Error);
  CHECK_THROWS_AS(set.add(rec(1, Modality::Visible,
                              {1.0, std::numeric_limits<double>::quiet_NaN()})),
                  Error);
  CHECK_THROWS_AS(EmbeddingSet(0), Error);
  set.add(rec(7, Modality::Infrared, {1.0, 2.0}));
  CHECK(set.size() == 1);
  CHECK(set.identity(0) == 7);
  CHECK_FALSE(set.camera(0).has_value());
}

TEST_CASE("MiniBatch::from_set reorders into canonical order") {
  // Scrambled input: ids out of order, modalities interleaved.
  const EmbeddingSet scrambled = set_of(1, {
      rec(5, Modality::Infrared, {1.0}),
      rec(2, Modality::Visible, {2.0}),
      rec(5, Modality::Visible, {3.0}),
      rec(2, Modality::Infrared, {4.0}),
  });
  const MiniBatch batch = MiniBatch::from_set(scrambled);
  CHECK(batch.num_identities == 2);
  CHECK(batch.samples_per_modality == 1);
  CHECK(batch.identity_label(0) == 2);
  CHECK(batch.identity_label(1) == 5);
  CHECK(batch.set.feature(batch.record_index(0, Modality::Visible, 0))[0] == 2.0);
  CHECK(batch.set.feature(batch.record_index(0, Modality::Infrared, 0))[0] == 4.0);
  CHECK(batch.set.feature(batch.record_index(1, Modality::Visible, 0))[0] == 3.0);
  CHECK(batch.set.feature(batch.record_index(1, Modality::Infrared, 0))[0] == 1.0);
}

TEST_CASE("MiniBatch::from_set rejects ragged and single-identity sets") {
  const EmbeddingSet single = set_of(1, {rec(1, Modality::Visible, {0.0}),
                                         rec(1, Modality::Infrared, {1.0})});
  CHECK_THROWS_AS(MiniBatch::from_set(single), Error);

  const EmbeddingSet ragged = set_of(1, {
      rec(1, Modality::Visible, {0.0}),
      rec(1, Modality::Infrared, {1.0}),
      rec(2, Modality::Visible, {2.0}),
      rec(2, Modality::Visible, {2.5}),
      rec(2, Modality::Infrared, {3.0}),
  });
  CHECK_THROWS_AS(MiniBatch::from_set(ragged), Error);

  const EmbeddingSet missing_modality = set_of(1, {
      rec(1, Modality::Visible, {0.0}),
      rec(2, Modality::Visible, {2.0}),
  });
  CHECK_THROWS_AS(MiniBatch::from_set(missing_modality), Error);
}

TEST_CASE("pairwise_distances is deterministic across calls") {
  const auto batch = testutil::random_batch(3, 2, 5, 123);
  const DistanceMap a = pairwise_distances(batch.set, batch.set);
  const DistanceMap b = pairwise_distances(batch.set, batch.set);
  CHECK(testutil::bits_equal(a.entries, b.entries));
}

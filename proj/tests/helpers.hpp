#pragma once

#include <cstring>
#include <initializer_list>
#include <vector>

#include "mmreid/core.hpp"
#include "mmreid/io.hpp"

namespace testutil {

inline mmreid::SampleRecord rec(std::uint32_t id, mmreid::Modality m,
                                std::vector<double> feature) {
  mmreid::SampleRecord r;
  r.identity = id;
  r.modality = m;
  r.feature = std::move(feature);
  return r;
}

inline mmreid::EmbeddingSet set_of(std::size_t dim,
                                   std::initializer_list<mmreid::SampleRecord> records) {
  mmreid::EmbeddingSet set(dim);
  for (const auto& r : records) {
    set.add(r);
  }
  return set;
}

// The 1-D P=2, K=2 batch used by several hand-worked cases: centers come out
// at 0.1 / 0.5 (identity 1) and 0.6 / 1.0 (identity 2).
inline mmreid::MiniBatch worked_batch() {
  using mmreid::Modality;
  return mmreid::MiniBatch::from_set(set_of(1, {
      rec(1, Modality::Visible, {0.0}),
      rec(1, Modality::Visible, {0.2}),
      rec(1, Modality::Infrared, {0.4}),
      rec(1, Modality::Infrared, {0.6}),
      rec(2, Modality::Visible, {0.5}),
      rec(2, Modality::Visible, {0.7}),
      rec(2, Modality::Infrared, {0.9}),
      rec(2, Modality::Infrared, {1.1}),
  }));
}

inline mmreid::MiniBatch random_batch(std::size_t p, std::size_t k, std::size_t d,
                                      std::uint64_t seed, double sigma_id = 0.4,
                                      double sigma_mod = 0.6) {
  mmreid::SynthSpec spec;
  spec.identities = p;
  spec.samples_per_modality = k;
  spec.dimension = d;
  spec.sigma_identity = sigma_id;
  spec.sigma_modality = sigma_mod;
  spec.seed = seed;
  return mmreid::MiniBatch::from_set(mmreid::generate_synthetic(spec));
}

inline bool bits_equal(const mmreid::Matrix& a, const mmreid::Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.data().empty() ||
          std::memcmp(a.data().data(), b.data().data(),
                      a.data().size() * sizeof(double)) == 0);
}

}  // namespace testutil

#include "mmreid/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

namespace mmreid {

const char* modality_name(Modality m) {
  return m == Modality::Visible ? "visible" : "infrared";
}

EmbeddingSet::EmbeddingSet(std::size_t dimension)
    : dimension_(dimension), features_(0, dimension) {
  if (dimension == 0) {
    throw Error(ErrorCode::zero_dimension, "embedding dimension must be positive");
  }
}

void EmbeddingSet::add(const SampleRecord& rec) {
  if (rec.feature.size() != dimension_) {
    throw Error(ErrorCode::dimension_mismatch,
                "record has dimension " + std::to_string(rec.feature.size()) +
                    ", set expects " + std::to_string(dimension_));
  }
  for (double v : rec.feature) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::non_finite_value,
                  "record " + std::to_string(size()) + " holds a non-finite component");
    }
  }
  features_.append_row(rec.feature);
  identities_.push_back(rec.identity);
  modalities_.push_back(rec.modality);
  cameras_.push_back(rec.camera);
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::size_t> indices) const {
  EmbeddingSet out(dimension_);
  out.features_ = Matrix(indices.size(), dimension_);
  out.identities_.reserve(indices.size());
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const std::size_t i = indices[pos];
    if (i >= size()) {
      throw Error(ErrorCode::invalid_argument,
                  "subset index " + std::to_string(i) + " out of range");
    }
    std::copy(features_.row(i), features_.row(i) + dimension_, out.features_.row(pos));
    out.identities_.push_back(identities_[i]);
    out.modalities_.push_back(modalities_[i]);
    out.cameras_.push_back(cameras_[i]);
  }
  return out;
}

void EmbeddingSet::replace_feature(std::size_t i, std::span<const double> values) {
  if (i >= size()) {
    throw Error(ErrorCode::invalid_argument, "feature index out of range");
  }
  if (values.size() != dimension_) {
    throw Error(ErrorCode::dimension_mismatch, "replacement has wrong dimension");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::non_finite_value, "replacement holds a non-finite component");
    }
  }
  std::copy(values.begin(), values.end(), features_.row(i));
}

MiniBatch MiniBatch::from_set(const EmbeddingSet& s) {
  if (s.empty()) {
    throw Error(ErrorCode::empty_set, "cannot build a batch from an empty set");
  }
  // Bucket record indices per identity and modality, preserving input order.
  std::map<std::uint32_t, std::array<std::vector<std::size_t>, 2>> buckets;
  for (std::size_t i = 0; i < s.size(); ++i) {
    buckets[s.identity(i)][static_cast<std::size_t>(s.modality(i))].push_back(i);
  }
  if (buckets.size() < 2) {
    throw Error(ErrorCode::single_identity,
                "batch needs at least two identities, got " + std::to_string(buckets.size()));
  }
  const std::size_t k = buckets.begin()->second[0].size();
  if (k == 0) {
    throw Error(ErrorCode::batch_invalid, "identity " +
                    std::to_string(buckets.begin()->first) + " has no visible samples");
  }
  std::vector<std::size_t> order;
  order.reserve(s.size());
  for (const auto& [id, per_mod] : buckets) {
    if (per_mod[0].size() != k || per_mod[1].size() != k) {
      throw Error(ErrorCode::batch_invalid,
                  "identity " + std::to_string(id) + " has " +
                      std::to_string(per_mod[0].size()) + " visible and " +
                      std::to_string(per_mod[1].size()) + " infrared samples, expected " +
                      std::to_string(k) + " of each");
    }
    order.insert(order.end(), per_mod[0].begin(), per_mod[0].end());
    order.insert(order.end(), per_mod[1].begin(), per_mod[1].end());
  }
  MiniBatch batch{s.subset(order), buckets.size(), k};
  return batch;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "distance between vectors of dimension " + std::to_string(a.size()) +
                    " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

DistanceMap pairwise_distances(const EmbeddingSet& rows, const EmbeddingSet& cols) {
  if (rows.empty() || cols.empty()) {
    throw Error(ErrorCode::empty_set, "pairwise distances need non-empty sets");
  }
  if (rows.dimension() != cols.dimension()) {
    throw Error(ErrorCode::dimension_mismatch,
                "row set has dimension " + std::to_string(rows.dimension()) +
                    ", column set " + std::to_string(cols.dimension()));
  }
  DistanceMap map;
  map.entries = Matrix(rows.size(), cols.size());
  map.row_modality = rows.modalities();
  map.col_modality = cols.modalities();

  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = cols.size();
  if (&rows == &cols) {
    // Self map: fill the upper triangle and mirror, diagonal stays zero.
    #pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_rows); ++i) {
      const auto a = rows.feature(static_cast<std::size_t>(i));
      for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n_cols; ++j) {
        const double d = euclidean_distance(a, cols.feature(j));
        map.entries(static_cast<std::size_t>(i), j) = d;
        map.entries(j, static_cast<std::size_t>(i)) = d;
      }
    }
    return map;
  }
  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_rows); ++i) {
    const auto a = rows.feature(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < n_cols; ++j) {
      map.entries(static_cast<std::size_t>(i), j) = euclidean_distance(a, cols.feature(j));
    }
  }
  return map;
}

}  // namespace mmreid

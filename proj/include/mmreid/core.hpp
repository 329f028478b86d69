#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmreid/error.hpp"

namespace mmreid {

// Capture modality of a sample. Visible orders before Infrared everywhere a
// fixed scan order matters (center layout, negative mining, splits).
enum class Modality : std::uint8_t {
  Visible = 0,
  Infrared = 1,
};

const char* modality_name(Modality m);

// One labelled embedding as it arrives from ingest. The feature vector is
// stored as double internally regardless of the on-disk width.
struct SampleRecord {
  std::uint32_t identity = 0;
  Modality modality = Modality::Visible;
  std::optional<std::uint16_t> camera;
  std::vector<double> feature;
};

// Dense row-major matrix of doubles. Deliberately minimal: the kernels in
// this project want raw row pointers and a fixed memory layout, nothing more.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::span<const double> row_span(std::size_t r) const {
    return std::span<const double>(row(r), cols_);
  }

  // Appends one row; the span length must equal cols(). Amortized O(cols).
  void append_row(std::span<const double> values) {
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A collection of labelled embeddings with a single shared dimension.
// Features live in one contiguous row-major block; labels are kept in
// parallel arrays indexed by record position.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::size_t dimension);

  // Validates dimension and finiteness; throws Error otherwise.
  void add(const SampleRecord& rec);

  std::size_t size() const { return identities_.size(); }
  std::size_t dimension() const { return dimension_; }
  bool empty() const { return identities_.empty(); }

  std::uint32_t identity(std::size_t i) const { return identities_[i]; }
  Modality modality(std::size_t i) const { return modalities_[i]; }
  std::optional<std::uint16_t> camera(std::size_t i) const { return cameras_[i]; }
  std::span<const double> feature(std::size_t i) const { return features_.row_span(i); }

  const Matrix& features() const { return features_; }
  const std::vector<std::uint32_t>& identities() const { return identities_; }
  const std::vector<Modality>& modalities() const { return modalities_; }

  // New set containing the given records, in the given order.
  EmbeddingSet subset(std::span<const std::size_t> indices) const;

  // Used by numerical checks that re-evaluate a loss under perturbation.
  // The replacement must keep the set's dimension and stay finite.
  void replace_feature(std::size_t i, std::span<const double> values);

 private:
  std::size_t dimension_;
  Matrix features_;
  std::vector<std::uint32_t> identities_;
  std::vector<Modality> modalities_;
  std::vector<std::optional<std::uint16_t>> cameras_;
};

// A P x K x 2 training batch in canonical record order: identities in
// ascending label order, and within an identity the K visible samples
// followed by the K infrared ones.
struct MiniBatch {
  EmbeddingSet set;
  std::size_t num_identities = 0;       // P
  std::size_t samples_per_modality = 0; // K

  // Reorders an arbitrary set into canonical order. Throws batch_invalid if
  // the counts are not uniform across identities and modalities, or
  // single_identity if P < 2.
  static MiniBatch from_set(const EmbeddingSet& s);

  std::size_t record_index(std::size_t p, Modality m, std::size_t k) const {
    std::size_t base = p * 2 * samples_per_modality;
    if (m == Modality::Infrared) base += samples_per_modality;
    return base + k;
  }

  std::uint32_t identity_label(std::size_t p) const {
    return set.identity(p * 2 * samples_per_modality);
  }

  std::size_t total_records() const { return 2 * num_identities * samples_per_modality; }
};

// Rectangular distance map between two sets, annotated with the modality of
// every row and column so the re-ranking stage can tell same-modality edges
// from cross-modality ones. `scaled` flips once the same-modality scaling has
// been applied; it guards against applying it twice.
struct DistanceMap {
  Matrix entries;
  std::vector<Modality> row_modality;
  std::vector<Modality> col_modality;
  bool scaled = false;

  std::size_t rows() const { return entries.rows(); }
  std::size_t cols() const { return entries.cols(); }
};

struct LossConfig {
  double margin = 0.3;   // hinge margin m
  double delta = 0.2;    // weight of the hard-mining term
};

struct ReRankConfig {
  double lambda = 0.999; // same-modality scaling factor
};

// Plain Euclidean distance. Throws dimension_mismatch on ragged input.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// All-pairs distances between two sets. Rows follow `rows`, columns follow
// `cols`. Passing the same object for both produces an exactly symmetric
// map with a zero diagonal. Throws empty_set / dimension_mismatch.
DistanceMap pairwise_distances(const EmbeddingSet& rows, const EmbeddingSet& cols);

}  // namespace mmreid

#pragma once

#include <cstdint>
#include <vector>

#include "mmreid/core.hpp"

namespace mmreid {

// Assignment policy for what stays in the gallery. MultiShotAll keeps every
// image not drawn into the query; no single-shot subsampling.
enum class GalleryPolicy : std::uint8_t {
  MultiShotAll = 0,
};

// Mixing ratio a:b. For each identity, round_half_up(a/(a+b) * n_visible)
// visible images and round_half_up(b/(a+b) * n_infrared) infrared images go
// to the query; the remainder forms the gallery.
struct SplitSpec {
  std::uint32_t ratio_visible = 3;   // a
  std::uint32_t ratio_infrared = 7;  // b
  std::uint64_t seed = 0;
  GalleryPolicy policy = GalleryPolicy::MultiShotAll;
};

struct IdentitySplitCounts {
  std::uint32_t identity = 0;
  std::size_t visible_in_query = 0;
  std::size_t infrared_in_query = 0;
  std::size_t visible_in_gallery = 0;
  std::size_t infrared_in_gallery = 0;
};

// Disjoint query/gallery membership over one pool. Index vectors are
// ascending pool indices; per_identity is ordered by ascending identity.
struct SplitResult {
  std::vector<std::size_t> query_indices;
  std::vector<std::size_t> gallery_indices;
  std::vector<IdentitySplitCounts> per_identity;
  SplitSpec spec;
};

// Deterministic seeded split. Identities are processed in ascending label
// order; within an identity the visible pool is shuffled and drawn first,
// then the infrared pool. Query counts depend only on the ratio and the
// per-identity image counts, never on the seed. Throws split_infeasible when
// an identity would end up queried but absent from the gallery.
SplitResult build_split(const EmbeddingSet& pool, const SplitSpec& spec);

// Half-up rounding of the exact rational num/den * count, in integers.
std::size_t split_quota(std::uint64_t num, std::uint64_t den, std::uint64_t count);

}  // namespace mmreid

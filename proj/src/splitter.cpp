#include "mmreid/splitter.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <string>

#include "mmreid/rng.hpp"

namespace mmreid {

std::size_t split_quota(std::uint64_t num, std::uint64_t den, std::uint64_t count) {
  // round-half-up(num / den * count) in exact integer arithmetic:
  // floor((2 * num * count + den) / (2 * den)).
  const unsigned __int128 numerator =
      static_cast<unsigned __int128>(2) * num * count + den;
  return static_cast<std::size_t>(numerator / (static_cast<unsigned __int128>(2) * den));
}

SplitResult build_split(const EmbeddingSet& pool, const SplitSpec& spec) {
  if (pool.empty()) {
    throw Error(ErrorCode::empty_set, "cannot split an empty pool");
  }
  const std::uint64_t den =
      static_cast<std::uint64_t>(spec.ratio_visible) + spec.ratio_infrared;
  if (den == 0) {
    throw Error(ErrorCode::invalid_argument, "ratio 0:0 is undefined");
  }
  if (spec.policy != GalleryPolicy::MultiShotAll) {
    throw Error(ErrorCode::invalid_argument, "unknown gallery policy");
  }

  // Pool indices per identity and modality, identities ascending, indices
  // ascending within a bucket.
  std::map<std::uint32_t, std::array<std::vector<std::size_t>, 2>> buckets;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    buckets[pool.identity(i)][static_cast<std::size_t>(pool.modality(i))].push_back(i);
  }

  SplitResult result;
  result.spec = spec;
  Rng rng(spec.seed);

  for (auto& [id, per_mod] : buckets) {
    auto& visible = per_mod[static_cast<std::size_t>(Modality::Visible)];
    auto& infrared = per_mod[static_cast<std::size_t>(Modality::Infrared)];

    // The quota depends only on the ratio and the image counts; the seed
    // decides membership, never size.
    const std::size_t q_visible = split_quota(spec.ratio_visible, den, visible.size());
    const std::size_t q_infrared = split_quota(spec.ratio_infrared, den, infrared.size());

    rng.shuffle(visible);
    rng.shuffle(infrared);

    IdentitySplitCounts counts;
    counts.identity = id;
    counts.visible_in_query = q_visible;
    counts.infrared_in_query = q_infrared;
    counts.visible_in_gallery = visible.size() - q_visible;
    counts.infrared_in_gallery = infrared.size() - q_infrared;

    const std::size_t in_query = q_visible + q_infrared;
    const std::size_t in_gallery = counts.visible_in_gallery + counts.infrared_in_gallery;
    if (in_query > 0 && in_gallery == 0) {
      throw Error(ErrorCode::split_infeasible,
                  "identity " + std::to_string(id) +
                      ": every image would land in the query, leaving it matchless");
    }

    result.query_indices.insert(result.query_indices.end(), visible.begin(),
                                visible.begin() + q_visible);
    result.gallery_indices.insert(result.gallery_indices.end(),
                                  visible.begin() + q_visible, visible.end());
    result.query_indices.insert(result.query_indices.end(), infrared.begin(),
                                infrared.begin() + q_infrared);
    result.gallery_indices.insert(result.gallery_indices.end(),
                                  infrared.begin() + q_infrared, infrared.end());
    result.per_identity.push_back(counts);
  }

  std::sort(result.query_indices.begin(), result.query_indices.end());
  std::sort(result.gallery_indices.begin(), result.gallery_indices.end());
  return result;
}

}  // namespace mmreid

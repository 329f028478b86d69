#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "mmreid/core.hpp"
#include "mmreid/mbsos.hpp"
#include "mmreid/metrics.hpp"
#include "mmreid/splitter.hpp"

namespace mmreid {

// Seeded synthetic corpus: P identity anchors drawn from a standard normal,
// a shared unit modality-offset direction, and per-record Gaussian noise.
// Visible samples sit at anchor + sigma_modality * u, infrared ones at
// anchor - sigma_modality * u. Records come out in canonical batch order.
struct SynthSpec {
  std::size_t identities = 8;
  std::size_t samples_per_modality = 4;
  std::size_t dimension = 16;
  double sigma_identity = 0.1;
  double sigma_modality = 0.5;
  std::uint64_t seed = 0;
};

EmbeddingSet generate_synthetic(const SynthSpec& spec);

// Binary feature container, little-endian throughout:
//   magic "MMRE" | version u32 | dimension u32 | count u64
// then per record: identity u32, modality u8, camera u16 (0xFFFF = absent),
// dimension * f32. Loading widens features to double; saving narrows.
void save_features(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet load_features(const std::filesystem::path& path);

// CSV twin of the binary container. Header `id,modality,camera,f1..fD`;
// camera empty when absent; features printed with %.9g so the narrowed
// f32 values round-trip exactly and both loaders agree bit-for-bit.
void save_features_csv(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet load_features_csv(const std::filesystem::path& path);

// Picks the loader from the file extension (.csv vs anything else).
EmbeddingSet load_features_auto(const std::filesystem::path& path);

// Distance-map container ("MMRM"): shape, scaled flag, row/col modalities,
// f64 entries, optionally the bridge argmin plane.
void save_distance_map(const DistanceMap& map, const std::filesystem::path& path);
DistanceMap load_distance_map(const std::filesystem::path& path);

struct BridgedMapFile {
  DistanceMap map;  // bridged entries, scaled == true
  std::vector<std::uint32_t> argmin_bridge;
};

void save_bridged_map(const OptimizedDistanceMap& map, const std::filesystem::path& path);
BridgedMapFile load_bridged_map(const std::filesystem::path& path);

// JSON artifacts. `config` is embedded verbatim so every report carries the
// fully-resolved options that produced it.
void save_split_json(const SplitResult& split, const EmbeddingSet& pool,
                     const nlohmann::ordered_json& config,
                     const std::filesystem::path& path);
SplitResult load_split_json(const std::filesystem::path& path);

void save_eval_report_json(const EvalReport& report, const nlohmann::ordered_json& config,
                           const std::filesystem::path& path);
void save_eval_report_csv(const EvalReport& report, const nlohmann::ordered_json& config,
                          const std::filesystem::path& path);

}  // namespace mmreid

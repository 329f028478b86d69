#include "mmreid/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "mmreid/rng.hpp"
#include "mmreid/version.hpp"

namespace mmreid {

namespace {

using Bytes = std::vector<unsigned char>;
using nlohmann::ordered_json;

constexpr std::uint32_t kFeatureVersion = 1;
constexpr std::uint32_t kMapVersion = 1;
constexpr std::uint16_t kCameraAbsent = 0xFFFF;

void put_u16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xff));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(Bytes& b, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) {
    b.push_back(static_cast<unsigned char>((v >> s) & 0xff));
  }
}

void put_u64(Bytes& b, std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) {
    b.push_back(static_cast<unsigned char>((v >> s) & 0xff));
  }
}

void put_f32(Bytes& b, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(b, bits);
}

void put_f64(Bytes& b, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(b, bits);
}

struct ByteReader {
  const Bytes& data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (data.size() - pos < n) {
      throw Error(ErrorCode::truncated_payload,
                  "file ends " + std::to_string(n - (data.size() - pos)) + " bytes short");
    }
  }

  std::uint8_t u8() {
    need(1);
    return data[pos++];
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data[pos] | (data[pos + 1] << 8));
    pos += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
    }
    pos += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
    }
    pos += 8;
    return v;
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
};

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  }
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::io_failure, "read failed on " + path.string());
  }
  return data;
}

void write_file(const std::filesystem::path& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_failure, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw Error(ErrorCode::io_failure, "write failed on " + path.string());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_failure, "cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    throw Error(ErrorCode::io_failure, "write failed on " + path.string());
  }
}

Modality modality_from_byte(std::uint8_t b) {
  if (b > 1) {
    throw Error(ErrorCode::malformed_record,
                "modality byte " + std::to_string(b) + " is neither 0 nor 1");
  }
  return static_cast<Modality>(b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::uint64_t parse_unsigned(const std::string& field, std::uint64_t max,
                             const char* what, std::size_t line_no) {
  if (field.empty()) {
    throw Error(ErrorCode::malformed_csv,
                std::string("empty ") + what + " on line " + std::to_string(line_no));
  }
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
  if (errno != 0 || end != field.c_str() + field.size() || v > max) {
    throw Error(ErrorCode::malformed_csv,
                std::string("bad ") + what + " '" + field + "' on line " +
                    std::to_string(line_no));
  }
  return v;
}

}  // namespace

EmbeddingSet generate_synthetic(const SynthSpec& spec) {
  if (spec.identities == 0 || spec.samples_per_modality == 0 || spec.dimension == 0) {
    throw Error(ErrorCode::invalid_argument, "synthetic counts must be positive");
  }
  if (!(spec.sigma_identity >= 0.0) || !(spec.sigma_modality >= 0.0) ||
      !std::isfinite(spec.sigma_identity) || !std::isfinite(spec.sigma_modality)) {
    throw Error(ErrorCode::invalid_argument, "sigmas must be finite and non-negative");
  }

  Rng rng(spec.seed);
  const std::size_t d = spec.dimension;

  // Shared modality offset direction: one normalized Gaussian draw.
  std::vector<double> direction(d);
  double norm = 0.0;
  for (double& v : direction) {
    v = rng.gaussian();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    direction[0] = 1.0;
    norm = 1.0;
  }
  for (double& v : direction) v /= norm;

  Matrix anchors(spec.identities, d);
  for (std::size_t i = 0; i < spec.identities; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      anchors(i, c) = rng.gaussian();
    }
  }

  EmbeddingSet set(d);
  SampleRecord rec;
  rec.feature.resize(d);
  for (std::size_t i = 0; i < spec.identities; ++i) {
    for (Modality m : {Modality::Visible, Modality::Infrared}) {
      const double sign = m == Modality::Visible ? 1.0 : -1.0;
      for (std::size_t s = 0; s < spec.samples_per_modality; ++s) {
        rec.identity = static_cast<std::uint32_t>(i);
        rec.modality = m;
        rec.camera.reset();
        for (std::size_t c = 0; c < d; ++c) {
          rec.feature[c] = anchors(i, c) + sign * spec.sigma_modality * direction[c] +
                           spec.sigma_identity * rng.gaussian();
        }
        set.add(rec);
      }
    }
  }
  return set;
}

void save_features(const EmbeddingSet& set, const std::filesystem::path& path) {
  if (set.empty()) {
    throw Error(ErrorCode::empty_set, "refusing to save an empty feature set");
  }
  Bytes data;
  data.reserve(20 + set.size() * (7 + 4 * set.dimension()));
  data.push_back('M');
  data.push_back('M');
  data.push_back('R');
  data.push_back('E');
  put_u32(data, kFeatureVersion);
  put_u32(data, static_cast<std::uint32_t>(set.dimension()));
  put_u64(data, set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    put_u32(data, set.identity(i));
    data.push_back(static_cast<unsigned char>(set.modality(i)));
    const auto camera = set.camera(i);
    if (camera && *camera == kCameraAbsent) {
      throw Error(ErrorCode::invalid_argument,
                  "camera id 65535 is reserved for 'absent'");
    }
    put_u16(data, camera ? *camera : kCameraAbsent);
    for (double v : set.feature(i)) {
      const float narrow = static_cast<float>(v);
      if (!std::isfinite(narrow)) {
        throw Error(ErrorCode::non_finite_value,
                    "record " + std::to_string(i) + " does not fit in f32");
      }
      put_f32(data, narrow);
    }
  }
  write_file(path, data);
}

EmbeddingSet load_features(const std::filesystem::path& path) {
  const Bytes data = read_file(path);
  ByteReader reader{data};
  reader.need(4);
  if (data[0] != 'M' || data[1] != 'M' || data[2] != 'R' || data[3] != 'E') {
    throw Error(ErrorCode::bad_magic, path.string() + " is not a feature file");
  }
  reader.pos = 4;
  const std::uint32_t version = reader.u32();
  if (version != kFeatureVersion) {
    throw Error(ErrorCode::bad_version,
                "feature file version " + std::to_string(version) + ", expected " +
                    std::to_string(kFeatureVersion));
  }
  const std::uint32_t dim = reader.u32();
  if (dim == 0) {
    throw Error(ErrorCode::zero_dimension, "feature file declares dimension 0");
  }
  const std::uint64_t count = reader.u64();
  const std::uint64_t expected = 20 + count * (7 + 4 * static_cast<std::uint64_t>(dim));
  if (data.size() != expected) {
    throw Error(ErrorCode::truncated_payload,
                "file holds " + std::to_string(data.size()) + " bytes, header implies " +
                    std::to_string(expected));
  }

  EmbeddingSet set(dim);
  SampleRecord rec;
  rec.feature.resize(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    rec.identity = reader.u32();
    rec.modality = modality_from_byte(reader.u8());
    const std::uint16_t camera = reader.u16();
    if (camera == kCameraAbsent) {
      rec.camera.reset();
    } else {
      rec.camera = camera;
    }
    for (std::uint32_t c = 0; c < dim; ++c) {
      const float v = reader.f32();
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::non_finite_value,
                    "record " + std::to_string(i) + " holds a non-finite feature");
      }
      rec.feature[c] = static_cast<double>(v);
    }
    set.add(rec);
  }
  return set;
}

void save_features_csv(const EmbeddingSet& set, const std::filesystem::path& path) {
  if (set.empty()) {
    throw Error(ErrorCode::empty_set, "refusing to save an empty feature set");
  }
  std::string text = "id,modality,camera";
  for (std::size_t c = 0; c < set.dimension(); ++c) {
    text += ",f" + std::to_string(c + 1);
  }
  text += '\n';
  char buf[64];
  for (std::size_t i = 0; i < set.size(); ++i) {
    text += std::to_string(set.identity(i));
    text += set.modality(i) == Modality::Visible ? ",0," : ",1,";
    const auto camera = set.camera(i);
    if (camera) {
      if (*camera == kCameraAbsent) {
        throw Error(ErrorCode::invalid_argument, "camera id 65535 is reserved for 'absent'");
      }
      text += std::to_string(*camera);
    }
    for (double v : set.feature(i)) {
      const float narrow = static_cast<float>(v);
      if (!std::isfinite(narrow)) {
        throw Error(ErrorCode::non_finite_value,
                    "record " + std::to_string(i) + " does not fit in f32");
      }
      // %.9g reproduces any f32 exactly, so the CSV and binary loaders
      // agree bit-for-bit.
      std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<double>(narrow));
      text += buf;
    }
    text += '\n';
  }
  write_text(path, text);
}

EmbeddingSet load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::malformed_csv, path.string() + " has no header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "modality" ||
      header[2] != "camera") {
    throw Error(ErrorCode::malformed_csv, "header must start with id,modality,camera");
  }
  const std::size_t dim = header.size() - 3;
  if (dim == 0) {
    throw Error(ErrorCode::zero_dimension, "header declares no feature columns");
  }
  for (std::size_t c = 0; c < dim; ++c) {
    if (header[3 + c] != "f" + std::to_string(c + 1)) {
      throw Error(ErrorCode::malformed_csv,
                  "feature column " + std::to_string(c + 1) + " is named '" +
                      header[3 + c] + "'");
    }
  }

  EmbeddingSet set(dim);
  SampleRecord rec;
  rec.feature.resize(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 3 + dim) {
      throw Error(ErrorCode::malformed_csv,
                  "line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(3 + dim));
    }
    rec.identity =
        static_cast<std::uint32_t>(parse_unsigned(fields[0], UINT32_MAX, "id", line_no));
    const std::uint64_t mod = parse_unsigned(fields[1], 1, "modality", line_no);
    rec.modality = static_cast<Modality>(mod);
    if (fields[2].empty()) {
      rec.camera.reset();
    } else {
      const std::uint64_t cam = parse_unsigned(fields[2], 0xFFFE, "camera", line_no);
      rec.camera = static_cast<std::uint16_t>(cam);
    }
    for (std::size_t c = 0; c < dim; ++c) {
      const std::string& field = fields[3 + c];
      if (field.empty()) {
        throw Error(ErrorCode::malformed_csv,
                    "empty feature on line " + std::to_string(line_no));
      }
      char* end = nullptr;
      errno = 0;
      const float v = std::strtof(field.c_str(), &end);
      if (end != field.c_str() + field.size()) {
        throw Error(ErrorCode::malformed_csv,
                    "bad feature '" + field + "' on line " + std::to_string(line_no));
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::non_finite_value,
                    "non-finite feature on line " + std::to_string(line_no));
      }
      rec.feature[c] = static_cast<double>(v);
    }
    set.add(rec);
  }
  if (in.bad()) {
    throw Error(ErrorCode::io_failure, "read failed on " + path.string());
  }
  return set;
}

EmbeddingSet load_features_auto(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    return load_features_csv(path);
  }
  return load_features(path);
}

namespace {

void append_map_body(Bytes& data, const Matrix& entries,
                     const std::vector<Modality>& row_modality,
                     const std::vector<Modality>& col_modality, bool scaled,
                     const std::vector<std::uint32_t>* argmin) {
  data.push_back('M');
  data.push_back('M');
  data.push_back('R');
  data.push_back('M');
  put_u32(data, kMapVersion);
  put_u64(data, entries.rows());
  put_u64(data, entries.cols());
  data.push_back(scaled ? 1 : 0);
  data.push_back(argmin ? 1 : 0);
  for (Modality m : row_modality) data.push_back(static_cast<unsigned char>(m));
  for (Modality m : col_modality) data.push_back(static_cast<unsigned char>(m));
  for (double v : entries.data()) put_f64(data, v);
  if (argmin) {
    for (std::uint32_t v : *argmin) put_u32(data, v);
  }
}

struct MapFileContents {
  DistanceMap map;
  std::vector<std::uint32_t> argmin;
  bool has_argmin = false;
};

MapFileContents load_map_file(const std::filesystem::path& path) {
  const Bytes data = read_file(path);
  ByteReader reader{data};
  reader.need(4);
  if (data[0] != 'M' || data[1] != 'M' || data[2] != 'R' || data[3] != 'M') {
    throw Error(ErrorCode::bad_magic, path.string() + " is not a distance-map file");
  }
  reader.pos = 4;
  const std::uint32_t version = reader.u32();
  if (version != kMapVersion) {
    throw Error(ErrorCode::bad_version,
                "map file version " + std::to_string(version) + ", expected " +
                    std::to_string(kMapVersion));
  }
  const std::uint64_t rows = reader.u64();
  const std::uint64_t cols = reader.u64();
  const std::uint8_t scaled = reader.u8();
  const std::uint8_t has_argmin = reader.u8();
  if (scaled > 1 || has_argmin > 1) {
    throw Error(ErrorCode::malformed_record, "flag bytes must be 0 or 1");
  }
  const std::uint64_t cells = rows * cols;
  const std::uint64_t expected =
      26 + rows + cols + 8 * cells + (has_argmin ? 4 * cells : 0);
  if (data.size() != expected) {
    throw Error(ErrorCode::truncated_payload,
                "file holds " + std::to_string(data.size()) + " bytes, header implies " +
                    std::to_string(expected));
  }

  MapFileContents out;
  out.map.row_modality.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    out.map.row_modality.push_back(modality_from_byte(reader.u8()));
  }
  out.map.col_modality.reserve(cols);
  for (std::uint64_t j = 0; j < cols; ++j) {
    out.map.col_modality.push_back(modality_from_byte(reader.u8()));
  }
  out.map.entries = Matrix(rows, cols);
  for (double& v : out.map.entries.data()) {
    v = reader.f64();
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::non_finite_value, "map holds a non-finite entry");
    }
  }
  out.map.scaled = scaled == 1;
  out.has_argmin = has_argmin == 1;
  if (out.has_argmin) {
    out.argmin.reserve(cells);
    for (std::uint64_t i = 0; i < cells; ++i) {
      const std::uint32_t t = reader.u32();
      if (t >= cols) {
        throw Error(ErrorCode::malformed_record, "bridge index out of range");
      }
      out.argmin.push_back(t);
    }
  }
  return out;
}

}  // namespace

void save_distance_map(const DistanceMap& map, const std::filesystem::path& path) {
  if (map.row_modality.size() != map.rows() || map.col_modality.size() != map.cols()) {
    throw Error(ErrorCode::shape_mismatch, "modality annotations disagree with shape");
  }
  Bytes data;
  data.reserve(26 + map.rows() + map.cols() + 8 * map.rows() * map.cols());
  append_map_body(data, map.entries, map.row_modality, map.col_modality, map.scaled,
                  nullptr);
  write_file(path, data);
}

DistanceMap load_distance_map(const std::filesystem::path& path) {
  MapFileContents contents = load_map_file(path);
  if (contents.has_argmin) {
    throw Error(ErrorCode::malformed_record,
                path.string() + " carries a bridge plane; use load_bridged_map");
  }
  return std::move(contents.map);
}

void save_bridged_map(const OptimizedDistanceMap& map, const std::filesystem::path& path) {
  if (map.base.row_modality.size() != map.rows() ||
      map.base.col_modality.size() != map.cols() ||
      map.argmin_bridge.size() != map.rows() * map.cols()) {
    throw Error(ErrorCode::shape_mismatch, "bridged map pieces disagree on shape");
  }
  Bytes data;
  data.reserve(26 + map.rows() + map.cols() + 12 * map.rows() * map.cols());
  append_map_body(data, map.entries, map.base.row_modality, map.base.col_modality, true,
                  &map.argmin_bridge);
  write_file(path, data);
}

BridgedMapFile load_bridged_map(const std::filesystem::path& path) {
  MapFileContents contents = load_map_file(path);
  if (!contents.has_argmin) {
    throw Error(ErrorCode::malformed_record,
                path.string() + " has no bridge plane; use load_distance_map");
  }
  return BridgedMapFile{std::move(contents.map), std::move(contents.argmin)};
}

void save_split_json(const SplitResult& split, const EmbeddingSet& pool,
                     const ordered_json& config, const std::filesystem::path& path) {
  if (split.query_indices.size() + split.gallery_indices.size() != pool.size()) {
    throw Error(ErrorCode::shape_mismatch, "split does not cover the pool exactly");
  }
  std::vector<char> role(pool.size(), 0);
  for (std::size_t i : split.query_indices) {
    if (i >= pool.size()) {
      throw Error(ErrorCode::invalid_argument, "query index out of range");
    }
    role[i] = 1;
  }
  for (std::size_t i : split.gallery_indices) {
    if (i >= pool.size()) {
      throw Error(ErrorCode::invalid_argument, "gallery index out of range");
    }
    role[i] = 2;
  }

  ordered_json j;
  j["format"] = "mmreid.split";
  j["version"] = kVersion;
  j["config"] = config;
  j["ratio"] = {{"visible", split.spec.ratio_visible},
                {"infrared", split.spec.ratio_infrared}};
  j["seed"] = split.spec.seed;
  j["policy"] = "multi_shot_all";
  j["num_query"] = split.query_indices.size();
  j["num_gallery"] = split.gallery_indices.size();
  j["query_indices"] = split.query_indices;
  j["gallery_indices"] = split.gallery_indices;

  ordered_json per_identity = ordered_json::array();
  for (const IdentitySplitCounts& c : split.per_identity) {
    per_identity.push_back({{"identity", c.identity},
                            {"visible_in_query", c.visible_in_query},
                            {"infrared_in_query", c.infrared_in_query},
                            {"visible_in_gallery", c.visible_in_gallery},
                            {"infrared_in_gallery", c.infrared_in_gallery}});
  }
  j["per_identity"] = std::move(per_identity);

  ordered_json assignments = ordered_json::array();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (role[i] == 0) {
      throw Error(ErrorCode::shape_mismatch,
                  "pool index " + std::to_string(i) + " is in neither half");
    }
    ordered_json entry;
    entry["index"] = i;
    entry["identity"] = pool.identity(i);
    entry["modality"] = modality_name(pool.modality(i));
    const auto camera = pool.camera(i);
    if (camera) {
      entry["camera"] = *camera;
    } else {
      entry["camera"] = nullptr;
    }
    entry["assignment"] = role[i] == 1 ? "query" : "gallery";
    assignments.push_back(std::move(entry));
  }
  j["assignments"] = std::move(assignments);

  write_text(path, j.dump(2) + "\n");
}

SplitResult load_split_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  }
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_json, path.string() + ": " + e.what());
  }

  try {
    if (j.at("format").get<std::string>() != "mmreid.split") {
      throw Error(ErrorCode::malformed_json, path.string() + " is not a split file");
    }
    SplitResult result;
    result.spec.ratio_visible = j.at("ratio").at("visible").get<std::uint32_t>();
    result.spec.ratio_infrared = j.at("ratio").at("infrared").get<std::uint32_t>();
    result.spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.at("policy").get<std::string>() != "multi_shot_all") {
      throw Error(ErrorCode::malformed_json,
                  "unknown policy '" + j.at("policy").get<std::string>() + "'");
    }
    result.spec.policy = GalleryPolicy::MultiShotAll;
    result.query_indices = j.at("query_indices").get<std::vector<std::size_t>>();
    result.gallery_indices = j.at("gallery_indices").get<std::vector<std::size_t>>();
    if (j.contains("per_identity")) {
      for (const auto& entry : j.at("per_identity")) {
        IdentitySplitCounts c;
        c.identity = entry.at("identity").get<std::uint32_t>();
        c.visible_in_query = entry.at("visible_in_query").get<std::size_t>();
        c.infrared_in_query = entry.at("infrared_in_query").get<std::size_t>();
        c.visible_in_gallery = entry.at("visible_in_gallery").get<std::size_t>();
        c.infrared_in_gallery = entry.at("infrared_in_gallery").get<std::size_t>();
        result.per_identity.push_back(c);
      }
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_json, path.string() + ": " + e.what());
  }
}

namespace {

ordered_json eval_report_to_json(const EvalReport& report, const ordered_json& config) {
  ordered_json j;
  j["format"] = "mmreid.eval";
  j["version"] = kVersion;
  j["config"] = config;
  ordered_json ranks;
  for (const auto& [rank, fraction] : report.cmc) {
    ranks[std::to_string(rank)] = fraction;
  }
  j["ranks"] = std::move(ranks);
  j["mAP"] = report.mean_ap;
  j["mINP"] = report.mean_inp;
  j["num_queries"] = report.num_queries;
  j["num_valid_queries"] = report.num_valid_queries;
  ordered_json per_query = ordered_json::array();
  for (const PerQueryStats& s : report.per_query) {
    per_query.push_back({{"query", s.query_index},
                         {"ap", s.ap},
                         {"inp", s.inp},
                         {"first_match_rank", s.first_match_rank}});
  }
  j["per_query"] = std::move(per_query);
  return j;
}

}  // namespace

void save_eval_report_json(const EvalReport& report, const ordered_json& config,
                           const std::filesystem::path& path) {
  write_text(path, eval_report_to_json(report, config).dump(2) + "\n");
}

void save_eval_report_csv(const EvalReport& report, const ordered_json& config,
                          const std::filesystem::path& path) {
  std::string text = "# mmreid ";
  text += kVersion;
  text += "\n# config ";
  text += config.dump();
  text += '\n';
  std::string header;
  std::string values;
  char buf[64];
  for (const auto& [rank, fraction] : report.cmc) {
    header += "rank_" + std::to_string(rank) + ",";
    std::snprintf(buf, sizeof(buf), "%.17g,", fraction);
    values += buf;
  }
  header += "mAP,mINP,num_valid_queries,num_queries";
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,", report.mean_ap, report.mean_inp);
  values += buf;
  values += std::to_string(report.num_valid_queries) + "," +
            std::to_string(report.num_queries);
  text += header + "\n" + values + "\n";
  write_text(path, text);
}

}  // namespace mmreid

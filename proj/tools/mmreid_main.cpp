#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "mmreid/cidhl.hpp"
#include "mmreid/core.hpp"
#include "mmreid/io.hpp"
#include "mmreid/mbsos.hpp"
#include "mmreid/metrics.hpp"
#include "mmreid/splitter.hpp"
#include "mmreid/version.hpp"

namespace {

using nlohmann::ordered_json;

std::pair<std::uint32_t, std::uint32_t> parse_ratio(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw mmreid::Error(mmreid::ErrorCode::config_error,
                        "ratio must look like a:b, got '" + text + "'");
  }
  const auto parse_side = [&](const std::string& side) -> std::uint32_t {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(side.c_str(), &end, 10);
    if (errno != 0 || end != side.c_str() + side.size() || v > UINT32_MAX) {
      throw mmreid::Error(mmreid::ErrorCode::config_error,
                          "bad ratio component '" + side + "'");
    }
    return static_cast<std::uint32_t>(v);
  };
  const std::uint32_t a = parse_side(text.substr(0, colon));
  const std::uint32_t b = parse_side(text.substr(colon + 1));
  if (a == 0 && b == 0) {
    throw mmreid::Error(mmreid::ErrorCode::config_error, "ratio 0:0 is undefined");
  }
  return {a, b};
}

std::vector<std::size_t> parse_ranks(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string field =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
    if (field.empty() || errno != 0 || end != field.c_str() + field.size() || v == 0) {
      throw mmreid::Error(mmreid::ErrorCode::config_error,
                          "bad rank '" + field + "' in --ranks");
    }
    out.push_back(static_cast<std::size_t>(v));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string field =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || errno != 0 || end != field.c_str() + field.size()) {
      throw mmreid::Error(mmreid::ErrorCode::config_error,
                          std::string("bad value '") + field + "' in " + flag);
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct SynthOptions {
  std::size_t identities = 8;
  std::size_t samples = 4;
  std::size_t dim = 16;
  double sigma_id = 0.1;
  double sigma_mod = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

struct SplitOptions {
  std::string features;
  std::string ratio = "3:7";
  std::uint64_t seed = 0;
  std::string out;
};

struct RerankOptions {
  std::string features;
  std::string split;
  double lambda = 0.999;
  std::string out_bridged;
  std::string out_raw;
};

struct EvalOptions {
  std::string features;
  std::string split;
  std::string source = "mbsos";
  double lambda = 0.999;
  std::string ranks = "1,5,10,20";
  std::string out;
  std::string csv;
};

struct LossCheckOptions {
  std::size_t identities = 4;
  std::size_t samples = 4;
  std::size_t dim = 8;
  double margin = 0.3;
  double delta = 0.2;
  double sigma_id = 0.4;
  double sigma_mod = 0.6;
  std::uint64_t seed = 1;
  double step = 1e-6;
  std::string out;
};

struct SweepOptions {
  std::string features;
  std::string split;
  std::string lambda_list;
  std::string delta_list;
  std::string ranks = "1,5,10,20";
  std::size_t identities = 4;
  std::size_t samples = 4;
  std::size_t dim = 8;
  double margin = 0.3;
  double sigma_id = 0.4;
  double sigma_mod = 0.6;
  std::uint64_t seed = 1;
  std::string out;
};

struct LoadedSplit {
  mmreid::EmbeddingSet pool;
  mmreid::SplitResult split;
  mmreid::EmbeddingSet query;
  mmreid::EmbeddingSet gallery;
};

LoadedSplit load_split_pair(const std::string& features_path, const std::string& split_path) {
  mmreid::EmbeddingSet pool = mmreid::load_features_auto(features_path);
  mmreid::SplitResult split = mmreid::load_split_json(split_path);
  mmreid::EmbeddingSet query = pool.subset(split.query_indices);
  mmreid::EmbeddingSet gallery = pool.subset(split.gallery_indices);
  return LoadedSplit{std::move(pool), std::move(split), std::move(query), std::move(gallery)};
}

void write_sweep_csv(const std::string& path, const ordered_json& config,
                     const std::string& header, const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw mmreid::Error(mmreid::ErrorCode::io_failure, "cannot open " + path + " for writing");
  }
  out << "# mmreid " << mmreid::kVersion << "\n";
  out << "# config " << config.dump() << "\n";
  out << header << "\n";
  for (const std::string& row : rows) {
    out << row << "\n";
  }
  if (!out) {
    throw mmreid::Error(mmreid::ErrorCode::io_failure, "write failed on " + path);
  }
}

int cmd_synth(const SynthOptions& opt) {
  mmreid::SynthSpec spec;
  spec.identities = opt.identities;
  spec.samples_per_modality = opt.samples;
  spec.dimension = opt.dim;
  spec.sigma_identity = opt.sigma_id;
  spec.sigma_modality = opt.sigma_mod;
  spec.seed = opt.seed;
  const mmreid::EmbeddingSet set = mmreid::generate_synthetic(spec);
  const std::filesystem::path path(opt.out);
  if (path.extension() == ".csv") {
    mmreid::save_features_csv(set, path);
  } else {
    mmreid::save_features(set, path);
  }
  std::cout << "wrote " << set.size() << " records of dimension " << set.dimension()
            << " to " << opt.out << "\n";
  return 0;
}

int cmd_split(const SplitOptions& opt) {
  const auto [a, b] = parse_ratio(opt.ratio);
  mmreid::EmbeddingSet pool = mmreid::load_features_auto(opt.features);
  mmreid::SplitSpec spec;
  spec.ratio_visible = a;
  spec.ratio_infrared = b;
  spec.seed = opt.seed;
  const mmreid::SplitResult result = mmreid::build_split(pool, spec);

  ordered_json config;
  config["command"] = "split";
  config["features"] = opt.features;
  config["ratio"] = opt.ratio;
  config["seed"] = opt.seed;
  config["out"] = opt.out;
  mmreid::save_split_json(result, pool, config, opt.out);
  std::cout << "split " << pool.size() << " records into " << result.query_indices.size()
            << " query / " << result.gallery_indices.size() << " gallery over "
            << result.per_identity.size() << " identities\n";
  return 0;
}

int cmd_rerank(const RerankOptions& opt) {
  LoadedSplit loaded = load_split_pair(opt.features, opt.split);
  const mmreid::ReRankConfig cfg{opt.lambda};

  const mmreid::DistanceMap qg = mmreid::pairwise_distances(loaded.query, loaded.gallery);
  const mmreid::DistanceMap gg = mmreid::pairwise_distances(loaded.gallery, loaded.gallery);
  if (!opt.out_raw.empty()) {
    mmreid::save_distance_map(qg, opt.out_raw);
  }
  const mmreid::OptimizedDistanceMap bridged = mmreid::bridge_optimize(
      mmreid::scale_same_modality(qg, cfg), mmreid::scale_same_modality(gg, cfg));
  mmreid::save_bridged_map(bridged, opt.out_bridged);
  std::cout << "bridged " << bridged.rows() << "x" << bridged.cols()
            << " map at lambda " << opt.lambda << " -> " << opt.out_bridged << "\n";
  return 0;
}

ordered_json eval_config(const EvalOptions& opt) {
  ordered_json config;
  config["command"] = "eval";
  config["features"] = opt.features;
  config["split"] = opt.split;
  config["source"] = opt.source;
  config["lambda"] = opt.lambda;
  config["ranks"] = opt.ranks;
  config["out"] = opt.out;
  if (!opt.csv.empty()) config["csv"] = opt.csv;
  return config;
}

int cmd_eval(const EvalOptions& opt) {
  if (opt.source != "raw" && opt.source != "mbsos") {
    throw mmreid::Error(mmreid::ErrorCode::config_error,
                        "--source must be raw or mbsos, got '" + opt.source + "'");
  }
  const std::vector<std::size_t> ranks = parse_ranks(opt.ranks);
  LoadedSplit loaded = load_split_pair(opt.features, opt.split);

  mmreid::Matrix entries;
  if (opt.source == "mbsos") {
    entries = mmreid::rerank(loaded.query, loaded.gallery, mmreid::ReRankConfig{opt.lambda})
                  .entries;
  } else {
    entries = mmreid::pairwise_distances(loaded.query, loaded.gallery).entries;
  }
  const mmreid::EvalReport report =
      mmreid::evaluate(entries, loaded.query, loaded.gallery, ranks);

  const ordered_json config = eval_config(opt);
  mmreid::save_eval_report_json(report, config, opt.out);
  if (!opt.csv.empty()) {
    mmreid::save_eval_report_csv(report, config, opt.csv);
  }

  char buf[64];
  std::snprintf(buf, sizeof(buf), "mAP %.4f  mINP %.4f", report.mean_ap, report.mean_inp);
  std::cout << buf;
  for (const auto& [rank, fraction] : report.cmc) {
    std::snprintf(buf, sizeof(buf), "  rank-%zu %.4f", rank, fraction);
    std::cout << buf;
  }
  std::cout << "  (" << report.num_valid_queries << "/" << report.num_queries
            << " valid queries)\n";
  return 0;
}

int cmd_loss_check(const LossCheckOptions& opt) {
  mmreid::SynthSpec spec;
  spec.identities = opt.identities;
  spec.samples_per_modality = opt.samples;
  spec.dimension = opt.dim;
  spec.sigma_identity = opt.sigma_id;
  spec.sigma_modality = opt.sigma_mod;
  spec.seed = opt.seed;
  const mmreid::MiniBatch batch = mmreid::MiniBatch::from_set(mmreid::generate_synthetic(spec));
  const mmreid::LossConfig cfg{opt.margin, opt.delta};

  const mmreid::LossReport cidhl = mmreid::cidhl_loss(batch, cfg);
  const mmreid::LossReport triplet = mmreid::triplet_hard_loss(batch, cfg);
  const double fd_err = mmreid::finite_difference_check(batch, cfg, opt.step);

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "l_cid %.12g  l_dh %.12g  l_cidhl %.12g  l_th %.12g\n"
                "fd max relative error %.3g (step %g)\n",
                cidhl.l_cid, cidhl.l_dh, cidhl.l_cidhl, triplet.l_th, fd_err, opt.step);
  std::cout << buf;

  if (!opt.out.empty()) {
    ordered_json j;
    j["format"] = "mmreid.loss_check";
    j["version"] = mmreid::kVersion;
    ordered_json config;
    config["command"] = "loss-check";
    config["identities"] = opt.identities;
    config["samples"] = opt.samples;
    config["dim"] = opt.dim;
    config["margin"] = opt.margin;
    config["delta"] = opt.delta;
    config["sigma_id"] = opt.sigma_id;
    config["sigma_mod"] = opt.sigma_mod;
    config["seed"] = opt.seed;
    config["step"] = opt.step;
    config["out"] = opt.out;
    j["config"] = std::move(config);
    j["l_cid"] = cidhl.l_cid;
    j["l_dh"] = cidhl.l_dh;
    j["l_cidhl"] = cidhl.l_cidhl;
    j["l_th"] = triplet.l_th;
    j["cidhl_active_terms"] = cidhl.active_terms;
    j["triplet_active_terms"] = triplet.active_terms;
    j["fd_max_rel_error"] = fd_err;
    std::ofstream out(opt.out, std::ios::trunc);
    if (!out) {
      throw mmreid::Error(mmreid::ErrorCode::io_failure,
                          "cannot open " + opt.out + " for writing");
    }
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_sweep(const SweepOptions& opt) {
  const bool has_lambda = !opt.lambda_list.empty();
  const bool has_delta = !opt.delta_list.empty();
  if (has_lambda == has_delta) {
    throw mmreid::Error(mmreid::ErrorCode::config_error,
                        "pass exactly one of --lambda-list / --delta-list");
  }

  ordered_json config;
  config["command"] = "sweep";
  config["out"] = opt.out;
  char buf[256];

  if (has_lambda) {
    if (opt.features.empty() || opt.split.empty()) {
      throw mmreid::Error(mmreid::ErrorCode::config_error,
                          "a lambda sweep needs --features and --split");
    }
    const std::vector<double> lambdas = parse_double_list(opt.lambda_list, "--lambda-list");
    const std::vector<std::size_t> ranks = parse_ranks(opt.ranks);
    config["features"] = opt.features;
    config["split"] = opt.split;
    config["lambda_list"] = lambdas;
    config["ranks"] = opt.ranks;

    LoadedSplit loaded = load_split_pair(opt.features, opt.split);
    const mmreid::DistanceMap qg = mmreid::pairwise_distances(loaded.query, loaded.gallery);
    const mmreid::DistanceMap gg =
        mmreid::pairwise_distances(loaded.gallery, loaded.gallery);

    std::string header = "lambda";
    for (std::size_t r : ranks) header += ",rank_" + std::to_string(r);
    header += ",mAP,mINP";
    std::vector<std::string> rows;
    for (double lambda : lambdas) {
      const mmreid::ReRankConfig cfg{lambda};
      const mmreid::OptimizedDistanceMap bridged = mmreid::bridge_optimize(
          mmreid::scale_same_modality(qg, cfg), mmreid::scale_same_modality(gg, cfg));
      const mmreid::EvalReport report =
          mmreid::evaluate(bridged.entries, loaded.query, loaded.gallery, ranks);
      std::snprintf(buf, sizeof(buf), "%.17g", lambda);
      std::string row = buf;
      for (const auto& [rank, fraction] : report.cmc) {
        (void)rank;
        std::snprintf(buf, sizeof(buf), ",%.17g", fraction);
        row += buf;
      }
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", report.mean_ap, report.mean_inp);
      row += buf;
      rows.push_back(std::move(row));
    }
    write_sweep_csv(opt.out, config, header, rows);
    std::cout << "swept " << lambdas.size() << " lambda values -> " << opt.out << "\n";
    return 0;
  }

  const std::vector<double> deltas = parse_double_list(opt.delta_list, "--delta-list");
  config["delta_list"] = deltas;
  config["identities"] = opt.identities;
  config["samples"] = opt.samples;
  config["dim"] = opt.dim;
  config["margin"] = opt.margin;
  config["sigma_id"] = opt.sigma_id;
  config["sigma_mod"] = opt.sigma_mod;
  config["seed"] = opt.seed;

  mmreid::SynthSpec spec;
  spec.identities = opt.identities;
  spec.samples_per_modality = opt.samples;
  spec.dimension = opt.dim;
  spec.sigma_identity = opt.sigma_id;
  spec.sigma_modality = opt.sigma_mod;
  spec.seed = opt.seed;
  const mmreid::MiniBatch batch = mmreid::MiniBatch::from_set(mmreid::generate_synthetic(spec));

  std::vector<std::string> rows;
  for (double delta : deltas) {
    const mmreid::LossReport report =
        mmreid::cidhl_loss(batch, mmreid::LossConfig{opt.margin, delta});
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%zu", delta,
                  report.l_cid, report.l_dh, report.l_cidhl, report.mean_per_anchor,
                  report.active_terms);
    rows.emplace_back(buf);
  }
  write_sweep_csv(opt.out, config, "delta,l_cid,l_dh,l_cidhl,mean_per_anchor,active_terms",
                  rows);
  std::cout << "swept " << deltas.size() << " delta values -> " << opt.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("MMREID_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      omp_set_num_threads(n);
    }
  }

  CLI::App app{"mix-modality person re-id evaluation toolkit"};
  app.set_version_flag("--version", mmreid::kVersion);
  app.require_subcommand(1);

  SynthOptions synth_opt;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic feature file");
  synth->add_option("--identities", synth_opt.identities, "number of identities");
  synth->add_option("--samples", synth_opt.samples, "samples per identity per modality");
  synth->add_option("--dim", synth_opt.dim, "feature dimension");
  synth->add_option("--sigma-id", synth_opt.sigma_id, "intra-identity noise");
  synth->add_option("--sigma-mod", synth_opt.sigma_mod, "modality offset magnitude");
  synth->add_option("--seed", synth_opt.seed, "random seed");
  synth->add_option("--out", synth_opt.out, "output path (.csv for the CSV twin)")
      ->required();

  SplitOptions split_opt;
  CLI::App* split = app.add_subcommand("split", "build a query/gallery split");
  split->add_option("--features", split_opt.features, "feature file")->required();
  split->add_option("--ratio", split_opt.ratio, "modality mixing ratio a:b");
  split->add_option("--seed", split_opt.seed, "shuffle seed");
  split->add_option("--out", split_opt.out, "output split JSON")->required();

  RerankOptions rerank_opt;
  CLI::App* rerank = app.add_subcommand("rerank", "compute bridged distance maps");
  rerank->add_option("--features", rerank_opt.features, "feature file")->required();
  rerank->add_option("--split", rerank_opt.split, "split JSON")->required();
  rerank->add_option("--lambda", rerank_opt.lambda, "same-modality scaling factor");
  rerank->add_option("--out-bridged", rerank_opt.out_bridged, "bridged map output")
      ->required();
  rerank->add_option("--out-raw", rerank_opt.out_raw, "also save the raw map here");

  EvalOptions eval_opt;
  CLI::App* eval = app.add_subcommand("eval", "score a split");
  eval->add_option("--features", eval_opt.features, "feature file")->required();
  eval->add_option("--split", eval_opt.split, "split JSON")->required();
  eval->add_option("--source", eval_opt.source, "distance source: raw or mbsos");
  eval->add_option("--lambda", eval_opt.lambda, "scaling factor for mbsos");
  eval->add_option("--ranks", eval_opt.ranks, "CMC ranks, comma-separated");
  eval->add_option("--out", eval_opt.out, "report JSON")->required();
  eval->add_option("--csv", eval_opt.csv, "also write a CSV report here");

  LossCheckOptions loss_opt;
  CLI::App* loss = app.add_subcommand("loss-check", "evaluate losses on a synthetic batch");
  loss->add_option("--identities", loss_opt.identities, "P");
  loss->add_option("--samples", loss_opt.samples, "K");
  loss->add_option("--dim", loss_opt.dim, "D");
  loss->add_option("--margin", loss_opt.margin, "hinge margin m");
  loss->add_option("--delta", loss_opt.delta, "hard-mining weight");
  loss->add_option("--sigma-id", loss_opt.sigma_id, "intra-identity noise");
  loss->add_option("--sigma-mod", loss_opt.sigma_mod, "modality offset magnitude");
  loss->add_option("--seed", loss_opt.seed, "batch seed");
  loss->add_option("--step", loss_opt.step, "finite-difference step");
  loss->add_option("--out", loss_opt.out, "optional report JSON");

  SweepOptions sweep_opt;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep lambda or delta, emit CSV");
  sweep->add_option("--features", sweep_opt.features, "feature file (lambda mode)");
  sweep->add_option("--split", sweep_opt.split, "split JSON (lambda mode)");
  sweep->add_option("--lambda-list", sweep_opt.lambda_list, "comma-separated lambdas");
  sweep->add_option("--delta-list", sweep_opt.delta_list, "comma-separated deltas");
  sweep->add_option("--ranks", sweep_opt.ranks, "CMC ranks (lambda mode)");
  sweep->add_option("--identities", sweep_opt.identities, "P (delta mode)");
  sweep->add_option("--samples", sweep_opt.samples, "K (delta mode)");
  sweep->add_option("--dim", sweep_opt.dim, "D (delta mode)");
  sweep->add_option("--margin", sweep_opt.margin, "hinge margin (delta mode)");
  sweep->add_option("--sigma-id", sweep_opt.sigma_id, "intra-identity noise (delta mode)");
  sweep->add_option("--sigma-mod", sweep_opt.sigma_mod, "modality offset (delta mode)");
  sweep->add_option("--seed", sweep_opt.seed, "batch seed (delta mode)");
  sweep->add_option("--out", sweep_opt.out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_opt);
    if (split->parsed()) return cmd_split(split_opt);
    if (rerank->parsed()) return cmd_rerank(rerank_opt);
    if (eval->parsed()) return cmd_eval(eval_opt);
    if (loss->parsed()) return cmd_loss_check(loss_opt);
    if (sweep->parsed()) return cmd_sweep(sweep_opt);
  } catch (const mmreid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mmreid::error_exit_class(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmark/channel.hpp"
#include "wmark/codebook.hpp"
#include "wmark/detect.hpp"
#include "wmark/partition.hpp"
#include "wmark/sequence.hpp"

namespace wmark {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CodebookSource {
  std::optional<std::filesystem::path> path;  // load from file
  std::uint32_t synth_k = 4096;               // or synthesize
  std::uint32_t synth_d = 32;
  std::uint64_t synth_seed = 0;

  Codebook open() const;
  std::string describe() const;
};

struct RobustnessSweep {
  ChannelKind kind = ChannelKind::neighbor_flip;
  std::vector<double> intensities;
  std::uint32_t neighbor_count = 8;
};

// Everything a run needs; a config plus the library version reproduces
// every output byte for byte.
struct ExperimentConfig {
  int version = 1;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;

  CodebookSource codebook;
  std::vector<std::uint8_t> key;
  double gamma = 0.5;
  PartitionMode partition_mode = PartitionMode::adaptive;

  GeneratorConfig generator;
  int message_bits = 32;
  double alpha = 0.01;
  std::uint64_t trials = 1000;

  std::vector<ChannelSpec> channels;  // applied in order before extraction

  std::uint64_t calibration_trials = 20000;
  std::uint64_t calibration_seed = 1;
  std::filesystem::path calibration_cache_dir;

  std::vector<std::string> experiments;  // subset of {fpr,capacity,robustness,security,forgery}
  std::vector<double> fpr_alphas = {0.05, 0.01};
  std::vector<int> capacity_message_lengths = {16, 32, 48, 64};
  RobustnessSweep robustness;
  std::vector<double> forgery_exposures = {0.25, 0.5};

  PartitionSpec partition_spec() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// Disk-backed calibration memo keyed by a content hash of
// (N, n, gamma, alpha, trials, seed).
class CalibrationCache {
 public:
  explicit CalibrationCache(std::filesystem::path dir);

  // Returns the cached record or computes and stores it. `hit` reports
  // whether the cache already had it.
  CalibrationRecord get_or_compute(std::uint64_t total_positions, std::uint32_t block_count,
                                   double gamma, double alpha, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads, bool* hit = nullptr);

  std::filesystem::path entry_path(std::uint64_t total_positions, std::uint32_t block_count,
                                   double gamma, double alpha, std::uint64_t trials,
                                   std::uint64_t seed) const;

 private:
  std::filesystem::path dir_;
};

// Runs the configured experiments, writing CSV tables and a summary JSON
// under output_dir. Returns the paths written.
std::vector<std::filesystem::path> run_experiments(const ExperimentConfig& config,
                                                   const std::filesystem::path& output_dir);

}  // namespace wmark

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wmark/experiment.hpp"
#include "wmark/hash.hpp"

using namespace wmark;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / (name + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

nlohmann::json base_config(const fs::path& cache_dir) {
  return nlohmann::json{
      {"master_seed", 42},
      {"codebook", {{"synth", {{"k", 256}, {"d", 8}, {"seed", 5}}}}},
      {"partition", {{"key_hex", "000102030405060708090a0b0c0d0e0f"}, {"gamma", 0.5}}},
      {"generator", {{"paradigm", "next-token"}, {"length", 128}}},
      {"message_bits", 16},
      {"alpha", 0.01},
      {"trials", 40},
      {"calibration",
       {{"trials", 2000}, {"seed", 3}, {"cache_dir", cache_dir.string()}}},
      {"experiments", {"fpr", "capacity"}},
      {"capacity_message_lengths", {16}},
  };
}

}  // namespace

TEST_CASE("config parsing reports field-level errors") {
  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json::object()),
                       doctest::Contains("master_seed"), ConfigError);

  nlohmann::json j = base_config("/tmp/unused");
  j["partition"]["key_hex"] = "xyz";
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("key_hex"), ConfigError);

  j = base_config("/tmp/unused");
  j["generator"].erase("length");
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("length"), ConfigError);

  j = base_config("/tmp/unused");
  j["experiments"] = {"fpr", "nonsense"};
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("nonsense"), ConfigError);

  j = base_config("/tmp/unused");
  j["alpha"] = 0.7;
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("alpha"), ConfigError);

  j = base_config("/tmp/unused");
  j["channels"] = {{{"kind", "warp"}, {"intensity", 0.1}}};
  CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
}

TEST_CASE("config round-trips through json") {
  TempDir tmp("wmark-config");
  ExperimentConfig config = config_from_json(base_config(tmp.path / "cache"));
  nlohmann::json echo = config_to_json(config);
  ExperimentConfig back = config_from_json(echo);
  CHECK(config_to_json(back) == echo);
  CHECK(back.master_seed == 42);
  CHECK(back.key == hex_decode("000102030405060708090a0b0c0d0e0f"));
}

TEST_CASE("calibration cache is idempotent and reproducible") {
  TempDir tmp("wmark-cache");
  CalibrationCache cache(tmp.path);
  bool hit = true;
  CalibrationRecord a = cache.get_or_compute(128, 16, 0.5, 0.01, 1500, 7, 1, &hit);
  CHECK(!hit);
  CalibrationRecord b = cache.get_or_compute(128, 16, 0.5, 0.01, 1500, 7, 1, &hit);
  CHECK(hit);
  CHECK(a.threshold == b.threshold);
  CHECK(a.trials == 1500);
  CHECK(a.seed == 7);

  // deleting the cache and recomputing reproduces the same threshold
  fs::remove_all(tmp.path);
  CalibrationCache fresh(tmp.path);
  CalibrationRecord c = fresh.get_or_compute(128, 16, 0.5, 0.01, 1500, 7, 1, &hit);
  CHECK(!hit);
  CHECK(c.threshold == a.threshold);
}

TEST_CASE("experiment outputs are byte-identical across worker counts") {
  TempDir tmp("wmark-exp");
  ExperimentConfig config = config_from_json(base_config(tmp.path / "cache"));

  config.threads = 1;
  auto files1 = run_experiments(config, tmp.path / "run1");
  config.threads = 4;
  auto files4 = run_experiments(config, tmp.path / "run4");
  REQUIRE(files1.size() == files4.size());
  for (std::size_t i = 0; i < files1.size(); ++i) {
    CHECK(slurp(files1[i]) == slurp(files4[i]));
  }

  // repeat run with the same seed and worker count: also identical
  auto files1b = run_experiments(config, tmp.path / "run1b");
  for (std::size_t i = 0; i < files1.size(); ++i) {
    CHECK(slurp(files1[i]) == slurp(files1b[i]));
  }
}

TEST_CASE("trial rows carry their seed and channel description") {
  TempDir tmp("wmark-rows");
  nlohmann::json j = base_config(tmp.path / "cache");
  j["experiments"] = {"capacity"};
  j["channels"] = {{{"kind", "uniform-flip"}, {"intensity", 0.02}}};
  j["trials"] = 5;
  ExperimentConfig config = config_from_json(j);
  run_experiments(config, tmp.path / "out");

  std::ifstream in(tmp.path / "out" / "capacity_trials.csv");
  std::string header, row;
  REQUIRE(std::getline(in, header));
  CHECK(header.find("seed") != std::string::npos);
  CHECK(header.find("channel") != std::string::npos);
  REQUIRE(std::getline(in, row));
  CHECK(row.find("uniform-flip:0.02:seed=") != std::string::npos);
}

TEST_CASE("forgery experiment separates adaptive from static partitioning") {
  TempDir tmp("wmark-forgery");
  nlohmann::json j = base_config(tmp.path / "cache");
  j["experiments"] = {"forgery"};
  j["generator"] = {{"paradigm", "next-token"}, {"length", 256}};
  j["codebook"] = {{"synth", {{"k", 512}, {"d", 8}, {"seed", 5}}}};
  j["message_bits"] = 32;
  j["trials"] = 120;
  j["forgery_exposures"] = {0.5};
  ExperimentConfig config = config_from_json(j);
  run_experiments(config, tmp.path / "out");

  std::ifstream in(tmp.path / "out" / "summary.json");
  nlohmann::json summary;
  in >> summary;
  double adaptive = -1, static_rate = -1;
  for (const auto& row : summary["forgery"]) {
    if (row["mode"] == "adaptive") adaptive = row["folded_success_rate"];
    if (row["mode"] == "static") static_rate = row["folded_success_rate"];
  }
  REQUIRE(adaptive >= 0);
  REQUIRE(static_rate >= 0);
  CHECK(adaptive < static_rate);
  CHECK(static_rate > 0.95);
}

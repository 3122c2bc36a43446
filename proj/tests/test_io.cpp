#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wmark/io.hpp"
#include "wmark/sequence.hpp"

using namespace wmark;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("wmark-io-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TokenSequence sample_sequence() {
  TokenSequence seq;
  seq.paradigm = Paradigm::next_scale;
  seq.tokens = {5, 1, 0, 63, 17, 8, 9, 2, 3, 4};
  seq.scale_boundaries = {2, 6, 10};
  seq.position_offset = 7;
  return seq;
}

}  // namespace

TEST_CASE("binary sequence files round-trip every header field") {
  TempDir tmp;
  const fs::path p = tmp.path / "seq.bin";
  TokenSequence seq = sample_sequence();
  save_sequence(p, seq, 64);
  std::uint32_t k = 0;
  TokenSequence loaded = load_sequence(p, &k);
  CHECK(k == 64);
  CHECK(loaded.tokens == seq.tokens);
  CHECK(loaded.paradigm == seq.paradigm);
  CHECK(loaded.scale_boundaries == seq.scale_boundaries);
  CHECK(loaded.position_offset == seq.position_offset);

  // byte-stable: saving the loaded sequence reproduces the file
  const fs::path p2 = tmp.path / "seq2.bin";
  save_sequence(p2, loaded, k);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("text sequence files round-trip") {
  TempDir tmp;
  const fs::path p = tmp.path / "seq.txt";
  TokenSequence seq = sample_sequence();
  save_sequence_text(p, seq, 64);
  std::uint32_t k = 0;
  TokenSequence loaded = load_sequence_text(p, &k);
  CHECK(k == 64);
  CHECK(loaded.tokens == seq.tokens);
  CHECK(loaded.scale_boundaries == seq.scale_boundaries);
  CHECK(loaded.position_offset == seq.position_offset);
}

TEST_CASE("corrupt sequence files are rejected") {
  TempDir tmp;
  const fs::path p = tmp.path / "bad.bin";
  {
    std::ofstream out(p, std::ios::binary);
    out << "NOTMAGIC and then some";
  }
  CHECK_THROWS_AS(load_sequence(p), std::runtime_error);

  const fs::path p2 = tmp.path / "trailing.bin";
  save_sequence(p2, sample_sequence(), 64);
  {
    std::ofstream out(p2, std::ios::binary | std::ios::app);
    out << "x";
  }
  CHECK_THROWS_AS(load_sequence(p2), std::runtime_error);
  CHECK_THROWS_AS(load_sequence(tmp.path / "missing.bin"), std::runtime_error);
}

TEST_CASE("codebook files store f32 and reload exactly") {
  TempDir tmp;
  const fs::path p = tmp.path / "cb.bin";
  Codebook cb = Codebook::synth(3, 32, 8);
  save_codebook(p, cb);
  Codebook loaded = load_codebook(p);
  CHECK(loaded.size() == 32);
  CHECK(loaded.dim() == 8);
  // values live within f32 rounding of the originals
  for (std::uint32_t i = 0; i < 32; ++i) {
    auto a = cb.embedding(i);
    auto b = loaded.embedding(i);
    for (std::uint32_t c = 0; c < 8; ++c) {
      CHECK(b[c] == doctest::Approx(a[c]).epsilon(1e-6));
      CHECK(b[c] == static_cast<double>(static_cast<float>(a[c])));
    }
  }
  // and a second save/load cycle is bit-stable
  const fs::path p2 = tmp.path / "cb2.bin";
  save_codebook(p2, loaded);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("reports serialize their decision fields") {
  DetectionReport report;
  report.mode = DetectionMode::folded;
  report.status = DetectionStatus::watermarked;
  report.detected = true;
  report.global_green_ratio = 0.75;
  report.statistic = 0.9;
  report.threshold = 0.74;
  report.alpha = 0.01;
  report.block_ratios = {1.0, 0.0};
  report.decoded_message = {1, 0, 1};
  report.corrected_errors = 1;
  nlohmann::json j = report_to_json(report);
  CHECK(j["mode"] == "folded");
  CHECK(j["status"] == "watermarked");
  CHECK(j["detected"] == true);
  CHECK(j["message"] == "101");
  CHECK(j["corrected_errors"] == 1);

  report.status = DetectionStatus::not_watermarked;
  report.detected = false;
  report.decoded_message.clear();
  nlohmann::json j2 = report_to_json(report);
  CHECK(j2["status"] == "not-watermarked");
  CHECK(!j2.contains("message"));
}

TEST_CASE("calibration records round-trip through json") {
  CalibrationRecord record{256, 63, 0.5, 0.01, 20000, 9, 0.7371};
  CalibrationRecord back = calibration_from_json(calibration_to_json(record));
  CHECK(back.total_positions == record.total_positions);
  CHECK(back.block_count == record.block_count);
  CHECK(back.gamma == record.gamma);
  CHECK(back.alpha == record.alpha);
  CHECK(back.trials == record.trials);
  CHECK(back.seed == record.seed);
  CHECK(back.threshold == record.threshold);
}

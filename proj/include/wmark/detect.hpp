#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wmark/bch.hpp"
#include "wmark/embed.hpp"
#include "wmark/layout.hpp"
#include "wmark/partition.hpp"
#include "wmark/sequence.hpp"

namespace wmark {

class CalibrationRequiredError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DetectionMode {
  plain_z,  // one-sided z-test on the global green ratio; zero-bit embeddings
  folded,   // mean of max(r_j, 1 - r_j); works for arbitrary codewords
};

enum class DetectionStatus {
  not_watermarked,
  watermarked,
  watermarked_unrecoverable,  // detected, but error correction failed
};

struct DetectionReport {
  DetectionMode mode = DetectionMode::plain_z;
  DetectionStatus status = DetectionStatus::not_watermarked;
  bool detected = false;       // statistic > threshold
  double global_green_ratio = 0.0;
  double statistic = 0.0;
  double threshold = 0.0;
  double alpha = 0.0;
  double tau = 0.5;
  std::vector<double> block_ratios;            // empty when no layout was used
  std::vector<std::uint8_t> decoded_message;   // present only when recoverable
  int corrected_errors = -1;                   // -1 when no decode ran
};

// Empirical (1-alpha) null quantile of the folded statistic: the record
// keeps everything needed to reproduce the threshold bit-exactly.
struct CalibrationRecord {
  std::uint64_t total_positions = 0;
  std::uint32_t block_count = 0;
  double gamma = 0.0;
  double alpha = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double threshold = 0.0;
};

// One-sided z-test on the global green ratio: detected iff
// z > gamma + z_alpha * sqrt(gamma (1 - gamma) / N). Appropriate for
// zero-bit (all-ones codeword) embeddings.
DetectionReport zero_bit_test(const TokenSequence& seq, const PartitionSpec& spec,
                              double alpha);

// Folded detection against a calibrated null quantile; the calibration
// must match (N, n, gamma, alpha).
DetectionReport folded_detect(const TokenSequence& seq, const WatermarkLayout& layout,
                              const PartitionSpec& spec, double alpha,
                              const CalibrationRecord& calibration);

// Monte Carlo null calibration under uniform-random tokens. Trials run on
// `threads` workers with per-trial counter-based streams, so the result
// does not depend on the worker count. Requires trials >= 10/alpha.
CalibrationRecord calibrate_threshold(std::uint64_t total_positions,
                                      std::uint32_t block_count, double gamma,
                                      double alpha, std::uint64_t trials,
                                      std::uint64_t seed, unsigned threads = 1);

// Full extraction: detection gate first (folded by default), then block
// ratios, raw bits and BCH decoding. message_bits truncates the decoded
// message to the caller's payload length (<= k).
DetectionReport extract(const TokenSequence& seq, const WatermarkLayout& layout,
                        const PartitionSpec& spec, const BchCode& code,
                        double tau, double alpha,
                        const CalibrationRecord* calibration,
                        DetectionMode mode = DetectionMode::folded,
                        int message_bits = 0);

// Reliable-capacity estimate: a block must hold at least
// N_min = 4 z_alpha^2 / delta^2 positions to detect its bit with margin
// delta, giving floor(floor(N / N_min) * code_rate) whole message bits.
std::uint64_t capacity_bits(std::uint64_t total_positions, double z_alpha, double delta,
                            double code_rate);

}  // namespace wmark

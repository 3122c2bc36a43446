#include "wmark/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "wmark/hash.hpp"
#include "wmark/rng.hpp"
#include "wmark/stats.hpp"

namespace wmark {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("alpha must lie in (0, 0.5)");
  }
}

double folded_statistic(std::span<const double> ratios) {
  double sum = 0.0;
  for (double r : ratios) sum += std::max(r, 1.0 - r);
  return sum / static_cast<double>(ratios.size());
}

}  // namespace

DetectionReport zero_bit_test(const TokenSequence& seq, const PartitionSpec& spec,
                              double alpha) {
  check_alpha(alpha);
  if (seq.size() == 0) throw std::invalid_argument("cannot test an empty sequence");
  seq.validate(spec.codebook_size());

  const double n = static_cast<double>(seq.size());
  const double gamma = spec.gamma();
  const double z = static_cast<double>(count_green(seq, spec)) / n;

  DetectionReport report;
  report.mode = DetectionMode::plain_z;
  report.alpha = alpha;
  report.global_green_ratio = z;
  report.statistic = z;
  report.threshold =
      gamma + normal_quantile(1.0 - alpha) * std::sqrt(gamma * (1.0 - gamma) / n);
  report.detected = report.statistic > report.threshold;
  report.status = report.detected ? DetectionStatus::watermarked
                                  : DetectionStatus::not_watermarked;
  return report;
}

DetectionReport folded_detect(const TokenSequence& seq, const WatermarkLayout& layout,
                              const PartitionSpec& spec, double alpha,
                              const CalibrationRecord& calibration) {
  check_alpha(alpha);
  if (calibration.total_positions != layout.total_positions ||
      calibration.block_count != layout.block_count() ||
      calibration.gamma != spec.gamma() || calibration.alpha != alpha) {
    throw CalibrationRequiredError(
        "calibration record does not match (N=" + std::to_string(layout.total_positions) +
        ", n=" + std::to_string(layout.block_count()) + ", gamma=" +
        std::to_string(spec.gamma()) + ", alpha=" + std::to_string(alpha) + ")");
  }

  DetectionReport report;
  report.mode = DetectionMode::folded;
  report.alpha = alpha;
  report.block_ratios = block_green_ratios(seq, layout, spec);
  std::uint64_t green = 0;
  for (std::size_t j = 0; j < layout.block_count(); ++j) {
    green += static_cast<std::uint64_t>(
        std::llround(report.block_ratios[j] * static_cast<double>(layout.blocks[j].size())));
  }
  report.global_green_ratio = static_cast<double>(green) / static_cast<double>(seq.size());
  report.statistic = folded_statistic(report.block_ratios);
  report.threshold = calibration.threshold;
  report.detected = report.statistic > report.threshold;
  report.status = report.detected ? DetectionStatus::watermarked
                                  : DetectionStatus::not_watermarked;
  return report;
}

CalibrationRecord calibrate_threshold(std::uint64_t total_positions,
                                      std::uint32_t block_count, double gamma,
                                      double alpha, std::uint64_t trials,
                                      std::uint64_t seed, unsigned threads) {
  // Quantiles make sense for any level; detection itself restricts alpha
  // to (0, 0.5).
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("calibration alpha must lie in (0, 1)");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  const auto min_trials = static_cast<std::uint64_t>(std::ceil(10.0 / alpha));
  if (trials < min_trials) {
    throw std::invalid_argument("calibration needs at least " + std::to_string(min_trials) +
                                " trials for alpha=" + std::to_string(alpha) + ", got " +
                                std::to_string(trials));
  }
  WatermarkLayout layout = partition_blocks(total_positions, block_count);

  // Null model: every token is green independently with probability
  // gamma, which is what uniform tokens against a keyed partition give
  // (up to the floor(gamma K)/K rounding the record deliberately omits).
  std::vector<double> stats(trials);
  auto run_range = [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> ratios(block_count);
    for (std::uint64_t trial = lo; trial < hi; ++trial) {
      RngStream rng = derive_stream(seed, "folded-null-calibration", trial);
      for (std::uint32_t j = 0; j < block_count; ++j) {
        const BlockRange& block = layout.blocks[j];
        std::uint64_t green = 0;
        for (std::uint64_t i = 0; i < block.size(); ++i) {
          green += rng.uniform_double() < gamma ? 1 : 0;
        }
        ratios[j] = static_cast<double>(green) / static_cast<double>(block.size());
      }
      stats[trial] = folded_statistic(ratios);
    }
  };

  if (threads <= 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (trials + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      std::uint64_t lo = std::min<std::uint64_t>(w * chunk, trials);
      std::uint64_t hi = std::min<std::uint64_t>(lo + chunk, trials);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  std::sort(stats.begin(), stats.end());
  const auto idx = static_cast<std::uint64_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(trials)));
  CalibrationRecord record;
  record.total_positions = total_positions;
  record.block_count = block_count;
  record.gamma = gamma;
  record.alpha = alpha;
  record.trials = trials;
  record.seed = seed;
  record.threshold = stats[std::min<std::uint64_t>(idx == 0 ? 0 : idx - 1, trials - 1)];
  return record;
}

DetectionReport extract(const TokenSequence& seq, const WatermarkLayout& layout,
                        const PartitionSpec& spec, const BchCode& code,
                        double tau, double alpha,
                        const CalibrationRecord* calibration, DetectionMode mode,
                        int message_bits) {
  if (layout.block_count() != static_cast<std::size_t>(code.n)) {
    throw std::invalid_argument("layout block count " + std::to_string(layout.block_count()) +
                                " does not match codeword length " + std::to_string(code.n));
  }
  if (message_bits == 0) message_bits = code.k;
  if (message_bits < 1 || message_bits > code.k) {
    throw std::invalid_argument("message_bits must lie in [1, k]");
  }

  DetectionReport report;
  if (mode == DetectionMode::folded) {
    if (calibration == nullptr) {
      throw CalibrationRequiredError("folded extraction requires a calibration record");
    }
    report = folded_detect(seq, layout, spec, alpha, *calibration);
  } else {
    report = zero_bit_test(seq, spec, alpha);
    report.block_ratios = block_green_ratios(seq, layout, spec);
  }
  report.tau = tau;
  if (!report.detected) return report;  // early return: no message on a negative

  std::vector<std::uint8_t> raw = decode_bits(report.block_ratios, tau);
  BchDecodeResult decoded = bch_decode(code, raw);
  if (!decoded.ok) {
    report.status = DetectionStatus::watermarked_unrecoverable;
    return report;
  }
  report.status = DetectionStatus::watermarked;
  report.corrected_errors = decoded.corrected;
  report.decoded_message.assign(decoded.message.begin(),
                                decoded.message.begin() + message_bits);
  return report;
}

std::uint64_t capacity_bits(std::uint64_t total_positions, double z_alpha, double delta,
                            double code_rate) {
  if (total_positions < 1) throw std::invalid_argument("capacity requires N >= 1");
  if (!(delta > 0.0 && delta <= 0.5)) {
    throw std::invalid_argument("margin delta must lie in (0, 0.5]");
  }
  if (!(code_rate > 0.0 && code_rate <= 1.0)) {
    throw std::invalid_argument("code rate must lie in (0, 1]");
  }
  const double n_min = 4.0 * z_alpha * z_alpha / (delta * delta);
  const double blocks = std::floor(static_cast<double>(total_positions) / n_min);
  return static_cast<std::uint64_t>(std::floor(blocks * code_rate));
}

}  // namespace wmark

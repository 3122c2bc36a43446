#include "wmark/partition.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wmark/rng.hpp"

namespace wmark {

PartitionSpec::PartitionSpec(std::vector<std::uint8_t> key, double gamma,
                             std::uint32_t codebook_size, PartitionMode mode)
    : key_(std::move(key)), gamma_(gamma), codebook_size_(codebook_size), mode_(mode) {
  if (key_.size() < 16 || key_.size() > 64) {
    throw std::invalid_argument("partition key must be 16..64 bytes, got " +
                                std::to_string(key_.size()));
  }
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }
  if (codebook_size_ < 2) {
    throw std::invalid_argument("codebook size must be >= 2");
  }
  green_count_ = static_cast<std::uint32_t>(std::floor(gamma_ * codebook_size_));
  if (green_count_ < 1 || green_count_ > codebook_size_ - 1) {
    throw std::invalid_argument("degenerate gamma: floor(gamma*K) must be in [1, K-1]");
  }
}

Digest256 derive_seed(const PartitionSpec& spec, std::uint64_t position) {
  const auto& key = spec.key();
  if (spec.mode() == PartitionMode::static_key) {
    return sha256(std::span<const std::uint8_t>(key.data(), key.size()));
  }
  std::vector<std::uint8_t> msg(key.size() + 8);
  std::copy(key.begin(), key.end(), msg.begin());
  store_be64(position, msg.data() + key.size());
  return sha256(msg);
}

PositionPartition::PositionPartition(const PartitionSpec& spec, std::uint64_t position)
    : domain_(spec.codebook_size()), green_count_(spec.green_count()) {
  // Half-width: smallest w with 2^(2w) >= K, so cycle-walking expands the
  // domain by less than 4x.
  int bits = std::bit_width(domain_ - 1);
  half_bits_ = (bits + 1) / 2;
  if (half_bits_ < 1) half_bits_ = 1;
  half_mask_ = (std::uint64_t{1} << half_bits_) - 1;

  // Round keys: absorb the 256-bit seed into a splitmix chain.
  Digest256 seed = derive_seed(spec, position);
  std::uint64_t state = load_be64(seed.data());
  for (int i = 1; i < 4; ++i) {
    state ^= load_be64(seed.data() + 8 * i);
    splitmix64(state);
  }
  for (auto& rk : round_keys_) rk = splitmix64(state);
}

std::uint64_t PositionPartition::feistel_forward(std::uint64_t x) const {
  std::uint64_t left = x >> half_bits_;
  std::uint64_t right = x & half_mask_;
  for (int r = 0; r < kRounds; ++r) {
    std::uint64_t f = mix64(round_keys_[r] ^ right) & half_mask_;
    std::uint64_t next_right = left ^ f;
    left = right;
    right = next_right;
  }
  return (left << half_bits_) | right;
}

std::uint64_t PositionPartition::feistel_backward(std::uint64_t x) const {
  std::uint64_t left = x >> half_bits_;
  std::uint64_t right = x & half_mask_;
  for (int r = kRounds - 1; r >= 0; --r) {
    std::uint64_t f = mix64(round_keys_[r] ^ left) & half_mask_;
    std::uint64_t prev_left = right ^ f;
    right = left;
    left = prev_left;
  }
  return (left << half_bits_) | right;
}

std::uint32_t PositionPartition::token_at_rank(std::uint32_t rank) const {
  if (rank >= domain_) throw std::out_of_range("rank out of range");
  std::uint64_t x = rank;
  do {
    x = feistel_forward(x);
  } while (x >= domain_);
  return static_cast<std::uint32_t>(x);
}

std::uint32_t PositionPartition::rank_of(std::uint32_t token) const {
  if (token >= domain_) {
    throw std::out_of_range("token " + std::to_string(token) + " out of range (K=" +
                            std::to_string(domain_) + ")");
  }
  std::uint64_t x = token;
  do {
    x = feistel_backward(x);
  } while (x >= domain_);
  return static_cast<std::uint32_t>(x);
}

bool is_green(const PartitionSpec& spec, std::uint64_t position, std::uint32_t token) {
  return PositionPartition(spec, position).is_green(token);
}

std::uint32_t replace_token(const Codebook& codebook, const PartitionSpec& spec,
                            std::uint64_t position, std::uint32_t token, Side target) {
  PositionPartition partition(spec, position);
  return replace_token(codebook, partition, token, target);
}

std::uint32_t replace_token(const Codebook& codebook, const PositionPartition& partition,
                            std::uint32_t token, Side target) {
  if (codebook.size() != partition.domain_size()) {
    throw std::invalid_argument("codebook size does not match partition domain");
  }
  const bool want_green = (target == Side::green);
  if (partition.is_green(token) == want_green) return token;

  for (std::uint32_t cand : codebook.neighbors(token)) {
    if (partition.is_green(cand) == want_green) return cand;
  }

  // Truncated list had no entry on the target side; scan everything.
  // The walk above is expected to succeed after ~1/gamma probes, so this
  // path is exercised only by adversarial gamma/codebook combinations.
  std::vector<double> sims;
  codebook.similarity_row(token, sims);
  bool found = false;
  std::uint32_t best = 0;
  double best_sim = 0.0;
  for (std::uint32_t j = 0; j < codebook.size(); ++j) {
    if (j == token || partition.is_green(j) != want_green) continue;
    if (!found || sims[j] > best_sim) {
      found = true;
      best = j;
      best_sim = sims[j];
    }
  }
  if (!found) {
    // Unreachable for a valid spec: both sides are non-empty.
    throw std::logic_error("no candidate on target side");
  }
  return best;
}

}  // namespace wmark

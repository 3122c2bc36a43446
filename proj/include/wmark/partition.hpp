#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wmark/codebook.hpp"
#include "wmark/hash.hpp"

namespace wmark {

enum class PartitionMode {
  adaptive,    // seed = SHA-256(key || position): a fresh partition per position
  static_key,  // seed = SHA-256(key): one partition for every position
};

enum class Side { green, red };

// Secret-keyed partition parameters. Green/red sets are both required to
// be non-empty, so gamma values with floor(gamma*K) in {0, K} are
// rejected up front.
class PartitionSpec {
 public:
  PartitionSpec(std::vector<std::uint8_t> key, double gamma, std::uint32_t codebook_size,
                PartitionMode mode = PartitionMode::adaptive);

  const std::vector<std::uint8_t>& key() const { return key_; }
  double gamma() const { return gamma_; }
  std::uint32_t codebook_size() const { return codebook_size_; }
  std::uint32_t green_count() const { return green_count_; }
  PartitionMode mode() const { return mode_; }

 private:
  std::vector<std::uint8_t> key_;
  double gamma_;
  std::uint32_t codebook_size_;
  std::uint32_t green_count_;
  PartitionMode mode_;
};

// seed_i = SHA-256(key || big-endian-64(position)) in adaptive mode;
// static mode hashes the key alone.
Digest256 derive_seed(const PartitionSpec& spec, std::uint64_t position);

// One position's green/red partition: the green set is the first
// floor(gamma*K) entries of a keyed pseudorandom shuffle of the codebook
// indices. The shuffle is realized as a balanced Feistel network over the
// index domain with cycle-walking, so rank queries cost O(1) instead of
// materializing K entries per position.
class PositionPartition {
 public:
  PositionPartition(const PartitionSpec& spec, std::uint64_t position);

  std::uint32_t domain_size() const { return domain_; }
  std::uint32_t green_count() const { return green_count_; }

  bool is_green(std::uint32_t token) const { return rank_of(token) < green_count_; }

  // Inverse permutation: position of `token` in the keyed shuffle.
  std::uint32_t rank_of(std::uint32_t token) const;
  // Forward permutation: token at `rank`. Used by tests to materialize
  // the full permutation and by green-set enumeration.
  std::uint32_t token_at_rank(std::uint32_t rank) const;

 private:
  static constexpr int kRounds = 10;

  std::uint64_t feistel_forward(std::uint64_t x) const;
  std::uint64_t feistel_backward(std::uint64_t x) const;

  std::uint32_t domain_;
  std::uint32_t green_count_;
  int half_bits_;
  std::uint64_t half_mask_;
  std::array<std::uint64_t, kRounds> round_keys_;
};

bool is_green(const PartitionSpec& spec, std::uint64_t position, std::uint32_t token);

// Moves `token` onto the requested side of the partition at `position`,
// keeping it unchanged when already there; otherwise returns the most
// similar entry on that side (ties by ascending index). Walks the
// codebook's neighbor list first and falls back to an exhaustive scan if
// a truncated list has no entry on the target side.
std::uint32_t replace_token(const Codebook& codebook, const PartitionSpec& spec,
                            std::uint64_t position, std::uint32_t token, Side target);
std::uint32_t replace_token(const Codebook& codebook, const PositionPartition& partition,
                            std::uint32_t token, Side target);

}  // namespace wmark

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace wmark {

// Philox4x32-10 block function (Salmon et al., SC'11). Counter-based:
// output depends only on (counter, key), so streams keyed by
// (master seed, purpose, trial index) give reproducible Monte Carlo
// results regardless of how trials are scheduled across workers.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// splitmix64 finalizer on its own; a cheap 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key, std::uint64_t substream = 0)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        substream_(substream) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Unbiased uniform draw from [0, n), n >= 1, by rejection.
  std::uint64_t bounded(std::uint64_t n);

  // Uniform in [0, 1) with 53 random bits.
  double uniform_double();

  // Standard normal via Box-Muller; second draw of each pair is cached.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_normal_ = 0.0;
  bool have_spare_ = false;
};

// Independent stream for (master seed, tag, index), derived by hashing so
// no coordination between streams is ever needed.
RngStream derive_stream(std::uint64_t master_seed, std::string_view tag,
                        std::uint64_t index);

}  // namespace wmark

#include "wmark/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "wmark/hash.hpp"

namespace wmark {

namespace {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(c[0]) * kMul0;
    std::uint64_t p1 = static_cast<std::uint64_t>(c[2]) * kMul1;
    std::array<std::uint32_t, 4> next = {
        static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
        static_cast<std::uint32_t>(p0),
    };
    c = next;
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

void RngStream::refill() {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_),
      static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(substream_),
      static_cast<std::uint32_t>(substream_ >> 32),
  };
  buf_ = philox4x32(ctr, key_);
  ++block_;
  pos_ = 0;
}

std::uint32_t RngStream::next_u32() {
  if (pos_ >= 4) refill();
  return buf_[pos_++];
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t lo = next_u32();
  std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

std::uint64_t RngStream::bounded(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("bounded(0)");
  if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
  // Accept draws below the largest multiple of n.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  for (;;) {
    std::uint64_t u = next_u64();
    if (u <= limit) return u % n;
  }
}

double RngStream::uniform_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_normal_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

RngStream derive_stream(std::uint64_t master_seed, std::string_view tag,
                        std::uint64_t index) {
  std::vector<std::uint8_t> msg(16 + tag.size());
  store_be64(master_seed, msg.data());
  store_be64(index, msg.data() + 8);
  std::memcpy(msg.data() + 16, tag.data(), tag.size());
  Digest256 d = sha256(msg);
  return RngStream(load_be64(d.data()), load_be64(d.data() + 8));
}

}  // namespace wmark

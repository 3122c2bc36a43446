#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wmark {

// Binary primitive BCH code over GF(2^m), n = 2^m - 1. Systematic
// encoding: message bits occupy codeword positions n-k..n-1, parity the
// low n-k positions (coefficient order, low degree first).
//
// d and t are the advertised design parameters the decoder honors; the
// generator polynomial is the standard narrow-sense one for the (n, k)
// pair, which for (63, 36) has designed distance 11 even though the
// configuration table lists d = 5. Decoding corrects up to t errors and
// reports failure beyond that; a final divisibility check catches most
// heavier patterns, but miscorrections past t remain possible and are
// documented behavior.
struct BchCode {
  int n, k, d, t, m;
  std::vector<std::uint8_t> generator;   // GF(2) coefficients, low degree first
  std::vector<std::uint32_t> alpha_to;   // antilog table, n entries
  std::vector<std::int32_t> index_of;    // log table, 2^m entries, index_of[0] = -1

  double rate() const { return static_cast<double>(k) / n; }
};

// Builds the narrow-sense BCH code with the given design distance.
// Primitive polynomials are pinned per m (5: x^5+x^2+1, 6: x^6+x+1,
// 7: x^7+x^3+1) so codewords are identical across platforms and runs.
BchCode make_bch(int m, int design_distance, int advertised_d, int advertised_t);

// Message-length to code mapping: 16 -> (31,16,7), 32 -> (63,36,5),
// 48 -> (63,51,5), 64 -> (127,64,21); other lengths use the smallest k
// that fits, zero-padded. Lengths above 64 are unsupported.
const BchCode& select_code(int message_bits);

std::vector<std::uint8_t> bch_encode(const BchCode& code,
                                     std::span<const std::uint8_t> message);

struct BchDecodeResult {
  bool ok = false;
  std::vector<std::uint8_t> message;  // k bits, valid only when ok
  int corrected = 0;
};

BchDecodeResult bch_decode(const BchCode& code, std::span<const std::uint8_t> received);

struct MessagePayload {
  std::vector<std::uint8_t> message;   // B raw bits
  std::vector<std::uint8_t> codeword;  // n bits
  const BchCode* code = nullptr;
};

// Selects the code for message.size() bits, zero-pads to k, encodes.
MessagePayload encode_message(std::span<const std::uint8_t> message);

}  // namespace wmark

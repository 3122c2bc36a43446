#include "wmark/bch.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace wmark {

namespace {

std::uint32_t primitive_poly(int m) {
  switch (m) {
    case 5: return 0x25;  // x^5 + x^2 + 1
    case 6: return 0x43;  // x^6 + x + 1
    case 7: return 0x89;  // x^7 + x^3 + 1
    default: throw std::invalid_argument("unsupported field degree m=" + std::to_string(m));
  }
}

std::uint32_t gf_mul(const BchCode& c, std::uint32_t x, std::uint32_t y) {
  if (x == 0 || y == 0) return 0;
  return c.alpha_to[(c.index_of[x] + c.index_of[y]) % c.n];
}

std::uint32_t gf_div(const BchCode& c, std::uint32_t x, std::uint32_t y) {
  if (x == 0) return 0;
  return c.alpha_to[(c.index_of[x] - c.index_of[y] + c.n) % c.n];
}

// remainder of poly (low-first bits) divided by the generator, over GF(2)
bool divisible_by_generator(const BchCode& c, std::span<const std::uint8_t> poly) {
  std::vector<std::uint8_t> rem(poly.begin(), poly.end());
  const int deg_g = static_cast<int>(c.generator.size()) - 1;
  for (int i = static_cast<int>(rem.size()) - 1; i >= deg_g; --i) {
    if (!rem[i]) continue;
    for (int j = 0; j <= deg_g; ++j) rem[i - deg_g + j] ^= c.generator[j];
  }
  return std::all_of(rem.begin(), rem.end(), [](std::uint8_t b) { return b == 0; });
}

}  // namespace

BchCode make_bch(int m, int design_distance, int advertised_d, int advertised_t) {
  BchCode c;
  c.m = m;
  c.n = (1 << m) - 1;
  c.d = advertised_d;
  c.t = advertised_t;

  c.alpha_to.assign(c.n, 0);
  c.index_of.assign(1 << m, -1);
  std::uint32_t prim = primitive_poly(m);
  std::uint32_t a = 1;
  for (int i = 0; i < c.n; ++i) {
    c.alpha_to[i] = a;
    c.index_of[a] = i;
    a <<= 1;
    if (a & (1u << m)) a ^= prim;
  }

  // Generator = product of minimal polynomials over the cyclotomic cosets
  // of alpha^1 .. alpha^(design_distance - 1).
  std::set<int> covered;
  std::vector<std::uint8_t> gen = {1};
  for (int e = 1; e < design_distance; ++e) {
    int rep = e % c.n;
    if (covered.count(rep)) continue;
    std::vector<int> coset;
    int x = rep;
    while (!covered.count(x)) {
      covered.insert(x);
      coset.push_back(x);
      x = (2 * x) % c.n;
    }
    // Minimal polynomial: product of (x + alpha^j) over the coset; the
    // result must land in GF(2).
    std::vector<std::uint32_t> mp = {1};
    for (int j : coset) {
      std::uint32_t root = c.alpha_to[j];
      std::vector<std::uint32_t> next(mp.size() + 1, 0);
      for (std::size_t i = 0; i < mp.size(); ++i) {
        next[i + 1] ^= mp[i];
        next[i] ^= gf_mul(c, mp[i], root);
      }
      mp = std::move(next);
    }
    for (std::uint32_t coeff : mp) {
      if (coeff > 1) throw std::logic_error("minimal polynomial has non-binary coefficient");
    }
    // gen *= mp over GF(2)
    std::vector<std::uint8_t> prod(gen.size() + mp.size() - 1, 0);
    for (std::size_t i = 0; i < gen.size(); ++i) {
      if (!gen[i]) continue;
      for (std::size_t j = 0; j < mp.size(); ++j) prod[i + j] ^= static_cast<std::uint8_t>(mp[j]);
    }
    gen = std::move(prod);
  }

  c.generator = std::move(gen);
  c.k = c.n - (static_cast<int>(c.generator.size()) - 1);
  return c;
}

const BchCode& select_code(int message_bits) {
  static const BchCode code_31_16 = make_bch(5, 7, 7, 3);
  static const BchCode code_63_36 = make_bch(6, 11, 5, 2);
  static const BchCode code_63_51 = make_bch(6, 5, 5, 2);
  static const BchCode code_127_64 = make_bch(7, 21, 21, 10);

  if (message_bits < 1) throw std::invalid_argument("message length must be positive");
  if (message_bits > 64) {
    throw std::invalid_argument("message length " + std::to_string(message_bits) +
                                " exceeds the supported maximum of 64 bits");
  }
  if (message_bits <= 16) return code_31_16;
  if (message_bits <= 36) return code_63_36;
  if (message_bits <= 51) return code_63_51;
  return code_127_64;
}

std::vector<std::uint8_t> bch_encode(const BchCode& code,
                                     std::span<const std::uint8_t> message) {
  if (static_cast<int>(message.size()) > code.k) {
    throw std::invalid_argument("message of " + std::to_string(message.size()) +
                                " bits exceeds k=" + std::to_string(code.k));
  }
  const int nk = code.n - code.k;
  std::vector<std::uint8_t> msg(code.k, 0);
  for (std::size_t i = 0; i < message.size(); ++i) msg[i] = message[i] & 1u;

  // LFSR division: remainder of x^(n-k) * m(x) mod g(x).
  std::vector<std::uint8_t> reg(nk, 0);
  for (int i = code.k - 1; i >= 0; --i) {
    std::uint8_t feedback = msg[i] ^ reg[nk - 1];
    for (int j = nk - 1; j > 0; --j) {
      reg[j] = reg[j - 1] ^ (feedback & code.generator[j]);
    }
    reg[0] = feedback & code.generator[0];
  }

  std::vector<std::uint8_t> cw(code.n, 0);
  std::copy(reg.begin(), reg.end(), cw.begin());
  std::copy(msg.begin(), msg.end(), cw.begin() + nk);
  return cw;
}

BchDecodeResult bch_decode(const BchCode& code, std::span<const std::uint8_t> received) {
  if (static_cast<int>(received.size()) != code.n) {
    throw std::invalid_argument("received word must have length n=" + std::to_string(code.n));
  }
  BchDecodeResult result;
  const int two_t = 2 * code.t;

  // Syndromes S_j = r(alpha^j), j = 1..2t.
  std::vector<std::uint32_t> synd(two_t + 1, 0);
  bool all_zero = true;
  for (int j = 1; j <= two_t; ++j) {
    std::uint32_t s = 0;
    for (int i = 0; i < code.n; ++i) {
      if (received[i] & 1u) s ^= code.alpha_to[(static_cast<long long>(i) * j) % code.n];
    }
    synd[j] = s;
    if (s) all_zero = false;
  }

  std::vector<std::uint8_t> cw(received.begin(), received.end());
  int corrected = 0;

  if (!all_zero) {
    // Berlekamp-Massey for the error locator sigma(x).
    std::vector<std::uint32_t> sigma = {1}, prev = {1};
    int L = 0, gap = 1;
    std::uint32_t b = 1;
    for (int step = 0; step < two_t; ++step) {
      std::uint32_t delta = synd[step + 1];
      for (int i = 1; i <= L && i < static_cast<int>(sigma.size()); ++i) {
        delta ^= gf_mul(code, sigma[i], synd[step + 1 - i]);
      }
      if (delta == 0) {
        ++gap;
        continue;
      }
      std::vector<std::uint32_t> adjusted = sigma;
      std::uint32_t scale = gf_div(code, delta, b);
      if (adjusted.size() < prev.size() + gap) adjusted.resize(prev.size() + gap, 0);
      for (std::size_t i = 0; i < prev.size(); ++i) {
        adjusted[i + gap] ^= gf_mul(code, scale, prev[i]);
      }
      if (2 * L <= step) {
        prev = sigma;
        L = step + 1 - L;
        b = delta;
        gap = 1;
      } else {
        ++gap;
      }
      sigma = std::move(adjusted);
    }

    while (!sigma.empty() && sigma.back() == 0) sigma.pop_back();
    int deg = static_cast<int>(sigma.size()) - 1;
    if (L > code.t || deg != L) return result;  // more than t errors detected

    // Chien search: position p is in error iff sigma(alpha^(-p)) == 0.
    std::vector<int> error_positions;
    for (int p = 0; p < code.n && static_cast<int>(error_positions.size()) <= L; ++p) {
      std::uint32_t y = code.alpha_to[(code.n - p) % code.n];
      std::uint32_t acc = 0;
      std::uint32_t ypow = 1;
      for (std::uint32_t coeff : sigma) {
        acc ^= gf_mul(code, coeff, ypow);
        ypow = gf_mul(code, ypow, y);
      }
      if (acc == 0) error_positions.push_back(p);
    }
    if (static_cast<int>(error_positions.size()) != L) return result;

    for (int p : error_positions) cw[p] ^= 1u;
    corrected = L;
  }

  // A word that still fails divisibility carries more errors than the
  // locator explained; flag it instead of returning garbage.
  if (!divisible_by_generator(code, cw)) return result;

  result.ok = true;
  result.corrected = corrected;
  result.message.assign(cw.begin() + (code.n - code.k), cw.end());
  return result;
}

MessagePayload encode_message(std::span<const std::uint8_t> message) {
  MessagePayload payload;
  payload.code = &select_code(static_cast<int>(message.size()));
  payload.message.assign(message.begin(), message.end());
  for (auto& b : payload.message) b &= 1u;
  payload.codeword = bch_encode(*payload.code, payload.message);
  return payload;
}

}  // namespace wmark

#pragma once

#include <cstdint>
#include <vector>

#include "wmark/codebook.hpp"
#include "wmark/layout.hpp"

namespace wmark {

enum class Paradigm { next_token, next_scale };

// A flat view of generated tokens. Next-scale sequences concatenate the
// per-scale token maps coarse to fine and carry cumulative boundaries;
// next-token sequences have no boundaries. position_offset records the
// original index of tokens[0] so a cropped sequence can still be scored
// against the positions it was embedded at (aligned mode).
struct TokenSequence {
  std::vector<std::uint32_t> tokens;
  Paradigm paradigm = Paradigm::next_token;
  std::vector<std::uint64_t> scale_boundaries;
  std::uint64_t position_offset = 0;

  std::uint64_t size() const { return tokens.size(); }
  std::uint64_t position_of(std::uint64_t index) const { return position_offset + index; }
  void validate(std::uint32_t codebook_size) const;  // throws on inconsistency
};

enum class GeneratorFamily {
  uniform,  // i.i.d. uniform tokens
  markov,   // next token upweights embedding-space neighbors of the previous one
};

struct GeneratorConfig {
  Paradigm paradigm = Paradigm::next_token;
  std::uint32_t codebook_size = 0;
  std::uint64_t length = 0;                    // next-token only
  std::vector<std::uint64_t> scale_sizes;      // next-scale only (per-scale counts)
  GeneratorFamily family = GeneratorFamily::uniform;
  double markov_neighbor_prob = 0.7;
  std::uint32_t markov_neighbor_count = 16;

  std::uint64_t total_length() const;
  void validate() const;
};

// Synthetic stand-in for an AR model: deterministic per
// (config, condition_seed). The markov family needs the codebook's
// neighbor lists; pass nullptr for uniform.
TokenSequence get_token_sequence(const GeneratorConfig& config, const Codebook* codebook,
                                 std::uint64_t condition_seed);

// Identity bridge where a pixel decoder would slot in; the corruption
// channel models re-tokenization error instead.
TokenSequence decode_image(const TokenSequence& seq);

// Default coarse-to-fine schedule: squares of (1,2,3,4,5,6,8,10,13,16),
// ten scales totalling 680 tokens.
std::vector<std::uint64_t> default_scale_schedule();

// Layout dispatch: flat floor-formula split for next-token, scale-aware
// for next-scale.
WatermarkLayout layout_for(const TokenSequence& seq, std::uint32_t block_count);

}  // namespace wmark

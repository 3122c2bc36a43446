#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wmark/codebook.hpp"
#include "wmark/layout.hpp"
#include "wmark/partition.hpp"
#include "wmark/sequence.hpp"

namespace wmark {

// Forces every token in block j onto the green side when codeword bit j
// is 1 and onto the red side when it is 0; tokens already on the correct
// side pass through unchanged and replacements pick the most similar
// entry on the target side.
TokenSequence embed_sequence(const TokenSequence& seq, const WatermarkLayout& layout,
                             std::span<const std::uint8_t> codeword,
                             const PartitionSpec& spec, const Codebook& codebook);

// Per-block fraction of tokens in the base (un-swapped) green set, so
// extraction never needs to know the message.
std::vector<double> block_green_ratios(const TokenSequence& seq,
                                       const WatermarkLayout& layout,
                                       const PartitionSpec& spec);

// Raw bit estimates: 1 iff ratio strictly exceeds tau.
std::vector<std::uint8_t> decode_bits(std::span<const double> ratios, double tau = 0.5);

// Global green count over the whole sequence (the zero-bit statistic's
// numerator); consistent with the block ratios by construction.
std::uint64_t count_green(const TokenSequence& seq, const PartitionSpec& spec);

}  // namespace wmark

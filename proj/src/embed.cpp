#include "wmark/embed.hpp"

#include <stdexcept>
#include <string>

namespace wmark {

namespace {

void check_shapes(const TokenSequence& seq, const WatermarkLayout& layout,
                  const PartitionSpec& spec) {
  if (seq.size() != layout.total_positions) {
    throw std::invalid_argument("sequence length " + std::to_string(seq.size()) +
                                " does not match layout (" +
                                std::to_string(layout.total_positions) + ")");
  }
  seq.validate(spec.codebook_size());
}

}  // namespace

TokenSequence embed_sequence(const TokenSequence& seq, const WatermarkLayout& layout,
                             std::span<const std::uint8_t> codeword,
                             const PartitionSpec& spec, const Codebook& codebook) {
  check_shapes(seq, layout, spec);
  if (codeword.size() != layout.block_count()) {
    throw std::invalid_argument("codeword length " + std::to_string(codeword.size()) +
                                " does not match block count " +
                                std::to_string(layout.block_count()));
  }
  if (codebook.size() != spec.codebook_size()) {
    throw std::invalid_argument("codebook size does not match partition spec");
  }

  TokenSequence out = seq;
  for (std::size_t j = 0; j < layout.block_count(); ++j) {
    const Side target = (codeword[j] & 1u) ? Side::green : Side::red;
    const BlockRange& block = layout.blocks[j];
    for (std::uint64_t i = block.begin; i < block.end; ++i) {
      PositionPartition partition(spec, seq.position_of(i));
      out.tokens[i] = replace_token(codebook, partition, seq.tokens[i], target);
    }
  }
  return out;
}

std::vector<double> block_green_ratios(const TokenSequence& seq,
                                       const WatermarkLayout& layout,
                                       const PartitionSpec& spec) {
  check_shapes(seq, layout, spec);
  std::vector<double> ratios;
  ratios.reserve(layout.block_count());
  for (const BlockRange& block : layout.blocks) {
    std::uint64_t green = 0;
    for (std::uint64_t i = block.begin; i < block.end; ++i) {
      PositionPartition partition(spec, seq.position_of(i));
      green += partition.is_green(seq.tokens[i]) ? 1 : 0;
    }
    ratios.push_back(static_cast<double>(green) / static_cast<double>(block.size()));
  }
  return ratios;
}

std::vector<std::uint8_t> decode_bits(std::span<const double> ratios, double tau) {
  std::vector<std::uint8_t> bits;
  bits.reserve(ratios.size());
  for (double r : ratios) bits.push_back(r > tau ? 1 : 0);
  return bits;
}

std::uint64_t count_green(const TokenSequence& seq, const PartitionSpec& spec) {
  std::uint64_t green = 0;
  for (std::uint64_t i = 0; i < seq.size(); ++i) {
    PositionPartition partition(spec, seq.position_of(i));
    green += partition.is_green(seq.tokens[i]) ? 1 : 0;
  }
  return green;
}

}  // namespace wmark

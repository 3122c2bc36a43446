#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace wmark {

// Signals that the requested block count cannot fit the sequence.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BlockRange {
  std::uint64_t begin;
  std::uint64_t end;  // half-open
  std::uint64_t size() const { return end - begin; }
};

// Assignment of codeword bits to position ranges. Blocks are disjoint,
// ordered and cover [0, total_positions) exactly; every block is
// non-empty.
struct WatermarkLayout {
  std::uint64_t total_positions = 0;
  std::vector<BlockRange> blocks;
  std::vector<std::uint64_t> scale_boundaries;  // cumulative token counts; empty for flat layouts

  std::size_t block_count() const { return blocks.size(); }
};

// Floor-formula split: block j (1-based) is [(j-1)N/n, jN/n); sizes
// differ by at most one.
WatermarkLayout partition_blocks(std::uint64_t total_positions, std::uint32_t block_count);

// Scale-respecting split for coarse-to-fine sequences. With
// block_count >= #scales, blocks are apportioned to scales proportionally
// to token counts (largest remainder), so no block straddles a boundary;
// with fewer blocks than scales, whole scales are grouped greedily
// coarse-to-fine into contiguous groups of near-equal token counts.
WatermarkLayout assign_blocks_scale_aware(std::span<const std::uint64_t> scale_boundaries,
                                          std::uint32_t block_count);

}  // namespace wmark

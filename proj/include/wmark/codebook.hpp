#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wmark {

// Codebook embeddings plus the derived similarity structure used for
// semantic replacement. Embeddings are held in double precision; the
// on-disk format stores 32-bit floats (see io.hpp) and similarity is
// always computed in double regardless of stored precision.
//
// Instead of a dense K x K similarity matrix (infeasible for large K),
// each entry keeps a neighbor list sorted by descending cosine similarity
// with ties broken by ascending index. Lists are complete (K-1 entries)
// for K <= kFullListLimit and truncated to the top kMaxNeighbors
// otherwise; replacement falls back to an exhaustive scan when a
// truncated list is exhausted.
class Codebook {
 public:
  static constexpr std::uint32_t kFullListLimit = 4096;
  static constexpr std::uint32_t kMaxNeighbors = 1024;

  // Takes row-major K x D embeddings. Rejects zero vectors.
  Codebook(std::uint32_t size, std::uint32_t dim, std::vector<double> embeddings);

  // K unit vectors drawn from a spherical Gaussian; bit-identical for
  // identical (seed, size, dim).
  static Codebook synth(std::uint64_t seed, std::uint32_t size, std::uint32_t dim);

  std::uint32_t size() const { return size_; }
  std::uint32_t dim() const { return dim_; }

  std::span<const double> embedding(std::uint32_t i) const;
  const double* data() const { return embeddings_.data(); }
  double inv_norm(std::uint32_t i) const;

  double cosine_similarity(std::uint32_t i, std::uint32_t j) const;

  // sims[j] = cosine_similarity(i, j) for all j, via the active kernel backend.
  void similarity_row(std::uint32_t i, std::vector<double>& sims) const;

  // Precomputes all neighbor lists. Idempotent; call once after
  // construction, before replacement queries.
  void build_neighbor_lists();
  bool has_neighbor_lists() const { return !neighbors_.empty(); }
  bool neighbor_lists_truncated() const { return neighbor_len_ < size_ - 1; }
  std::span<const std::uint32_t> neighbors(std::uint32_t i) const;

 private:
  void check_index(std::uint32_t i) const;

  std::uint32_t size_;
  std::uint32_t dim_;
  std::vector<double> embeddings_;   // row-major K x D
  std::vector<double> inv_norms_;    // 1 / ||e_i||
  std::vector<std::uint32_t> neighbors_;  // flattened, neighbor_len_ per entry
  std::uint32_t neighbor_len_ = 0;
};

}  // namespace wmark

#include "wmark/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wmark/kernels.hpp"
#include "wmark/rng.hpp"

namespace wmark {

Codebook::Codebook(std::uint32_t size, std::uint32_t dim, std::vector<double> embeddings)
    : size_(size), dim_(dim), embeddings_(std::move(embeddings)) {
  if (size_ < 2) throw std::invalid_argument("codebook size must be >= 2");
  if (dim_ < 1) throw std::invalid_argument("codebook dimension must be >= 1");
  if (embeddings_.size() != static_cast<std::size_t>(size_) * dim_) {
    throw std::invalid_argument("embedding buffer size does not match K*D");
  }
  inv_norms_.resize(size_);
  for (std::uint32_t i = 0; i < size_; ++i) {
    double sq = kernels::squared_norm(embeddings_.data() + static_cast<std::size_t>(i) * dim_, dim_);
    if (sq == 0.0) {
      throw std::invalid_argument("codebook entry " + std::to_string(i) + " has zero norm");
    }
    inv_norms_[i] = 1.0 / std::sqrt(sq);
  }
}

Codebook Codebook::synth(std::uint64_t seed, std::uint32_t size, std::uint32_t dim) {
  if (size < 2) throw std::invalid_argument("synth codebook requires K >= 2");
  if (dim < 1) throw std::invalid_argument("synth codebook requires D >= 1");
  std::vector<double> emb(static_cast<std::size_t>(size) * dim);
  for (std::uint32_t i = 0; i < size; ++i) {
    // One stream per entry keyed by (seed, index): entries can be drawn in
    // any order (or in parallel) with identical results.
    RngStream rng = derive_stream(seed, "codebook-entry", i);
    double* row = emb.data() + static_cast<std::size_t>(i) * dim;
    double sq;
    do {
      for (std::uint32_t c = 0; c < dim; ++c) row[c] = rng.normal();
      sq = kernels::squared_norm(row, dim);
    } while (sq == 0.0);
    double inv = 1.0 / std::sqrt(sq);
    for (std::uint32_t c = 0; c < dim; ++c) row[c] *= inv;
  }
  return Codebook(size, dim, std::move(emb));
}

std::span<const double> Codebook::embedding(std::uint32_t i) const {
  check_index(i);
  return {embeddings_.data() + static_cast<std::size_t>(i) * dim_, dim_};
}

double Codebook::inv_norm(std::uint32_t i) const {
  check_index(i);
  return inv_norms_[i];
}

double Codebook::cosine_similarity(std::uint32_t i, std::uint32_t j) const {
  check_index(i);
  check_index(j);
  double d = kernels::dot(embeddings_.data() + static_cast<std::size_t>(i) * dim_,
                          embeddings_.data() + static_cast<std::size_t>(j) * dim_, dim_);
  return (d * inv_norms_[i]) * inv_norms_[j];
}

void Codebook::similarity_row(std::uint32_t i, std::vector<double>& sims) const {
  check_index(i);
  sims.resize(size_);
  kernels::scaled_dot_rows(embeddings_.data() + static_cast<std::size_t>(i) * dim_,
                           embeddings_.data(), size_, dim_, inv_norms_[i],
                           inv_norms_.data(), sims.data());
}

void Codebook::build_neighbor_lists() {
  if (has_neighbor_lists()) return;
  neighbor_len_ = size_ <= kFullListLimit ? size_ - 1 : kMaxNeighbors;
  neighbors_.resize(static_cast<std::size_t>(size_) * neighbor_len_);

  std::vector<double> sims;
  std::vector<std::uint32_t> order(size_);
  for (std::uint32_t i = 0; i < size_; ++i) {
    similarity_row(i, sims);
    order.resize(size_ - 1);
    std::uint32_t w = 0;
    for (std::uint32_t j = 0; j < size_; ++j) {
      if (j != i) order[w++] = j;
    }
    auto cmp = [&sims](std::uint32_t a, std::uint32_t b) {
      if (sims[a] != sims[b]) return sims[a] > sims[b];
      return a < b;
    };
    if (neighbor_len_ < order.size()) {
      std::partial_sort(order.begin(), order.begin() + neighbor_len_, order.end(), cmp);
    } else {
      std::sort(order.begin(), order.end(), cmp);
    }
    std::copy_n(order.begin(), neighbor_len_,
                neighbors_.begin() + static_cast<std::size_t>(i) * neighbor_len_);
  }
}

std::span<const std::uint32_t> Codebook::neighbors(std::uint32_t i) const {
  check_index(i);
  if (!has_neighbor_lists()) {
    throw std::logic_error("neighbor lists not built; call build_neighbor_lists()");
  }
  return {neighbors_.data() + static_cast<std::size_t>(i) * neighbor_len_, neighbor_len_};
}

void Codebook::check_index(std::uint32_t i) const {
  if (i >= size_) {
    throw std::out_of_range("codebook index " + std::to_string(i) + " out of range (K=" +
                            std::to_string(size_) + ")");
  }
}

}  // namespace wmark

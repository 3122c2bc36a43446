#pragma once

#include <cstddef>
#include <string>

namespace wmark::kernels {

// Inner-product kernels behind codebook similarity. Every backend
// accumulates into four interleaved double partials (lane l sums elements
// l, l+4, l+8, ...) combined as (p0 + p1) + (p2 + p3). Pinning the
// summation order this way makes scalar and SIMD results bit-identical,
// which keeps neighbor orderings stable no matter which backend ran.
enum class Backend { scalar, avx2 };

double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);

// out[j] = (dot(query, rows + j*dim) * query_scale) * scales[j]
void scaled_dot_rows(const double* query, const double* rows, std::size_t count,
                     std::size_t dim, double query_scale, const double* scales,
                     double* out);

Backend active_backend();
bool backend_available(Backend b);
void force_backend(Backend b);  // throws std::runtime_error if unavailable
std::string backend_name(Backend b);

}  // namespace wmark::kernels

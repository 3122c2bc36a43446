#include "kernels_internal.hpp"

namespace wmark::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    p0 += a[i] * b[i];
    p1 += a[i + 1] * b[i + 1];
    p2 += a[i + 2] * b[i + 2];
    p3 += a[i + 3] * b[i + 3];
  }
  switch (n - i) {
    case 3: p2 += a[i + 2] * b[i + 2]; [[fallthrough]];
    case 2: p1 += a[i + 1] * b[i + 1]; [[fallthrough]];
    case 1: p0 += a[i] * b[i]; break;
    default: break;
  }
  return (p0 + p1) + (p2 + p3);
}

double squared_norm_scalar(const double* a, std::size_t n) {
  return dot_scalar(a, a, n);
}

void scaled_dot_rows_scalar(const double* query, const double* rows, std::size_t count,
                            std::size_t dim, double query_scale, const double* scales,
                            double* out) {
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = (dot_scalar(query, rows + j * dim, dim) * query_scale) * scales[j];
  }
}

}  // namespace

const KernelTable scalar_table = {dot_scalar, squared_norm_scalar, scaled_dot_rows_scalar};

}  // namespace wmark::kernels::detail

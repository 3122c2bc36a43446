#include "wmark/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

#include "kernels_internal.hpp"

namespace wmark::kernels {

namespace {

Backend pick_default() {
#if defined(__x86_64__) || defined(_M_X64)
  const char* env = std::getenv("WMARK_BACKEND");
  if (env && std::string(env) == "scalar") return Backend::scalar;
  if (detail::cpu_has_avx2()) return Backend::avx2;
#endif
  return Backend::scalar;
}

const detail::KernelTable* table_for(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
  if (b == Backend::avx2) return &detail::avx2_table;
#endif
  return &detail::scalar_table;
}

Backend g_backend = pick_default();
const detail::KernelTable* g_table = table_for(g_backend);

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  return g_table->dot(a, b, n);
}

double squared_norm(const double* a, std::size_t n) {
  return g_table->squared_norm(a, n);
}

void scaled_dot_rows(const double* query, const double* rows, std::size_t count,
                     std::size_t dim, double query_scale, const double* scales,
                     double* out) {
  g_table->scaled_dot_rows(query, rows, count, dim, query_scale, scales, out);
}

Backend active_backend() { return g_backend; }

bool backend_available(Backend b) {
  if (b == Backend::scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
  return detail::cpu_has_avx2();
#else
  return false;
#endif
}

void force_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error("kernel backend not available: " + backend_name(b));
  }
  g_backend = b;
  g_table = table_for(b);
}

std::string backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

}  // namespace wmark::kernels

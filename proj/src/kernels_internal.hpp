#pragma once

#include <cstddef>

namespace wmark::kernels::detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  void (*scaled_dot_rows)(const double*, const double*, std::size_t, std::size_t,
                          double, const double*, double*);
};

extern const KernelTable scalar_table;

#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
bool cpu_has_avx2();
#endif

}  // namespace wmark::kernels::detail

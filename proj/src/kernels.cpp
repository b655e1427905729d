#include "ft/kernels.hpp"

#include "kernels_internal.hpp"

namespace ft::kernels {
namespace {

struct Table {
  void (*gram)(const double*, std::size_t, int, double*);
  void (*gram_rhs)(const double*, const double*, std::size_t, int, double*);
  void (*apply_rows)(const double*, const double*, int, int, const double*,
                     std::size_t, double*);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*abs_max)(const double*, std::size_t);
};

constexpr Table scalar_table = {
    detail::gram_scalar,   detail::gram_rhs_scalar, detail::apply_rows_scalar,
    detail::dot_scalar,    detail::sumsq_scalar,    detail::abs_max_scalar,
};

#if defined(FT_HAVE_AVX2)
constexpr Table avx2_table = {
    detail::gram_avx2,   detail::gram_rhs_avx2, detail::apply_rows_avx2,
    detail::dot_avx2,    detail::sumsq_avx2,    detail::abs_max_avx2,
};
#endif

Backend g_backend = avx2_supported() ? Backend::avx2 : Backend::scalar;

const Table& table() {
#if defined(FT_HAVE_AVX2)
  if (g_backend == Backend::avx2) return avx2_table;
#endif
  return scalar_table;
}

}  // namespace

bool avx2_supported() {
#if defined(FT_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return g_backend; }

bool set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported()) return false;
  g_backend = b;
  return true;
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

void gram(const double* x, std::size_t n, int k, double* h) {
  table().gram(x, n, k, h);
}
void gram_rhs(const double* x, const double* y, std::size_t n, int k, double* g) {
  table().gram_rhs(x, y, n, k, g);
}
void apply_rows(const double* c, const double* off, int m, int k,
                const double* x, std::size_t n, double* out) {
  table().apply_rows(c, off, m, k, x, n, out);
}
double dot(const double* a, const double* b, std::size_t n) {
  return table().dot(a, b, n);
}
double sumsq(const double* a, std::size_t n) { return table().sumsq(a, n); }
double abs_max(const double* a, std::size_t n) { return table().abs_max(a, n); }

}  // namespace ft::kernels

#include <cmath>

#include "kernels_internal.hpp"

namespace ft::kernels::detail {

void gram_scalar(const double* x, std::size_t n, int k, double* h) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * k;
    for (int a = 0; a < k; ++a) {
      double xa = xi[a];
      double* hrow = h + std::size_t(a) * k;
      for (int b = 0; b < k; ++b) hrow[b] += xa * xi[b];
    }
  }
}

void gram_rhs_scalar(const double* x, const double* y, std::size_t n, int k, double* g) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * k;
    double yi = y[i];
    for (int a = 0; a < k; ++a) g[a] += yi * xi[a];
  }
}

void apply_rows_scalar(const double* c, const double* off, int m, int k,
                       const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * k;
    double* oi = out + i * m;
    for (int r = 0; r < m; ++r) {
      const double* cr = c + std::size_t(r) * k;
      double s = 0.0;
      for (int j = 0; j < k; ++j) s += cr[j] * xi[j];
      oi[r] = s + (off ? off[r] : 0.0);
    }
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sumsq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double abs_max_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}

}  // namespace ft::kernels::detail

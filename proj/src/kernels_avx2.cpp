#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

// AVX2/FMA variants. Loops are structured as 4-wide vector body + scalar
// remainder; k is small (6..13), n is the long axis.

namespace ft::kernels::detail {

static inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

void gram_avx2(const double* x, std::size_t n, int k, double* h) {
  int kv = k & ~3;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * k;
    for (int a = 0; a < k; ++a) {
      double* hrow = h + std::size_t(a) * k;
      __m256d xa = _mm256_set1_pd(xi[a]);
      int b = 0;
      for (; b < kv; b += 4) {
        __m256d acc = _mm256_loadu_pd(hrow + b);
        acc = _mm256_fmadd_pd(xa, _mm256_loadu_pd(xi + b), acc);
        _mm256_storeu_pd(hrow + b, acc);
      }
      for (; b < k; ++b) hrow[b] = std::fma(xi[a], xi[b], hrow[b]);
    }
  }
}

void gram_rhs_avx2(const double* x, const double* y, std::size_t n, int k, double* g) {
  int kv = k & ~3;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * k;
    __m256d yi = _mm256_set1_pd(y[i]);
    int a = 0;
    for (; a < kv; a += 4) {
      __m256d acc = _mm256_loadu_pd(g + a);
      acc = _mm256_fmadd_pd(yi, _mm256_loadu_pd(xi + a), acc);
      _mm256_storeu_pd(g + a, acc);
    }
    for (; a < k; ++a) g[a] = std::fma(y[i], xi[a], g[a]);
  }
}

void apply_rows_avx2(const double* c, const double* off, int m, int k,
                     const double* x, std::size_t n, double* out) {
  int kv = k & ~3;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * k;
    double* oi = out + i * m;
    for (int r = 0; r < m; ++r) {
      const double* cr = c + std::size_t(r) * k;
      __m256d acc = _mm256_setzero_pd();
      int j = 0;
      for (; j < kv; j += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(cr + j), _mm256_loadu_pd(xi + j), acc);
      double s = hsum(acc);
      for (; j < k; ++j) s = std::fma(cr[j], xi[j], s);
      oi[r] = s + (off ? off[r] : 0.0);
    }
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, nv = n & ~std::size_t(3);
  for (; i < nv; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double sumsq_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, nv = n & ~std::size_t(3);
  for (; i < nv; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s = std::fma(a[i], a[i], s);
  return s;
}

double abs_max_avx2(const double* a, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0, nv = n & ~std::size_t(3);
  for (; i < nv; i += 4)
    best = _mm256_max_pd(best, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
  double lanes[4];
  _mm256_storeu_pd(lanes, best);
  double m = lanes[0];
  for (int l = 1; l < 4; ++l)
    if (lanes[l] > m) m = lanes[l];
  for (; i < n; ++i) {
    double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}

}  // namespace ft::kernels::detail

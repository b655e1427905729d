#pragma once
#include <cstddef>

// per-backend entry points; the dispatch table lives in kernels.cpp

namespace ft::kernels::detail {

void gram_scalar(const double* x, std::size_t n, int k, double* h);
void gram_rhs_scalar(const double* x, const double* y, std::size_t n, int k, double* g);
void apply_rows_scalar(const double* c, const double* off, int m, int k,
                       const double* x, std::size_t n, double* out);
double dot_scalar(const double* a, const double* b, std::size_t n);
double sumsq_scalar(const double* a, std::size_t n);
double abs_max_scalar(const double* a, std::size_t n);

#if defined(FT_HAVE_AVX2)
void gram_avx2(const double* x, std::size_t n, int k, double* h);
void gram_rhs_avx2(const double* x, const double* y, std::size_t n, int k, double* g);
void apply_rows_avx2(const double* c, const double* off, int m, int k,
                     const double* x, std::size_t n, double* out);
double dot_avx2(const double* a, const double* b, std::size_t n);
double sumsq_avx2(const double* a, std::size_t n);
double abs_max_avx2(const double* a, std::size_t n);
#endif

}  // namespace ft::kernels::detail

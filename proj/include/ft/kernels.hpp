#pragma once
#include <cstddef>

// Data-parallel inner loops over long sample series, in scalar and AVX2
// flavors selected at runtime. Results agree to floating-point roundoff
// (AVX2 uses FMA), not bit-for-bit; a given backend is fully deterministic.

namespace ft::kernels {

enum class Backend { scalar, avx2 };

bool avx2_supported();
Backend active_backend();
// returns false when the requested backend is unavailable on this machine
bool set_backend(Backend b);
const char* backend_name(Backend b);

// h (k x k, row-major) += sum_i x_i x_i^T for the n rows of x (n x k)
void gram(const double* x, std::size_t n, int k, double* h);
// g (k) += sum_i y_i * x_i
void gram_rhs(const double* x, const double* y, std::size_t n, int k, double* g);
// out (n x m) = x (n x k) * c^T (c is m x k) + off (m)
void apply_rows(const double* c, const double* off, int m, int k,
                const double* x, std::size_t n, double* out);
double dot(const double* a, const double* b, std::size_t n);
double sumsq(const double* a, std::size_t n);
double abs_max(const double* a, std::size_t n);

}  // namespace ft::kernels

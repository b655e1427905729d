#pragma once
#include <vector>

// Small dense linear algebra (row-major, n <= ~16). Everything the solver and
// calibrators need lives here so the numeric paths stay inspectable.

namespace ft::la {

using Vec = std::vector<double>;

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(size_t(r) * c, fill) {}

  double& operator()(int i, int j) { return a[size_t(i) * cols + j]; }
  double operator()(int i, int j) const { return a[size_t(i) * cols + j]; }
  double* row(int i) { return a.data() + size_t(i) * cols; }
  const double* row(int i) const { return a.data() + size_t(i) * cols; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, const Vec& x);
Mat transpose(const Mat& a);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
double frobenius(const Mat& a);
// max absolute row sum
double norm_inf(const Mat& a);

// in-place lower Cholesky; false when not positive definite
bool cholesky(Mat& m);
Vec chol_solve(const Mat& l, Vec b);

// LU with partial pivoting; throws RankDeficient on singular input
Mat inverse(Mat m);

// numerical rank by Gaussian elimination with partial pivoting; pivots below
// tol_rel * (largest initial pivot) count as zero. Used as the independent
// rank oracle.
int rank_elimination(Mat m, double tol_rel = 1e-10);

// cyclic Jacobi for symmetric matrices: a = v * diag(lambda) * v^T
struct Eigh {
  Vec lambda;  // ascending
  Mat v;       // columns are eigenvectors
};
Eigh jacobi_eigh(Mat a);

// minimum-norm solution of the normal equations h x = g where h = x^T x may be
// singular; eigenvalues <= rel_tol * lambda_max are treated as null directions.
Vec solve_minnorm(const Mat& h, const Vec& g, double rel_tol, bool* rank_deficient);

}  // namespace ft::la

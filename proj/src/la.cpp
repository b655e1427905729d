#include "ft/la.hpp"

#include <algorithm>
#include <cmath>

#include "ft/error.hpp"

namespace ft::la {

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) raise(errc::invalid_argument, "matmul shape mismatch");
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vec matvec(const Mat& a, const Vec& x) {
  if (a.cols != int(x.size())) raise(errc::invalid_argument, "matvec shape mismatch");
  Vec y(a.rows, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

double frobenius(const Mat& a) {
  double s = 0.0;
  for (double x : a.a) s += x * x;
  return std::sqrt(s);
}

double norm_inf(const Mat& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows; ++i) {
    double r = 0.0;
    for (int j = 0; j < a.cols; ++j) r += std::fabs(a(i, j));
    m = std::max(m, r);
  }
  return m;
}

bool cholesky(Mat& m) {
  int n = m.rows;
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
    if (!(d > 0.0)) return false;
    double lj = std::sqrt(d);
    m(j, j) = lj;
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
      m(i, j) = s / lj;
    }
    for (int k = j + 1; k < n; ++k) m(j, k) = 0.0;
  }
  return true;
}

Vec chol_solve(const Mat& l, Vec b) {
  int n = l.rows;
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * b[k];
    b[i] = s / l(i, i);
  }
  return b;
}

Mat inverse(Mat m) {
  if (m.rows != m.cols) raise(errc::invalid_argument, "inverse of non-square matrix");
  int n = m.rows;
  Mat inv = Mat::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(m(r, col)) > std::fabs(m(piv, col))) piv = r;
    if (std::fabs(m(piv, col)) < 1e-300)
      raise(errc::rank_deficient, "singular matrix in inverse");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(m(piv, j), m(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    double p = m(col, col);
    for (int j = 0; j < n; ++j) {
      m(col, j) /= p;
      inv(col, j) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = m(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        m(r, j) -= f * m(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

int rank_elimination(Mat m, double tol_rel) {
  int rank = 0;
  double scale = 0.0;
  for (double x : m.a) scale = std::max(scale, std::fabs(x));
  if (scale == 0.0) return 0;
  double tol = tol_rel * scale;
  int row = 0;
  for (int col = 0; col < m.cols && row < m.rows; ++col) {
    int piv = row;
    for (int r = row + 1; r < m.rows; ++r)
      if (std::fabs(m(r, col)) > std::fabs(m(piv, col))) piv = r;
    if (std::fabs(m(piv, col)) <= tol) continue;
    if (piv != row)
      for (int j = 0; j < m.cols; ++j) std::swap(m(piv, j), m(row, j));
    for (int r = row + 1; r < m.rows; ++r) {
      double f = m(r, col) / m(row, col);
      for (int j = col; j < m.cols; ++j) m(r, j) -= f * m(row, j);
    }
    ++row;
    ++rank;
  }
  return rank;
}

Eigh jacobi_eigh(Mat a) {
  if (a.rows != a.cols) raise(errc::invalid_argument, "jacobi_eigh: non-square");
  int n = a.rows;
  Mat v = Mat::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += a(i, i) * a(i, i);
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  Eigh e;
  e.lambda.resize(n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return a(x, x) < a(y, y); });
  e.v = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    e.lambda[j] = a(order[j], order[j]);
    for (int i = 0; i < n; ++i) e.v(i, j) = v(i, order[j]);
  }
  return e;
}

Vec solve_minnorm(const Mat& h, const Vec& g, double rel_tol, bool* rank_deficient) {
  Eigh e = jacobi_eigh(h);
  int n = h.rows;
  double lmax = 0.0;
  for (double l : e.lambda) lmax = std::max(lmax, l);
  bool deficient = false;
  Vec x(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double l = e.lambda[j];
    if (l <= rel_tol * lmax) {
      deficient = true;
      continue;
    }
    double proj = 0.0;
    for (int i = 0; i < n; ++i) proj += e.v(i, j) * g[i];
    proj /= l;
    for (int i = 0; i < n; ++i) x[i] += proj * e.v(i, j);
  }
  if (rank_deficient) *rank_deficient = deficient;
  return x;
}

}  // namespace ft::la

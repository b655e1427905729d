#include "ft/qp.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ft/kernels.hpp"

namespace ft::qp {

double Kkt::worst() const {
  return std::max(std::max(stationarity, feasibility),
                  std::max(dual_feasibility, complementarity));
}

namespace {

void validate(const Problem& p) {
  int n = p.n(), m = p.m();
  if (n < 1) raise(errc::invalid_argument, "qp: empty problem");
  if (p.h.rows != n || p.h.cols != n)
    raise(errc::length_mismatch, "qp: hessian shape does not match cost vector");
  if (m > 0 && (p.a.rows != m || p.a.cols != n))
    raise(errc::length_mismatch, "qp: constraint shape does not match bounds");
  if (m == 0 && p.a.rows != 0 && p.a.rows * p.a.cols != 0)
    raise(errc::length_mismatch, "qp: constraint rows without bounds");
  for (double v : p.h.a)
    if (!std::isfinite(v)) raise(errc::non_finite, "qp: hessian not finite");
  for (double v : p.c)
    if (!std::isfinite(v)) raise(errc::non_finite, "qp: cost not finite");
  for (double v : p.a.a)
    if (!std::isfinite(v)) raise(errc::non_finite, "qp: constraints not finite");
  for (double v : p.b)
    if (!std::isfinite(v)) raise(errc::non_finite, "qp: bounds not finite");
  double asym = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      asym = std::max(asym, std::fabs(p.h(i, j) - p.h(j, i)));
  if (asym > 1e-8 * std::max(1.0, la::norm_inf(p.h)))
    raise(errc::invalid_argument, "qp: hessian is not symmetric");
}

struct Factor {
  la::Mat l;
  bool ridged = false;
};

// Cholesky with a one-shot relative ridge fallback.
Factor factor_spd(const la::Mat& h, const char* what) {
  Factor f;
  f.l = h;
  if (la::cholesky(f.l)) return f;
  double tr = 0.0;
  for (int i = 0; i < h.rows; ++i) tr += h(i, i);
  double ridge = 1e-10 * tr / double(h.rows);
  if (!(ridge > 0.0)) ridge = 1e-300;
  f.l = h;
  for (int i = 0; i < h.rows; ++i) f.l(i, i) += ridge;
  if (!la::cholesky(f.l)) raise(errc::not_positive_definite, what);
  f.ridged = true;
  return f;
}

double row_dot(const la::Mat& a, int i, const la::Vec& x) {
  double s = 0.0;
  for (int j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
  return s;
}

struct WorkState {
  la::Vec x;
  std::vector<int> w;  // working set, insertion order
  la::Vec lam_w;       // multipliers for w
  bool hit_cap = false;
};

// Primal active set from a feasible start. Blocking picks the lowest index on
// ties and a negative multiplier drops the lowest constraint index (Bland's
// rule), so degenerate vertices cannot cycle.
WorkState active_set(const la::Mat& hs, const la::Vec& cs, const la::Mat& a,
                     const la::Vec& b, la::Vec start, const Factor& hf,
                     Flags& flags, int cap, int* iterations) {
  (void)flags;
  const int n = hs.rows, m = int(b.size());
  WorkState st;
  st.x = std::move(start);
  auto cost = [&](const la::Vec& x) {
    la::Vec hx = la::matvec(hs, x);
    return 0.5 * la::dot(x, hx) + la::dot(cs, x);
  };
  // raised to the observed step size whenever a full step fails to improve
  // the objective: that step is roundoff from the ill-conditioned solve
  double noise_floor = 0.0;

  for (int it = 1; it <= cap; ++it) {
    if (iterations) *iterations = it;
    la::Vec g = la::matvec(hs, st.x);
    for (int j = 0; j < n; ++j) g[j] += cs[j];

    la::Vec y = la::chol_solve(hf.l, g);
    la::Vec step(n, 0.0);
    st.lam_w.assign(st.w.size(), 0.0);
    if (st.w.empty()) {
      for (int j = 0; j < n; ++j) step[j] = -y[j];
    } else {
      int r = int(st.w.size());
      la::Mat z(n, r);  // columns hs^{-1} a_i^T
      for (int k = 0; k < r; ++k) {
        la::Vec col(n);
        for (int j = 0; j < n; ++j) col[j] = a(st.w[k], j);
        col = la::chol_solve(hf.l, std::move(col));
        for (int j = 0; j < n; ++j) z(j, k) = col[j];
      }
      la::Mat sc(r, r);
      for (int i = 0; i < r; ++i)
        for (int k = 0; k < r; ++k) {
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += a(st.w[i], j) * z(j, k);
          sc(i, k) = acc;
        }
      la::Vec rhs(r);
      for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += a(st.w[i], j) * y[j];
        rhs[i] = -acc;
      }
      // rank-aware solve: a redundant working-set row makes the Schur
      // complement singular; the min-norm multipliers still give the exact
      // projected step and the redundant row drops on the next multiplier test
      bool deficient = false;
      st.lam_w = la::solve_minnorm(sc, rhs, 1e-12, &deficient);
      for (int j = 0; j < n; ++j) {
        double acc = y[j];
        for (int k = 0; k < r; ++k) acc += z(j, k) * st.lam_w[k];
        step[j] = -acc;
      }
    }

    // a step below the cancellation floor of its own computation
    // (step = -(y + z*lam), both terms order |y|) is numerically zero
    double stat_tol = 1e-11 * (1.0 + la::norm_inf(st.x)) +
                      1e-13 * la::norm_inf(y) + noise_floor;
    if (la::norm_inf(step) <= stat_tol) {
      // stationary on the working set: optimal unless a multiplier is negative
      double tol = -1e-10 * (1.0 + la::norm_inf(st.lam_w));
      int drop = -1;
      for (int k = 0; k < int(st.w.size()); ++k)
        if (st.lam_w[k] < tol && (drop < 0 || st.w[k] < st.w[drop])) drop = k;
      if (drop < 0) return st;
      st.w.erase(st.w.begin() + drop);
      continue;
    }

    // longest feasible step along `step`, blocked by inactive constraints
    double alpha = 1.0;
    int block = -1;
    double step_norm = la::norm_inf(step);
    for (int i = 0; i < m; ++i) {
      if (std::find(st.w.begin(), st.w.end(), i) != st.w.end()) continue;
      double d = row_dot(a, i, step);
      double row_norm = 0.0;
      for (int j = 0; j < a.cols; ++j)
        row_norm = std::max(row_norm, std::abs(a(i, j)));
      // a row whose normal is numerically orthogonal to the step (relative
      // to its own scale) is dependent on the working set and cannot block
      if (d <= 1e-11 * row_norm * step_norm) continue;
      double slack = b[i] - row_dot(a, i, st.x);
      double ai = std::max(0.0, slack) / d;
      if (ai < alpha) {  // ascending scan keeps the lowest index on ties
        alpha = ai;
        block = i;
      }
    }
    if (block < 0) {
      // full step: must improve the objective or it is numerically zero,
      // in which case keep the current (feasible) iterate and remember the
      // floor so the multiplier test runs next
      la::Vec trial = st.x;
      for (int j = 0; j < n; ++j) trial[j] += step[j];
      double q0 = cost(st.x), q1 = cost(trial);
      if (q1 >= q0 - 1e-13 * (1.0 + std::abs(q0))) {
        noise_floor = std::max(noise_floor, 2.0 * step_norm);
        continue;
      }
      st.x = std::move(trial);
      continue;
    }
    for (int j = 0; j < n; ++j) st.x[j] += alpha * step[j];
    st.w.push_back(block);
  }
  st.hit_cap = true;
  return st;
}

// Projection onto violated halfspaces until a*x <= b holds; cheap polish for
// a start that is already close to feasible.
bool pocs(const la::Mat& a, const la::Vec& b, la::Vec& x, double feas_tol,
          int cap) {
  int m = int(b.size()), n = a.cols;
  for (int it = 0; it < cap; ++it) {
    int worst = -1;
    double worst_v = feas_tol;
    for (int i = 0; i < m; ++i) {
      double v = row_dot(a, i, x) - b[i];
      if (v > worst_v) {
        worst_v = v;
        worst = i;
      }
    }
    if (worst < 0) return true;
    double nn = 0.0;
    for (int j = 0; j < n; ++j) nn += a(worst, j) * a(worst, j);
    if (nn <= 0.0) return false;  // zero row with a violated bound
    double step = worst_v / nn;
    for (int j = 0; j < n; ++j) x[j] -= step * a(worst, j);
  }
  return false;
}

// Feasible point via the auxiliary problem min t + eps/2 |(x,t)|^2 subject to
// a_i x - t <= b_i and t >= -1 (the cap keeps x bounded once a margin-1
// interior point exists), started strictly feasible at x = 0, t = max(1-b)+.
la::Vec phase1(const la::Mat& a, const la::Vec& b, double feas_tol) {
  const int n = a.cols, m = int(b.size());
  la::Vec x0(n, 0.0);
  if (pocs(a, b, x0, feas_tol, 10000 + 100 * (n + m))) return x0;
  const double eps = 1e-9;
  la::Mat haux = la::Mat::identity(n + 1);
  for (double& v : haux.a) v *= eps;
  la::Vec caux(n + 1, 0.0);
  caux[n] = 1.0;
  la::Mat aaux(m + 1, n + 1);
  la::Vec baux(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) aaux(i, j) = a(i, j);
    aaux(i, n) = -1.0;
    baux[i] = b[i];
  }
  aaux(m, n) = -1.0;  // -t <= 1
  baux[m] = 1.0;
  la::Vec start(n + 1, 0.0);
  double t0 = 1.0;
  for (double v : b) t0 = std::max(t0, 1.0 - v);
  start[n] = t0;

  Factor hf;
  hf.l = haux;
  la::cholesky(hf.l);
  Flags scratch = 0;
  WorkState st = active_set(haux, caux, aaux, baux, std::move(start), hf,
                            scratch, 200 * (n + m + 2), nullptr);
  la::Vec x(st.x.begin(), st.x.begin() + n);
  if (!pocs(a, b, x, feas_tol, 10000 + 100 * (n + m)))
    raise(errc::infeasible, "qp: no feasible point found");
  return x;
}

}  // namespace

Kkt kkt_residuals(const Problem& p, const la::Vec& x, const la::Vec& lambda) {
  int n = p.n(), m = p.m();
  if (int(x.size()) != n || int(lambda.size()) != m)
    raise(errc::length_mismatch, "qp: point shape does not match problem");
  Kkt k;
  la::Vec grad = la::matvec(p.h, x);
  for (int j = 0; j < n; ++j) grad[j] += p.c[j];
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) grad[j] += p.a(i, j) * lambda[i];
  k.stationarity = la::norm_inf(grad);
  for (int i = 0; i < m; ++i) {
    double slack = row_dot(p.a, i, x) - p.b[i];
    k.feasibility = std::max(k.feasibility, slack);
    k.dual_feasibility = std::max(k.dual_feasibility, -lambda[i]);
    k.complementarity = std::max(k.complementarity, std::fabs(lambda[i] * slack));
  }
  k.feasibility = std::max(0.0, k.feasibility);
  k.dual_feasibility = std::max(0.0, k.dual_feasibility);
  return k;
}

Solution solve(const Problem& p) {
  validate(p);
  const int n = p.n(), m = p.m();

  // scale the objective so tolerances mean the same thing at any magnitude;
  // the minimizer is unchanged, multipliers scale with it
  const double s = 1.0 / std::max(1.0, la::norm_inf(p.h));
  la::Mat hs = p.h;
  for (double& v : hs.a) v *= s;
  la::Vec cs = p.c;
  for (double& v : cs) v *= s;

  Solution sol;
  sol.flags = p.flags;
  Factor hf = factor_spd(hs, "qp: hessian is not positive definite");
  if (hf.ridged) sol.flags |= flag_ridge_applied;

  la::Vec x(n, 0.0);
  const double feas_tol =
      1e-10 * (1.0 + (m ? la::norm_inf(p.b) : 0.0) + la::norm_inf(p.a));
  if (m > 0) {
    bool ok = true;
    for (int i = 0; i < m; ++i)
      if (p.b[i] < -feas_tol) ok = false;
    if (!ok) x = phase1(p.a, p.b, feas_tol);
  }

  WorkState st = active_set(hs, cs, p.a, p.b, std::move(x), hf, sol.flags,
                            100 * (n + m), &sol.iterations);
  if (st.hit_cap)
    raise(errc::iteration_limit, "qp: active-set iteration cap reached");

  sol.x = st.x;
  sol.lambda.assign(m, 0.0);
  la::Vec lam_scaled(m, 0.0);
  for (int k = 0; k < int(st.w.size()); ++k) {
    lam_scaled[st.w[k]] = st.lam_w[k];
    sol.lambda[st.w[k]] = st.lam_w[k] / s;  // undo objective scaling
  }
  sol.active.assign(st.w.begin(), st.w.end());
  std::sort(sol.active.begin(), sol.active.end());
  Problem scaled{hs, cs, p.a, p.b, 0};
  sol.kkt = kkt_residuals(scaled, st.x, lam_scaled);
  return sol;
}

Problem assemble_axis_problem(const model::Dataset& data, int axis,
                              const calib::ConstraintSet* constraints,
                              bool offset_column) {
  if (axis < 0 || axis >= wrench_axes)
    raise(errc::invalid_argument, "assemble: axis out of range");
  const std::size_t nf = data.size();
  if (nf == 0) raise(errc::invalid_argument, "assemble: empty dataset");
  if (data.wrench.size() != nf)
    raise(errc::length_mismatch, "assemble: wrench/frame count mismatch");
  if (constraints && constraints->axis != axis)
    raise(errc::invalid_argument, "assemble: constraint set is for another axis");
  if (constraints && constraints->a.rows > 0 && constraints->a.cols != 6)
    raise(errc::length_mismatch, "assemble: constraint rows must have 6 columns");
  if (constraints && constraints->a.rows != int(constraints->b.size()))
    raise(errc::length_mismatch, "assemble: constraint bounds mismatch");

  const int k = offset_column ? 7 : 6;
  std::vector<double> xs(nf * k);
  std::vector<double> ys(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    for (int j = 0; j < 6; ++j) xs[i * k + j] = data.frames[i].s[j];
    if (offset_column) xs[i * k + 6] = 1.0;
    ys[i] = data.wrench[i][axis];
  }

  la::Mat gram(k, k);
  la::Vec rhs(k, 0.0);
  kernels::gram(xs.data(), nf, k, gram.a.data());
  kernels::gram_rhs(xs.data(), ys.data(), nf, k, rhs.data());

  Problem p;
  p.h = gram;
  for (double& v : p.h.a) v *= 2.0;
  p.c.assign(k, 0.0);
  for (int j = 0; j < k; ++j) p.c[j] = -2.0 * rhs[j];
  if (la::rank_elimination(gram) < k) p.flags |= flag_rank_deficient_data;

  if (constraints) {
    int m = constraints->rows();
    p.a = la::Mat(m, k);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < 6; ++j) p.a(i, j) = constraints->a(i, j);
    p.b = constraints->b;
  } else {
    p.a = la::Mat(0, k);
  }
  return p;
}

}  // namespace ft::qp

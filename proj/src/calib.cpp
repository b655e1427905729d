#include "ft/calib.hpp"

#include <cmath>
#include <utility>

#include "ft/kernels.hpp"
#include "ft/refdata.hpp"

namespace ft::calib {

namespace {

double ratio(double num, double den, const char* what) {
  if (std::fabs(den) < 1e-300) raise(errc::invalid_argument, what);
  return num / den;
}

struct RowBuilder {
  std::vector<double> rows;
  std::vector<double> bounds;
  double slack;

  void one_sided(const std::array<double, 6>& r) {
    rows.insert(rows.end(), r.begin(), r.end());
    bounds.push_back(slack);
  }
  void pair(const std::array<double, 6>& r) {
    one_sided(r);
    std::array<double, 6> neg{};
    for (int j = 0; j < 6; ++j) neg[j] = -r[j];
    one_sided(neg);
  }
  ConstraintSet take(int axis) {
    ConstraintSet s;
    s.axis = axis;
    s.a = la::Mat(int(bounds.size()), 6);
    s.a.a = std::move(rows);
    s.b = std::move(bounds);
    return s;
  }
};

}  // namespace

DerivedConstants derived_constants(const model::ComplianceMap& map) {
  la::Mat m = la::inverse(la::transpose(map.ratios));
  DerivedConstants k;
  k.fy_s4_over_s2 = ratio(m(1, 3), m(1, 1), "degenerate Fy coupling");
  k.fy_s6_over_s2 = ratio(m(1, 5), m(1, 1), "degenerate Fy coupling");
  k.my_s1_over_s3 =
      ratio(m(4, 0) + m(4, 4), 2.0 * m(4, 2), "degenerate My coupling");
  return k;
}

std::array<ConstraintSet, 6> default_constraints(const model::ComplianceMap& map,
                                                 double slack) {
  if (!(slack >= 0.0)) raise(errc::invalid_argument, "constraint slack must be >= 0");
  la::Mat m = la::inverse(la::transpose(map.ratios));
  DerivedConstants k = derived_constants(map);
  std::array<ConstraintSet, 6> out;

  {  // Fx: dominant pair s4/s6 with s2 suppressed, plus s3~s5 and s1~s5 couplings
    RowBuilder fx{{}, {}, slack};
    double sup = std::fabs(ratio(m(0, 3), m(0, 1), "degenerate Fx coupling"));
    double c46 = ratio(m(0, 3), m(0, 5), "degenerate Fx coupling");
    fx.one_sided({0.0, -sup, 0.0, 1.0, 0.0, -c46});
    fx.pair({0.0, 0.0, 1.0, 0.0, -ratio(m(0, 2), m(0, 4), "degenerate Fx coupling"), 0.0});
    fx.pair({1.0, 0.0, 0.0, 0.0, -ratio(m(0, 0), m(0, 4), "degenerate Fx coupling"), 0.0});
    out[0] = fx.take(0);
  }
  {  // Fy: s2+s4+s6 balance plus both coupling ratios against s2
    RowBuilder fy{{}, {}, slack};
    fy.pair({0.0, 1.0, 0.0, 1.0, 0.0, 1.0});
    fy.pair({0.0, -k.fy_s4_over_s2, 0.0, 1.0, 0.0, 0.0});
    fy.pair({0.0, -k.fy_s6_over_s2, 0.0, 0.0, 0.0, 1.0});
    out[1] = fy.take(1);
  }
  {  // Fz: s1 = s3 = s5 as two chained pairs
    RowBuilder fz{{}, {}, slack};
    fz.pair({1.0, 0.0, -1.0, 0.0, 0.0, 0.0});
    fz.pair({0.0, 0.0, 1.0, 0.0, -1.0, 0.0});
    out[2] = fz.take(2);
  }
  {  // Mx: s3 + s5 = 0
    RowBuilder mx{{}, {}, slack};
    mx.pair({0.0, 0.0, 1.0, 0.0, 1.0, 0.0});
    out[3] = mx.take(3);
  }
  {  // My: s1+s3+s5 = 0 with s1 = s5 = (s1/s3 ratio) * s3
    RowBuilder my{{}, {}, slack};
    my.pair({1.0, 0.0, 1.0, 0.0, 1.0, 0.0});
    my.pair({1.0, 0.0, 0.0, 0.0, -1.0, 0.0});
    my.pair({1.0, 0.0, -k.my_s1_over_s3, 0.0, 0.0, 0.0});
    out[4] = my.take(4);
  }
  {  // Mz: s2 = s4 = s6 as two chained pairs
    RowBuilder mz{{}, {}, slack};
    mz.pair({0.0, 1.0, 0.0, -1.0, 0.0, 0.0});
    mz.pair({0.0, 0.0, 0.0, 1.0, 0.0, -1.0});
    out[5] = mz.take(5);
  }
  return out;
}

namespace {

// Shared normal-equation view of one axis: gram = X^T X, rhs = X^T d taken
// from the assembled QP so every linear method sees identical floats.
void normal_equations(const qp::Problem& p, la::Mat& gram, la::Vec& rhs) {
  gram = p.h;
  for (double& v : gram.a) v *= 0.5;
  rhs.assign(p.c.size(), 0.0);
  for (std::size_t j = 0; j < p.c.size(); ++j) rhs[j] = -0.5 * p.c[j];
}

}  // namespace

Calibration calibrate_pseudo_inverse(const model::Dataset& data) {
  if (data.size() < 6)
    raise(errc::invalid_argument, "calibration needs at least 6 frames");
  Calibration out;
  out.method = "pinv";
  out.repr = data.representation();
  la::Mat gram;
  la::Vec rhs;
  for (int axis = 0; axis < wrench_axes; ++axis) {
    qp::Problem p = qp::assemble_axis_problem(data, axis, nullptr, true);
    out.flags |= p.flags;
    normal_equations(p, gram, rhs);
    bool deficient = false;
    la::Vec x = la::solve_minnorm(gram, rhs, 1e-10, &deficient);
    if (deficient) out.flags |= flag_null_space;
    for (int j = 0; j < 6; ++j) out.c(axis, j) = x[j];
    out.offset[axis] = x[6];
  }
  return out;
}

Calibration calibrate_qp(const model::Dataset& data,
                         const std::array<ConstraintSet, 6>& constraints) {
  Calibration out;
  out.method = "qp";
  out.repr = data.representation();
  for (const ConstraintSet& s : constraints)
    for (double b : s.b) out.slack = std::max(out.slack, b);
  for (int axis = 0; axis < wrench_axes; ++axis) {
    qp::Problem p = qp::assemble_axis_problem(data, axis, &constraints[axis], true);
    qp::Solution sol;
    try {
      sol = qp::solve(p);
    } catch (const Error& e) {
      raise(e.code(), std::string(axis_names[axis]) + " row: " + e.what());
    }
    out.flags |= p.flags | sol.flags;
    out.kkt[axis] = sol.kkt;
    for (int j = 0; j < 6; ++j) out.c(axis, j) = sol.x[j];
    out.offset[axis] = sol.x[6];
  }
  return out;
}

PolyCalibrator calibrate_regularized(const model::Dataset& data, double lambda,
                                     int degree) {
  if (!(lambda >= 0.0)) raise(errc::invalid_argument, "ridge weight must be >= 0");
  if (degree != 1 && degree != 2) raise(errc::invalid_argument, "degree must be 1 or 2");
  const std::size_t n = data.size();
  if (n < 6) raise(errc::invalid_argument, "calibration needs at least 6 frames");

  const int k = 6 * degree;      // sensor regressors
  const int kk = k + 1;          // plus offset column
  std::vector<double> xs(n * kk);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = data.frames[i].s;
    for (int j = 0; j < 6; ++j) xs[i * kk + j] = s[j];
    if (degree == 2)
      for (int j = 0; j < 6; ++j) xs[i * kk + 6 + j] = s[j] * s[j];
    xs[i * kk + k] = 1.0;
  }
  la::Mat gram(kk, kk);
  kernels::gram(xs.data(), n, kk, gram.a.data());

  PolyCalibrator out;
  out.degree = degree;
  out.lambda = lambda;
  out.repr = data.representation();
  out.coef = la::Mat(6, k);
  if (la::rank_elimination(gram) < kk) out.flags |= flag_rank_deficient_data;

  la::Mat h = gram;
  for (int j = 0; j < kk; ++j) h(j, j) += lambda;
  la::Mat l = h;
  bool have_chol = la::cholesky(l);

  std::vector<double> ys(n);
  for (int axis = 0; axis < wrench_axes; ++axis) {
    for (std::size_t i = 0; i < n; ++i) ys[i] = data.wrench[i][axis];
    la::Vec rhs(kk, 0.0);
    kernels::gram_rhs(xs.data(), ys.data(), n, kk, rhs.data());
    la::Vec x;
    if (have_chol) {
      x = la::chol_solve(l, std::move(rhs));
    } else {
      bool deficient = false;
      x = la::solve_minnorm(h, rhs, 1e-10, &deficient);
      if (deficient) out.flags |= flag_null_space;
    }
    for (int j = 0; j < k; ++j) out.coef(axis, j) = x[j];
    out.offset[axis] = x[k];
  }
  return out;
}

namespace {

void require_repr(model::Representation have, model::Representation want) {
  if (have != want)
    raise(errc::representation_mismatch,
          std::string("frame is in ") + model::representation_name(have) +
              ", calibrator expects " + model::representation_name(want));
}

}  // namespace

Wrench apply(const Calibration& c, const model::SensorFrame& f) {
  require_repr(f.repr, c.repr);
  Wrench w;
  for (int i = 0; i < wrench_axes; ++i) {
    double acc = c.offset[i];
    for (int j = 0; j < 6; ++j) acc += c.c(i, j) * f.s[j];
    w[i] = acc;
  }
  return w;
}

Wrench apply(const PolyCalibrator& c, const model::SensorFrame& f) {
  require_repr(f.repr, c.repr);
  Wrench w;
  for (int i = 0; i < wrench_axes; ++i) {
    double acc = c.offset[i];
    for (int j = 0; j < 6; ++j) acc += c.coef(i, j) * f.s[j];
    if (c.degree == 2)
      for (int j = 0; j < 6; ++j) acc += c.coef(i, 6 + j) * f.s[j] * f.s[j];
    w[i] = acc;
  }
  return w;
}

char classify_entry(double value, double row_max, double theta) {
  if (std::fabs(value) < theta * row_max) return '~';
  if (value > 0.0) return '+';
  if (value < 0.0) return '-';
  return '~';
}

std::vector<SignViolation> check_sign_structure(const la::Mat& c,
                                                const SignPattern& pattern) {
  if (c.rows != 6 || c.cols != 6)
    raise(errc::length_mismatch, "sign check expects a 6x6 matrix");
  if (!(pattern.theta > 0.0 && pattern.theta < 1.0))
    raise(errc::invalid_argument, "sign threshold must be in (0, 1)");
  std::vector<SignViolation> out;
  for (int i = 0; i < 6; ++i) {
    double row_max = 0.0;
    for (int j = 0; j < 6; ++j) row_max = std::max(row_max, std::fabs(c(i, j)));
    for (int j = 0; j < 6; ++j) {
      char want = pattern.grid[i][j];
      if (want == '~') continue;
      char got = classify_entry(c(i, j), row_max, pattern.theta);
      if (got != want) out.push_back({i, j, want, got, c(i, j)});
    }
  }
  return out;
}

SignPattern reference_sign_pattern(double theta) {
  SignPattern p;
  p.grid = refdata::response_sign_pattern();
  p.theta = theta;
  return p;
}

}  // namespace ft::calib

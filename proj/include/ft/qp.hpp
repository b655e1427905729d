#pragma once
#include <vector>

#include "ft/constraints.hpp"
#include "ft/error.hpp"
#include "ft/la.hpp"
#include "ft/model.hpp"

namespace ft::qp {

// minimize 0.5 x^T h x + c^T x   subject to   a x <= b
struct Problem {
  la::Mat h;  // n x n symmetric positive definite
  la::Vec c;  // n
  la::Mat a;  // m x n, m may be zero
  la::Vec b;  // m
  Flags flags = 0;

  int n() const { return int(c.size()); }
  int m() const { return int(b.size()); }
};

struct Kkt {
  double stationarity = 0.0;    // ||h x + c + a^T lambda||_inf
  double feasibility = 0.0;     // max(0, max_i (a x - b)_i)
  double dual_feasibility = 0.0;  // max(0, -min_i lambda_i)
  double complementarity = 0.0;   // max_i |lambda_i (a x - b)_i|
  double worst() const;
};

struct Solution {
  la::Vec x;
  la::Vec lambda;           // one multiplier per constraint row
  std::vector<int> active;  // working set at exit, ascending
  Kkt kkt;                  // certificate on the internally scaled problem
  int iterations = 0;
  Flags flags = 0;
};

// Dense primal active-set solver for small problems (n <= ~16).
Solution solve(const Problem& p);

// Raw residuals of the unscaled problem at (x, lambda).
Kkt kkt_residuals(const Problem& p, const la::Vec& x, const la::Vec& lambda);

// Least-squares fit of one calibration row as a QP: h = 2 X^T X, c = -2 X^T d
// where X holds one sensor frame per row (plus a trailing ones column when
// offset_column is set) and d the reference values of `axis`. Sets
// flag_rank_deficient_data when the normal matrix loses rank.
Problem assemble_axis_problem(const model::Dataset& data, int axis,
                              const calib::ConstraintSet* constraints = nullptr,
                              bool offset_column = false);

}  // namespace ft::qp

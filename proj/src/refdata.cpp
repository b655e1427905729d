#include "ft/refdata.hpp"

namespace ft::refdata {
namespace {

la::Mat mat6(const double (&v)[6][6]) {
  la::Mat m(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = v[i][j];
  return m;
}

}  // namespace

la::Mat fem_displacement_ratios() {
  static const double v[6][6] = {
      {0.03, -0.09, -4.29, 119.30, 4.32, -116.79},
      {5.01, -117.80, -2.41, 59.10, -2.44, 82.62},
      {124.60, -0.79, 124.60, -0.34, 124.60, -4.92},
      {15.76, -41.04, -81.90, 18.96, 67.66, 17.37},
      {88.10, -0.70, -27.98, -32.13, -54.08, 33.15},
      {-4.23, 70.82, -4.23, 70.83, -4.26, 71.00},
  };
  return mat6(v);
}

std::array<double, 6> axis_ranges() {
  return {1050.0, 1200.0, 1850.0, 25.0, 25.0, 36.0};
}

std::array<std::array<char, 6>, 6> response_sign_pattern() {
  // double signs in the source table collapse to single signs here
  return {{
      {'~', '~', '~', '+', '~', '-'},  // Fx
      {'~', '+', '~', '-', '~', '+'},  // Fy
      {'-', '~', '-', '~', '-', '~'},  // Fz
      {'~', '~', '+', '~', '-', '~'},  // Mx
      {'+', '~', '-', '-', '~', '~'},  // My
      {'~', '+', '~', '+', '~', '+'},  // Mz
  }};
}

la::Mat least_squares_calibration() {
  static const double v[6][6] = {
      {-483, 2618, 164, -1, 581, -2389},
      {1292, -1668, 3245, -2392, -799, 2144},
      {1867, -6848, -4082, 2232, -8988, 7034},
      {-281, 121, -86, 163, 151, -262},
      {135, 300, -280, 262, 230, -112},
      {585, -451, -395, 260, 107, -328},
  };
  return mat6(v);
}

la::Mat constrained_calibration() {
  static const double v[6][6] = {
      {885, -187, 884, 242, -1774, 0},
      {2398, 148, -2362, 148, 41, -231},
      {-2418, -2329, -3718, -161, -2156, -367},
      {-308, -78, 355, -85, 220, -232},
      {173, 77, 83, 103, -274, -2},
      {444, -810, 438, -310, 442, -530},
  };
  return mat6(v);
}

FxConstraintFixture fx_constraint_fixture() {
  FxConstraintFixture f;
  f.a = la::Mat(5, 6);
  static const double v[5][6] = {
      {231, 0, 232, 0, -28851, 0},
      {0, 8.56, 0, 8.38, 0, 0},
      {0, -8.56, 0, -8.38, 0, 0},
      {0, 0, 0, -8.38, 0, -10689},
      {0, 0, 0, 8.38, 0, 10689},
  };
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j) f.a(i, j) = v[i][j];
  f.b = {100, 100, 100, 100, 100};
  f.column_sensors = {4, 3, 6, 5, 2, 1};
  return f;
}

}  // namespace ft::refdata

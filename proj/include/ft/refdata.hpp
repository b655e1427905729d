#pragma once
#include <array>

#include "ft/la.hpp"

// Reference data for the prototype sensor: FEM displacement ratios, mechanical
// ranges, the qualitative response-sign table, and two published calibration
// matrices (least-squares and constrained) kept as fixed test fixtures.

namespace ft::refdata {

// 6x6, rows Fx..Mz, columns sensors 1..6 (FEM, dimensionless ratios)
la::Mat fem_displacement_ratios();

// full-scale magnitudes: Fx, Fy, Fz [N], Mx, My, Mz [N*m]
std::array<double, 6> axis_ranges();

// qualitative per-axis response signs, entries '+', '-', '~'
std::array<std::array<char, 6>, 6> response_sign_pattern();

// calibration matrix obtained by plain least squares on the prototype
la::Mat least_squares_calibration();

// calibration matrix obtained with the structural-constraint method
la::Mat constrained_calibration();

// the published x-axis constraint block, kept verbatim; columns map to
// sensors in the order given by column_sensors (not 1..6)
struct FxConstraintFixture {
  la::Mat a;                          // 5x6
  std::array<double, 5> b;
  std::array<int, 6> column_sensors;  // 1-based sensor index per column
};
FxConstraintFixture fx_constraint_fixture();

}  // namespace ft::refdata

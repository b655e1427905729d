#pragma once
#include <array>

#include "ft/la.hpp"
#include "ft/model.hpp"

namespace ft::calib {

// Inequality rows a * s <= b over the six sensor coefficients of one
// calibration-matrix row. Near-equality couplings appear as +/- row pairs
// sharing one slack bound.
struct ConstraintSet {
  int axis = 0;
  la::Mat a;  // rows x 6
  la::Vec b;
  int rows() const { return a.rows; }
};

// Coupling ratios read off the inverse of the transposed compliance ratios;
// for the stock geometry they land near +/-cos(pi/3).
struct DerivedConstants {
  double fy_s4_over_s2 = 0.0;
  double fy_s6_over_s2 = 0.0;
  double my_s1_over_s3 = 0.0;
};

DerivedConstants derived_constants(const model::ComplianceMap& map);

// Structural couplings for every wrench axis, bounds all set to `slack`:
// Fx gets the dominant/suppression template, Fy the balance plus two coupling
// rows, Fz/Mz chained equalities, Mx one cancellation, My sum plus couplings.
std::array<ConstraintSet, 6> default_constraints(const model::ComplianceMap& map,
                                                 double slack = 100.0);

}  // namespace ft::calib

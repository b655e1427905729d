#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ft/constraints.hpp"
#include "ft/error.hpp"
#include "ft/la.hpp"
#include "ft/model.hpp"
#include "ft/qp.hpp"

namespace ft::calib {

// Linear calibration artifact: wrench = c * s + offset.
struct Calibration {
  la::Mat c{6, 6};
  std::array<double, 6> offset{};
  model::Representation repr = model::Representation::volts;
  std::string method = "pinv";
  double slack = 0.0;            // constraint bound used by the qp method
  std::array<qp::Kkt, 6> kkt{};  // per-axis solver certificates (qp method)
  Flags flags = 0;
};

// Least squares per axis; minimum-norm row and flag_null_space when the
// normal matrix is singular.
Calibration calibrate_pseudo_inverse(const model::Dataset& data);

// One inequality-constrained QP per axis; solver errors are re-raised tagged
// with the axis name.
Calibration calibrate_qp(const model::Dataset& data,
                         const std::array<ConstraintSet, 6>& constraints);

// Ridge regression over linear (degree 1) or linear+squared (degree 2)
// sensor channels; lambda also penalizes the offset.
struct PolyCalibrator {
  int degree = 1;
  la::Mat coef{6, 6};  // 6x6 or 6x12
  std::array<double, 6> offset{};
  double lambda = 0.0;
  model::Representation repr = model::Representation::volts;
  Flags flags = 0;
};

PolyCalibrator calibrate_regularized(const model::Dataset& data, double lambda,
                                     int degree);

// 6-12-6 network, tanh hidden layer, identity output, trained full-batch on
// standardized inputs and outputs.
struct MlpParams {
  la::Mat w1{12, 6};
  la::Vec b1 = la::Vec(12, 0.0);
  la::Mat w2{6, 12};
  la::Vec b2 = la::Vec(6, 0.0);
};

struct MlpCalibrator {
  MlpParams params;
  std::array<double, 6> in_mean{}, in_std{};
  std::array<double, 6> out_mean{}, out_std{};
  model::Representation repr = model::Representation::volts;
  std::vector<double> train_loss, val_loss;  // one entry per epoch
  Flags flags = 0;
};

// Mean-squared error over all samples and channels of (x, y), both n x 6 and
// already standardized.
double mlp_loss(const MlpParams& p, const la::Mat& x, const la::Mat& y);
MlpParams mlp_gradient(const MlpParams& p, const la::Mat& x, const la::Mat& y);

MlpCalibrator make_mlp(const model::Dataset& data, uint64_t seed);  // untrained
MlpCalibrator train_mlp(const model::Dataset& data, int epochs,
                        double learning_rate, uint64_t seed);

Wrench apply(const Calibration& c, const model::SensorFrame& f);
Wrench apply(const PolyCalibrator& c, const model::SensorFrame& f);
Wrench apply(const MlpCalibrator& c, const model::SensorFrame& f);

// Table-1-style dominance grid: '+', '-', or '~' per (axis, sensor).
struct SignPattern {
  std::array<std::array<char, 6>, 6> grid{};
  double theta = 0.3;  // fraction of row max below which an entry is '~'
};

struct SignViolation {
  int axis = 0;
  int sensor = 0;
  char expected = '~';
  char actual = '~';
  double value = 0.0;
};

char classify_entry(double value, double row_max, double theta);

// '~' pattern cells never violate; '+'/'-' cells violate unless the
// classified sign matches exactly.
std::vector<SignViolation> check_sign_structure(const la::Mat& c,
                                                const SignPattern& pattern);

SignPattern reference_sign_pattern(double theta = 0.3);

}  // namespace ft::calib

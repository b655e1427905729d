#pragma once
#include <cmath>
#include <limits>
#include <vector>

#include "ft/error.hpp"

namespace ft::pipeline {

// scalar constant-signal filter; r defaults to the measured sensor noise
// covariance, q to a small drift allowance
struct KalmanParams {
  double q = 1e-8;     // process variance, V^2
  double r = 1.54e-5;  // measurement variance, V^2
  // NaN seeds the state from the first sample
  double initial_state = std::numeric_limits<double>::quiet_NaN();
  double initial_variance = 1.0;
};

inline std::vector<double> kalman_filter(const std::vector<double>& z,
                                         const KalmanParams& p) {
  if (!(p.r > 0.0)) raise(errc::invalid_argument, "kalman: r must be > 0");
  if (!(p.q >= 0.0)) raise(errc::invalid_argument, "kalman: q must be >= 0");
  std::vector<double> out(z.size());
  if (z.empty()) return out;

  if (!(p.initial_variance >= 0.0))
    raise(errc::invalid_argument, "kalman: initial variance must be >= 0");
  double x, var = p.initial_variance;
  std::size_t k = 0;
  if (std::isnan(p.initial_state)) {
    x = z[0];
    out[0] = x;
    k = 1;
  } else {
    x = p.initial_state;
  }
  for (; k < z.size(); ++k) {
    var += p.q;
    double gain = var / (var + p.r);
    x += gain * (z[k] - x);
    var *= 1.0 - gain;
    out[k] = x;
  }
  return out;
}

}  // namespace ft::pipeline

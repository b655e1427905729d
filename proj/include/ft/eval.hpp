#pragma once
#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ft/calib.hpp"
#include "ft/la.hpp"
#include "ft/model.hpp"

namespace ft::eval {

// full-scale magnitudes per axis, N / N*m
using AxisRanges = std::array<double, 6>;
AxisRanges default_ranges();

struct AxisStats {
  double mean = 0.0, std = 0.0, max = 0.0;  // population std
};

// per sample and axis: |pred - ref| / range * 100
std::array<AxisStats, 6> full_scale_error(const std::vector<Wrench>& pred,
                                          const std::vector<Wrench>& ref,
                                          const AxisRanges& ranges);

std::array<double, 6> rmse(const std::vector<Wrench>& pred,
                           const std::vector<Wrench>& ref);

// max deviation from the least-squares line of pred-vs-ref, % of range;
// needs >= 10 points and a monotone ref sweep
double nonlinearity_axis(const std::vector<double>& pred,
                         const std::vector<double>& ref, double range);
std::array<double, 6> nonlinearity(const std::vector<Wrench>& pred,
                                   const std::vector<Wrench>& ref,
                                   const AxisRanges& ranges);

using Predictor = std::function<Wrench(const model::SensorFrame&)>;

// off-axis response under noise-free full-scale single-axis loading, % of the
// responding axis's range; rows = loaded axis, diagonal NaN; each axis is
// loaded at both +range and -range and the larger response is kept
la::Mat crosstalk(const Predictor& predict, model::Representation repr,
                  const model::SensorModel& m, const AxisRanges& ranges);
la::Mat crosstalk(const calib::Calibration& cal, const model::SensorModel& m,
                  const AxisRanges& ranges);

// sensor noise / one ADC step propagated through the calibration rows
struct Resolution {
  std::array<double, 6> noise{};         // ||row .* noise_std||_2
  std::array<double, 6> quantization{};  // lsb * ||row||_2
};
Resolution resolution(const std::array<double, 6>& noise_std_volts,
                      const calib::Calibration& cal,
                      double lsb_volts = model::adc_lsb);

struct MetricsReport {
  std::string method;
  model::DatasetMeta meta;  // of the test set
  std::array<AxisStats, 6> fse{};
  std::array<double, 6> rms{};
  std::array<double, 6> nonlin{};     // from generated single-axis sweeps
  la::Mat xtalk{6, 6};                // rows = loaded axis, diag NaN
  bool xtalk_rows_loaded = true;      // which orientation leads in reports
  std::optional<Resolution> res;      // linear calibrators only
};

// FSE/RMSE on `test` plus sweep-based nonlinearity and crosstalk from `m`
MetricsReport evaluate_predictor(const std::string& name, const Predictor& predict,
                                 model::Representation repr,
                                 const model::Dataset& test,
                                 const model::SensorModel& m,
                                 const AxisRanges& ranges);
MetricsReport evaluate(const calib::Calibration& cal, const model::Dataset& test,
                       const model::SensorModel& m, const AxisRanges& ranges);

struct MethodSpec {
  std::string name;  // pinv | qp | ridge | mlp
  double slack = 100.0;
  double lambda = 1e-6;
  int degree = 1;
  int epochs = 1500;
  double learning_rate = 0.2;
  uint64_t seed = 1;
};

struct FittedMethod {
  MethodSpec spec;
  MetricsReport metrics;
  std::optional<calib::Calibration> linear;
  std::optional<calib::PolyCalibrator> poly;
  std::optional<calib::MlpCalibrator> mlp;
};

struct ComparisonReport {
  std::vector<FittedMethod> methods;
  // pinv FSE mean / qp FSE mean per axis; NaN unless both methods ran
  std::array<double, 6> improvement_ratio{};
};

ComparisonReport compare_methods(const model::Dataset& train,
                                 const model::Dataset& test,
                                 const std::vector<MethodSpec>& methods,
                                 const model::SensorModel& m,
                                 const AxisRanges& ranges);

void write_metrics_csv(std::ostream& os, const MetricsReport& r);
void write_metrics_text(std::ostream& os, const MetricsReport& r);
void write_comparison_csv(std::ostream& os, const ComparisonReport& r);
void write_comparison_text(std::ostream& os, const ComparisonReport& r);

}  // namespace ft::eval

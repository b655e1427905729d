#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ft/eval.hpp"
#include "ft/model.hpp"

namespace ft::pipeline {

// Experiment configuration: sections [model], [trajectory], [calibration],
// [evaluation] in a flat key-value file; unknown keys are rejected with the
// offending line.
struct ExperimentConfig {
  ExperimentConfig();

  // [model]
  std::string compliance = "default";  // "default" or a model-file path
  struct CurveOverrides {
    std::optional<double> operating_point, gain, bias, range_lo, range_hi,
        noise_std, cubic;
  } curve;          // applied to all six channels on top of the base model
  bool adc = false;  // emit quantized counts

  // [trajectory]
  model::TrajectorySpec trajectory;
  uint64_t seed = 42;

  // [calibration]
  std::vector<std::string> methods{"qp", "pinv"};
  double slack = 100.0;
  double lambda = 1e-6;
  int degree = 1;
  int epochs = 1500;
  double learning_rate = 0.2;

  // [evaluation]
  eval::AxisRanges ranges{};
  bool xtalk_rows_loaded = true;
  double theta = 0.3;

  model::SensorModel make_model() const;
  std::vector<eval::MethodSpec> method_specs() const;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);

// Stand-alone sensor description: sections [compliance], [curve1]..[curve6],
// [noise], [adc].
model::SensorModel load_model_config(const std::string& path);

}  // namespace ft::pipeline

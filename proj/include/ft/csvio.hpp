#pragma once
#include <string>

#include "ft/calib.hpp"
#include "ft/la.hpp"
#include "ft/model.hpp"

namespace ft::pipeline {

// Dataset CSV: exact header t,s1..s6,fx..mz, one row per sample, %.17g, LF.
// The file carries no representation marker, so the loader is told what to
// expect.
void save_dataset(const model::Dataset& data, const std::string& path);
model::Dataset load_dataset(
    const std::string& path,
    model::Representation expected = model::Representation::volts);

// Calibration CSV: "# key=value" header lines, six matrix rows, offset row.
void save_calibration(const calib::Calibration& c, const std::string& path);
calib::Calibration load_calibration(const std::string& path);

// Bare matrix reader for sign checks: optional # headers, >= 6 data rows of 6
// values; rows beyond the sixth are ignored.
la::Mat load_matrix(const std::string& path);

// ridge / network artifacts (write-only diagnostics)
void save_poly(const calib::PolyCalibrator& c, const std::string& path);
void save_mlp(const calib::MlpCalibrator& c, const std::string& path);

// whole-file helpers shared by the CLI
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ft::pipeline

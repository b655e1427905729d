#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ft/error.hpp"
#include "ft/la.hpp"
#include "ft/rng.hpp"

// Forward simulation of the optical sensor:
// wrench -> screen displacements -> photocoupler voltages -> ADC counts.

namespace ft {

struct Wrench {
  double fx = 0, fy = 0, fz = 0, mx = 0, my = 0, mz = 0;

  double& operator[](int i) { return (&fx)[i]; }
  double operator[](int i) const { return (&fx)[i]; }
};

inline constexpr int wrench_axes = 6;
inline constexpr const char* axis_names[6] = {"Fx", "Fy", "Fz", "Mx", "My", "Mz"};

namespace model {

// d_j = sum_i scale[i] * ratios(i, j) * w[i]   [mm]
struct ComplianceMap {
  la::Mat ratios;               // 6x6, rows = wrench axes, cols = sensors
  std::array<double, 6> scale;  // mm per ratio-unit per N (or N*m), per axis
};

ComplianceMap compliance_from_table(const la::Mat& ratios,
                                    const std::array<double, 6>& scale);

// per-axis scale so a full-range load travels at most max_travel_mm
std::array<double, 6> displacement_scales(const la::Mat& ratios,
                                          const std::array<double, 6>& ranges,
                                          double max_travel_mm = 0.2);

struct PhotocouplerCurve {
  double operating_point = 0.0;  // mm, center of the linear region
  double gain = -5.0;            // V/mm
  double bias = 1.65;            // V at the operating point
  double range_lo = -0.2;        // mm
  double range_hi = 0.2;         // mm
  double noise_std = 3.92e-2;    // V
  double cubic = 0.0;            // V/mm^3, optional smooth nonlinearity
};

// rejects non-finite fields, range_lo >= range_hi, operating point outside the
// range, or negative noise_std
void validate_curve(const PhotocouplerCurve& curve);

enum class Representation { volts, counts };
const char* representation_name(Representation r);

struct SensorFrame {
  double t = 0.0;
  std::array<double, 6> s{};  // volts, or ADC counts stored as doubles
  Representation repr = Representation::volts;
  Flags flags = 0;
};

struct DatasetMeta {
  uint64_t seed = 0;
  std::string trajectory = "";
  double noise_std = 0.0;
  bool quantized = false;
};

struct Dataset {
  std::vector<SensorFrame> frames;
  std::vector<Wrench> wrench;
  double rate_hz = 0.0;
  DatasetMeta meta;
  Flags flags = 0;

  std::size_t size() const { return frames.size(); }
  Representation representation() const {
    return frames.empty() ? Representation::volts : frames.front().repr;
  }
};

struct SensorModel {
  ComplianceMap map;
  std::array<PhotocouplerCurve, 6> curves;
  bool quantize_output = false;
};

std::array<double, 6> wrench_to_displacements(const ComplianceMap& map, const Wrench& w);

// clamped linear (+ optional cubic) response; saturated set when d leaves the range
double displacement_to_voltage(double d, const PhotocouplerCurve& curve,
                               bool* saturated = nullptr);

// 16-bit ADC over [0, 3.3] V, round half away from zero
uint16_t quantize(double volts);
inline constexpr double adc_lsb = 3.3 / 65535.0;

// deterministic per (noise_stream, sample counter); counter feeds channels 6k..6k+5
SensorFrame simulate_frame(const SensorModel& m, const Wrench& w, double t,
                           uint64_t noise_stream, uint64_t counter);

enum class TrajectoryKind { ramp, sinusoid, mixed, degenerate };
TrajectoryKind trajectory_kind_from(const std::string& name);
const char* trajectory_kind_name(TrajectoryKind k);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::mixed;
  double duration = 1.0;  // s
  double rate = 1000.0;   // Hz
  Wrench amplitudes;
  double frequency = 1.0;  // Hz, for the sinusoid kind
  // degenerate kind: keep only these axes ...
  uint32_t axes_mask = 0x3f;
  // ... and/or project out one wrench direction
  std::optional<std::array<double, 6>> remove_direction;
};

std::vector<Wrench> generate_trajectory(const TrajectorySpec& spec, Rng& rng);

Dataset simulate_dataset(const SensorModel& m, const TrajectorySpec& spec, uint64_t seed);

// exact inverse of the noise-free voltage model: w = c * s + offset
struct GroundTruth {
  la::Mat c;  // 6x6
  std::array<double, 6> offset;
};
GroundTruth ground_truth_calibration(const SensorModel& m);

// default model built on the reference FEM ratios and mechanical ranges
SensorModel default_model();

}  // namespace model
}  // namespace ft

#include "ft/model.hpp"

#include <algorithm>
#include <cmath>

#include "ft/refdata.hpp"

namespace ft::model {

const char* representation_name(Representation r) {
  return r == Representation::volts ? "volts" : "counts";
}

void validate_curve(const PhotocouplerCurve& c) {
  for (double v : {c.operating_point, c.gain, c.bias, c.range_lo, c.range_hi,
                   c.noise_std, c.cubic})
    if (!std::isfinite(v)) raise(errc::non_finite, "curve parameter not finite");
  if (!(c.range_lo < c.range_hi))
    raise(errc::invalid_argument, "curve range_lo must be below range_hi");
  if (c.operating_point < c.range_lo || c.operating_point > c.range_hi)
    raise(errc::invalid_argument, "curve operating point outside travel range");
  if (c.noise_std < 0.0) raise(errc::invalid_argument, "curve noise_std must be >= 0");
}

ComplianceMap compliance_from_table(const la::Mat& ratios,
                                    const std::array<double, 6>& scale) {
  if (ratios.rows != 6 || ratios.cols != 6)
    raise(errc::invalid_argument, "compliance ratios must be 6x6");
  for (double v : ratios.a)
    if (!std::isfinite(v)) raise(errc::non_finite, "compliance ratio not finite");
  for (double s : scale)
    if (!std::isfinite(s) || s <= 0.0)
      raise(errc::invalid_argument, "compliance scale must be positive");
  if (la::rank_elimination(ratios) < 6)
    raise(errc::rank_deficient, "compliance ratios are rank deficient");
  return ComplianceMap{ratios, scale};
}

std::array<double, 6> displacement_scales(const la::Mat& ratios,
                                          const std::array<double, 6>& ranges,
                                          double max_travel_mm) {
  std::array<double, 6> scale{};
  for (int i = 0; i < 6; ++i) {
    double peak = 0.0;
    for (int j = 0; j < 6; ++j) peak = std::max(peak, std::fabs(ratios(i, j)));
    if (peak == 0.0) raise(errc::invalid_argument, "compliance row is all zero");
    scale[i] = max_travel_mm / (ranges[i] * peak);
  }
  return scale;
}

std::array<double, 6> wrench_to_displacements(const ComplianceMap& map, const Wrench& w) {
  for (int i = 0; i < 6; ++i)
    if (!std::isfinite(w[i])) raise(errc::non_finite, "wrench component not finite");
  std::array<double, 6> d{};
  for (int j = 0; j < 6; ++j) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += map.scale[i] * map.ratios(i, j) * w[i];
    d[j] = s;
  }
  return d;
}

double displacement_to_voltage(double d, const PhotocouplerCurve& curve, bool* saturated) {
  bool sat = d < curve.range_lo || d > curve.range_hi;
  if (saturated) *saturated = sat;
  double dc = std::clamp(d, curve.range_lo, curve.range_hi) - curve.operating_point;
  return curve.bias + curve.gain * dc + curve.cubic * dc * dc * dc;
}

uint16_t quantize(double volts) {
  double v = std::clamp(volts, 0.0, 3.3);
  return uint16_t(std::llround(v / 3.3 * 65535.0));
}

SensorFrame simulate_frame(const SensorModel& m, const Wrench& w, double t,
                           uint64_t noise_stream, uint64_t counter) {
  SensorFrame f;
  f.t = t;
  std::array<double, 6> d = wrench_to_displacements(m.map, w);
  for (int j = 0; j < 6; ++j) {
    bool sat = false;
    double v = displacement_to_voltage(d[j], m.curves[j], &sat);
    if (sat) f.flags |= flag_saturated;
    if (m.curves[j].noise_std > 0.0)
      v += m.curves[j].noise_std * gaussian_at(noise_stream, counter * 6 + j);
    v = std::clamp(v, 0.0, 3.3);
    f.s[j] = m.quantize_output ? double(quantize(v)) : v;
  }
  f.repr = m.quantize_output ? Representation::counts : Representation::volts;
  return f;
}

TrajectoryKind trajectory_kind_from(const std::string& name) {
  if (name == "ramp") return TrajectoryKind::ramp;
  if (name == "sinusoid") return TrajectoryKind::sinusoid;
  if (name == "mixed") return TrajectoryKind::mixed;
  if (name == "degenerate") return TrajectoryKind::degenerate;
  raise(errc::unknown_kind, "trajectory kind '" + name + "'");
}

const char* trajectory_kind_name(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::ramp: return "ramp";
    case TrajectoryKind::sinusoid: return "sinusoid";
    case TrajectoryKind::mixed: return "mixed";
    case TrajectoryKind::degenerate: return "degenerate";
  }
  return "?";
}

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

// all 2^6 presence/absence combinations of axes, one time slice each
std::vector<Wrench> mixed_trajectory(std::size_t n, double rate, const Wrench& amps,
                                     Rng& rng) {
  if (n < 64)
    raise(errc::invalid_argument, "mixed trajectory needs at least 64 samples");
  std::vector<Wrench> w(n);
  for (uint32_t seg = 0; seg < 64; ++seg) {
    std::size_t i0 = seg * n / 64;
    std::size_t i1 = (seg + 1) * n / 64;
    double freq[6], phase[6];
    for (int ax = 0; ax < 6; ++ax) {
      freq[ax] = rng.uniform(0.5, 3.0);
      phase[ax] = rng.uniform(0.0, two_pi);
    }
    for (std::size_t i = i0; i < i1; ++i) {
      double tl = double(i - i0) / rate;
      for (int ax = 0; ax < 6; ++ax)
        if (seg >> ax & 1u)
          w[i][ax] = amps[ax] * std::sin(two_pi * freq[ax] * tl + phase[ax]);
    }
  }
  return w;
}

}  // namespace

std::vector<Wrench> generate_trajectory(const TrajectorySpec& spec, Rng& rng) {
  if (spec.rate <= 0.0 || spec.duration <= 0.0)
    raise(errc::invalid_argument, "trajectory needs positive duration and rate");
  std::size_t n = std::size_t(std::llround(spec.duration * spec.rate));
  if (n == 0) raise(errc::invalid_argument, "empty trajectory");

  std::vector<Wrench> w;
  switch (spec.kind) {
    case TrajectoryKind::ramp: {
      w.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        for (int ax = 0; ax < 6; ++ax)
          w[i][ax] = spec.amplitudes[ax] * double(i + 1) / double(n);
      break;
    }
    case TrajectoryKind::sinusoid: {
      w.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        double t = double(i) / spec.rate;
        for (int ax = 0; ax < 6; ++ax)
          w[i][ax] = spec.amplitudes[ax] * std::sin(two_pi * spec.frequency * t);
      }
      break;
    }
    case TrajectoryKind::mixed:
      w = mixed_trajectory(n, spec.rate, spec.amplitudes, rng);
      break;
    case TrajectoryKind::degenerate: {
      w = mixed_trajectory(n, spec.rate, spec.amplitudes, rng);
      for (auto& wi : w)
        for (int ax = 0; ax < 6; ++ax)
          if (!(spec.axes_mask >> ax & 1u)) wi[ax] = 0.0;
      if (spec.remove_direction) {
        const auto& dir = *spec.remove_direction;
        double nrm2 = 0.0;
        for (double v : dir) nrm2 += v * v;
        if (nrm2 <= 0.0)
          raise(errc::invalid_argument, "remove_direction must be nonzero");
        for (auto& wi : w) {
          double p = 0.0;
          for (int ax = 0; ax < 6; ++ax) p += wi[ax] * dir[ax];
          p /= nrm2;
          for (int ax = 0; ax < 6; ++ax) wi[ax] -= p * dir[ax];
        }
      }
      break;
    }
  }
  return w;
}

Dataset simulate_dataset(const SensorModel& m, const TrajectorySpec& spec, uint64_t seed) {
  Rng traj_rng = Rng::substream(seed, "trajectory");
  uint64_t noise_stream = Rng::substream(seed, "noise").state();

  Dataset ds;
  ds.wrench = generate_trajectory(spec, traj_rng);
  ds.rate_hz = spec.rate;
  ds.frames.reserve(ds.wrench.size());
  for (std::size_t i = 0; i < ds.wrench.size(); ++i) {
    SensorFrame f = simulate_frame(m, ds.wrench[i], double(i) / spec.rate,
                                   noise_stream, i);
    ds.flags |= f.flags;
    ds.frames.push_back(f);
  }
  ds.meta.seed = seed;
  ds.meta.trajectory = trajectory_kind_name(spec.kind);
  ds.meta.noise_std = m.curves[0].noise_std;
  ds.meta.quantized = m.quantize_output;
  return ds;
}

GroundTruth ground_truth_calibration(const SensorModel& m) {
  la::Mat gd(6, 6);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i)
      gd(j, i) = m.curves[j].gain * m.map.scale[i] * m.map.ratios(i, j);
  GroundTruth gt;
  gt.c = la::inverse(gd);
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int j = 0; j < 6; ++j) s += gt.c(i, j) * m.curves[j].bias;
    gt.offset[i] = -s;
  }
  return gt;
}

SensorModel default_model() {
  SensorModel m;
  la::Mat ratios = refdata::fem_displacement_ratios();
  m.map = compliance_from_table(
      ratios, displacement_scales(ratios, refdata::axis_ranges()));
  m.curves.fill(PhotocouplerCurve{});
  return m;
}

}  // namespace ft::model

#include <cmath>
#include <cstring>
#include <set>

#include "doctest.h"
#include "ft/error.hpp"
#include "ft/model.hpp"
#include "ft/refdata.hpp"
#include "ft/rng.hpp"

using namespace ft;
using namespace ft::model;

namespace {

Wrench make_wrench(double fx, double fy, double fz, double mx, double my,
                   double mz) {
  Wrench w;
  w.fx = fx;
  w.fy = fy;
  w.fz = fz;
  w.mx = mx;
  w.my = my;
  w.mz = mz;
  return w;
}

}  // namespace

TEST_CASE("table row accepted, unit load reproduces the tabulated ratio") {
  la::Mat ratios = refdata::fem_displacement_ratios();
  CHECK(ratios(0, 0) == doctest::Approx(0.03));
  CHECK(ratios(0, 3) == doctest::Approx(119.30));
  std::array<double, 6> unit_scale;
  unit_scale.fill(1.0);
  ComplianceMap map = compliance_from_table(ratios, unit_scale);
  Wrench w = make_wrench(1, 0, 0, 0, 0, 0);
  auto d = wrench_to_displacements(map, w);
  CHECK(d[3] == doctest::Approx(119.30));
  CHECK(d[5] == doctest::Approx(-116.79));
}

TEST_CASE("zero ratio matrix is rank deficient") {
  std::array<double, 6> s;
  s.fill(1.0);
  CHECK_THROWS_AS((void)compliance_from_table(la::Mat(6, 6), s), Error);
  try {
    (void)compliance_from_table(la::Mat(6, 6), s);
  } catch (const Error& e) {
    CHECK(e.code() == errc::rank_deficient);
  }
}

TEST_CASE("reference ratio table has elimination rank 6") {
  CHECK(la::rank_elimination(refdata::fem_displacement_ratios()) == 6);
}

TEST_CASE("displacement map is linear to 1e-12") {
  SensorModel m = default_model();
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    Wrench w1, w2;
    for (int ax = 0; ax < 6; ++ax) {
      w1[ax] = rng.uniform(-100.0, 100.0);
      w2[ax] = rng.uniform(-100.0, 100.0);
    }
    double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    Wrench wc;
    for (int ax = 0; ax < 6; ++ax) wc[ax] = a * w1[ax] + b * w2[ax];
    auto d1 = wrench_to_displacements(m.map, w1);
    auto d2 = wrench_to_displacements(m.map, w2);
    auto dc = wrench_to_displacements(m.map, wc);
    for (int j = 0; j < 6; ++j) {
      double want = a * d1[j] + b * d2[j];
      CHECK(dc[j] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("unit Fz load displaces sensors 1,3,5 equally") {
  SensorModel m = default_model();
  auto d = wrench_to_displacements(m.map, make_wrench(0, 0, 1, 0, 0, 0));
  CHECK(d[0] == doctest::Approx(d[2]).epsilon(1e-12));
  CHECK(d[2] == doctest::Approx(d[4]).epsilon(1e-12));
  CHECK(std::abs(d[0]) > 100.0 * std::abs(d[1]));
}

TEST_CASE("voltage curve: bias at operating point, slope, clamping") {
  PhotocouplerCurve c;
  bool sat = false;
  CHECK(displacement_to_voltage(0.0, c, &sat) == doctest::Approx(1.65));
  CHECK_FALSE(sat);
  CHECK(displacement_to_voltage(0.05, c, &sat) == doctest::Approx(1.40));
  CHECK_FALSE(sat);
  // beyond range -> endpoint value + flag
  double hi = displacement_to_voltage(0.2, c, &sat);
  CHECK_FALSE(sat);
  CHECK(displacement_to_voltage(0.5, c, &sat) == doctest::Approx(hi));
  CHECK(sat);
}

TEST_CASE("curve validation rejects bad parameter sets") {
  PhotocouplerCurve c;
  validate_curve(c);  // defaults pass
  c.range_lo = 0.3;
  CHECK_THROWS_AS(validate_curve(c), Error);
  c = PhotocouplerCurve{};
  c.noise_std = -1.0;
  CHECK_THROWS_AS(validate_curve(c), Error);
  c = PhotocouplerCurve{};
  c.operating_point = 0.25;
  CHECK_THROWS_AS(validate_curve(c), Error);
}

TEST_CASE("quantize hits the rails and the midpoint") {
  CHECK(quantize(0.0) == 0);
  CHECK(quantize(3.3) == 65535);
  CHECK(quantize(-1.0) == 0);
  CHECK(quantize(4.0) == 65535);
  CHECK(quantize(1.65) == 32768);
  // quantization error bound: half an LSB
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    double v = rng.uniform(0.0, 3.3);
    double back = double(quantize(v)) / 65535.0 * 3.3;
    CHECK(std::abs(back - v) <= 3.3 / 65535.0 / 2.0 + 1e-12);
  }
}

TEST_CASE("zero wrench, zero noise frame sits at bias") {
  SensorModel m = default_model();
  for (auto& c : m.curves) c.noise_std = 0.0;
  SensorFrame f = simulate_frame(m, Wrench{}, 0.0, 0, 0);
  for (int j = 0; j < 6; ++j) CHECK(f.s[j] == doctest::Approx(1.65));
  CHECK(f.repr == Representation::volts);
  CHECK(f.flags == 0);
}

TEST_CASE("noise std over 1e4 zero-wrench frames is within 5%") {
  SensorModel m = default_model();
  uint64_t stream = Rng::substream(42, "noise").state();
  const int n = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    SensorFrame f = simulate_frame(m, Wrench{}, 0.0, stream, uint64_t(i));
    for (int j = 0; j < 6; ++j) {
      double e = f.s[j] - 1.65;
      sum += e;
      sumsq += e * e;
    }
  }
  double mean = sum / (6.0 * n);
  double std = std::sqrt(sumsq / (6.0 * n) - mean * mean);
  CHECK(std == doctest::Approx(3.92e-2).epsilon(0.05));
}

TEST_CASE("identical rng state gives bit-identical frames") {
  SensorModel m = default_model();
  uint64_t stream = Rng::substream(7, "noise").state();
  Wrench w = make_wrench(10, -20, 30, 1, -2, 3);
  SensorFrame a = simulate_frame(m, w, 0.5, stream, 123);
  SensorFrame b = simulate_frame(m, w, 0.5, stream, 123);
  for (int j = 0; j < 6; ++j) CHECK(a.s[j] == b.s[j]);
}

TEST_CASE("ramp trajectory ends at the amplitude") {
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::ramp;
  spec.duration = 1.0;
  spec.rate = 1000.0;
  spec.amplitudes = make_wrench(100, 0, 0, 0, 0, 0);
  Rng rng(1);
  auto traj = generate_trajectory(spec, rng);
  REQUIRE(traj.size() == 1000);
  CHECK(traj.back().fx == doctest::Approx(100.0));
  CHECK(traj.back().fy == 0.0);
  CHECK(traj.back().mz == 0.0);
}

TEST_CASE("degenerate trajectory confined to {Fz} leaves other axes zero") {
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::degenerate;
  spec.duration = 1.0;
  spec.rate = 1000.0;
  spec.amplitudes = make_wrench(100, 100, 100, 10, 10, 10);
  spec.axes_mask = 1u << 2;  // Fz only
  Rng rng(5);
  auto traj = generate_trajectory(spec, rng);
  bool fz_moved = false;
  for (const Wrench& w : traj) {
    CHECK(w.fx == 0.0);
    CHECK(w.fy == 0.0);
    CHECK(w.mx == 0.0);
    CHECK(w.my == 0.0);
    CHECK(w.mz == 0.0);
    if (w.fz != 0.0) fz_moved = true;
  }
  CHECK(fz_moved);
}

TEST_CASE("mixed trajectory covers all 64 axis combinations") {
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::mixed;
  spec.duration = 1.0;
  spec.rate = 1000.0;
  for (int ax = 0; ax < 6; ++ax) spec.amplitudes[ax] = 10.0;
  Rng rng(9);
  auto traj = generate_trajectory(spec, rng);
  std::set<unsigned> seen;
  for (const Wrench& w : traj) {
    unsigned mask = 0;
    for (int ax = 0; ax < 6; ++ax)
      if (w[ax] != 0.0) mask |= 1u << ax;
    seen.insert(mask);
  }
  // every segment has some nonzero sample of its pattern; sinusoid zeros can
  // drop a sample's bit, so check presence over the whole run
  std::set<unsigned> patterns;
  int n = int(traj.size());
  for (int s = 0; s < 64; ++s) {
    unsigned want = unsigned(s);
    bool found = false;
    for (int i = s * n / 64; i < (s + 1) * n / 64 && !found; ++i) {
      unsigned mask = 0;
      for (int ax = 0; ax < 6; ++ax)
        if (traj[size_t(i)][ax] != 0.0) mask |= 1u << ax;
      if (mask == want) found = true;
    }
    if (found) patterns.insert(want);
  }
  CHECK(patterns.size() == 64);
}

TEST_CASE("remove_direction empties that direction from every sample") {
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::degenerate;
  spec.duration = 1.0;
  spec.rate = 500.0;
  for (int ax = 0; ax < 6; ++ax) spec.amplitudes[ax] = 5.0;
  std::array<double, 6> dir = {1, 1, 2, 0.5, -0.5, -1};
  spec.remove_direction = dir;
  Rng rng(11);
  auto traj = generate_trajectory(spec, rng);
  double n2 = 0.0;
  for (double v : dir) n2 += v * v;
  for (const Wrench& w : traj) {
    double proj = 0.0;
    for (int ax = 0; ax < 6; ++ax) proj += w[ax] * dir[ax];
    CHECK(std::abs(proj) < 1e-9 * std::sqrt(n2) * 10.0 + 1e-12);
  }
}

TEST_CASE("unknown trajectory kinds are rejected by name lookup") {
  CHECK_THROWS_AS((void)trajectory_kind_from("spiral"), Error);
  CHECK(trajectory_kind_from("ramp") == TrajectoryKind::ramp);
  CHECK(trajectory_kind_from("mixed") == TrajectoryKind::mixed);
}

TEST_CASE("dataset simulation is deterministic and records metadata") {
  SensorModel m = default_model();
  TrajectorySpec spec;
  spec.duration = 0.25;
  spec.rate = 1000.0;
  for (int ax = 0; ax < 6; ++ax) spec.amplitudes[ax] = 0.3 * refdata::axis_ranges()[ax];
  Dataset a = simulate_dataset(m, spec, 42);
  Dataset b = simulate_dataset(m, spec, 42);
  REQUIRE(a.size() == 250);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::memcmp(a.frames[i].s.data(), b.frames[i].s.data(),
                      sizeof(double) * 6) == 0);
    CHECK(a.frames[i].t == b.frames[i].t);
  }
  CHECK(a.meta.seed == 42);
  CHECK(a.meta.trajectory == "mixed");
  CHECK(a.meta.noise_std == doctest::Approx(3.92e-2));
  CHECK_FALSE(a.meta.quantized);
  Dataset c = simulate_dataset(m, spec, 43);
  CHECK(c.frames[0].s != a.frames[0].s);
}

TEST_CASE("saturation is flagged when amplitudes exceed the linear band") {
  SensorModel m = default_model();
  for (auto& c : m.curves) c.noise_std = 0.0;
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::ramp;
  spec.duration = 0.1;
  spec.rate = 1000.0;
  for (int ax = 0; ax < 6; ++ax)
    spec.amplitudes[ax] = 4.0 * refdata::axis_ranges()[ax];
  Dataset d = simulate_dataset(m, spec, 1);
  CHECK((d.flags & flag_saturated) != 0);
}

TEST_CASE("ground-truth calibration inverts the noise-free simulator") {
  SensorModel m = default_model();
  for (auto& c : m.curves) c.noise_std = 0.0;
  GroundTruth gt = ground_truth_calibration(m);
  Rng rng(13);
  auto ranges = refdata::axis_ranges();
  for (int trial = 0; trial < 100; ++trial) {
    Wrench w;
    for (int ax = 0; ax < 6; ++ax) w[ax] = rng.uniform(-0.3, 0.3) * ranges[ax];
    SensorFrame f = simulate_frame(m, w, 0.0, 0, 0);
    REQUIRE(f.flags == 0);
    for (int i = 0; i < 6; ++i) {
      double got = gt.offset[i];
      for (int j = 0; j < 6; ++j) got += gt.c(i, j) * f.s[j];
      CHECK(got == doctest::Approx(w[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("quantized simulation emits counts in range") {
  SensorModel m = default_model();
  m.quantize_output = true;
  TrajectorySpec spec;
  spec.duration = 0.128;
  spec.rate = 1000.0;
  for (int ax = 0; ax < 6; ++ax) spec.amplitudes[ax] = 0.2 * refdata::axis_ranges()[ax];
  Dataset d = simulate_dataset(m, spec, 2);
  CHECK(d.representation() == Representation::counts);
  CHECK(d.meta.quantized);
  for (const auto& f : d.frames)
    for (double s : f.s) {
      CHECK(s >= 0.0);
      CHECK(s <= 65535.0);
      CHECK(s == std::floor(s));
    }
}

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "ft/calib.hpp"
#include "ft/config.hpp"
#include "ft/csvio.hpp"
#include "ft/error.hpp"
#include "ft/kalman.hpp"
#include "ft/manifest.hpp"
#include "ft/model.hpp"
#include "ft/refdata.hpp"
#include "ft/rng.hpp"

using namespace ft;
using namespace ft::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ftcal-test-" + std::to_string(Rng(uint64_t(
                                               std::chrono::steady_clock::now()
                                                   .time_since_epoch()
                                                   .count()))
                                               .next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

model::Dataset sample_dataset(double noise, double seconds, uint64_t seed) {
  model::SensorModel m = model::default_model();
  for (auto& c : m.curves) c.noise_std = noise;
  model::TrajectorySpec spec;
  spec.duration = seconds;
  spec.rate = 1000.0;
  auto ranges = refdata::axis_ranges();
  for (int ax = 0; ax < 6; ++ax) spec.amplitudes[ax] = 0.3 * ranges[ax];
  return simulate_dataset(m, spec, seed);
}

errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return errc::io_error;  // sentinel: "did not throw"
}

}  // namespace

TEST_CASE("dataset csv round trip is value identical") {
  TempDir tmp;
  model::Dataset d = sample_dataset(3.92e-2, 0.25, 77);
  std::string path = tmp.file("data.csv");
  save_dataset(d, path);
  model::Dataset back = load_dataset(path);
  REQUIRE(back.size() == d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    CHECK(back.frames[k].t == d.frames[k].t);
    for (int j = 0; j < 6; ++j) CHECK(back.frames[k].s[j] == d.frames[k].s[j]);
    for (int i = 0; i < 6; ++i) CHECK(back.wrench[k][i] == d.wrench[k][i]);
  }
  CHECK(back.representation() == model::Representation::volts);
}

TEST_CASE("quantized dataset round trips as counts") {
  TempDir tmp;
  model::SensorModel m = model::default_model();
  m.quantize_output = true;
  model::TrajectorySpec spec;
  spec.duration = 0.128;
  spec.rate = 1000.0;
  auto ranges = refdata::axis_ranges();
  for (int ax = 0; ax < 6; ++ax) spec.amplitudes[ax] = 0.2 * ranges[ax];
  model::Dataset d = simulate_dataset(m, spec, 5);
  std::string path = tmp.file("counts.csv");
  save_dataset(d, path);
  model::Dataset back = load_dataset(path, model::Representation::counts);
  CHECK(back.representation() == model::Representation::counts);
  CHECK(back.meta.quantized);
  for (std::size_t k = 0; k < d.size(); ++k)
    for (int j = 0; j < 6; ++j) CHECK(back.frames[k].s[j] == d.frames[k].s[j]);
  // loading counts as volts fails the range validation
  CHECK(code_of([&] { (void)load_dataset(path); }) == errc::parse_error);
}

TEST_CASE("swapped header columns are rejected") {
  TempDir tmp;
  std::string path = tmp.file("bad.csv");
  write_text_file(path,
                  "t,s2,s1,s3,s4,s5,s6,fx,fy,fz,mx,my,mz\n"
                  "0,1,1,1,1,1,1,0,0,0,0,0,0\n");
  CHECK(code_of([&] { (void)load_dataset(path); }) == errc::header_mismatch);
}

TEST_CASE("parse errors carry the file location") {
  TempDir tmp;
  std::string path = tmp.file("bad.csv");
  write_text_file(path,
                  "t,s1,s2,s3,s4,s5,s6,fx,fy,fz,mx,my,mz\n"
                  "0,1,1,1,1,1,1,0,0,0,0,0,0\n"
                  "0.001,1,abc,1,1,1,1,0,0,0,0,0,0\n");
  try {
    (void)load_dataset(path);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::parse_error);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  // non-increasing time
  write_text_file(path,
                  "t,s1,s2,s3,s4,s5,s6,fx,fy,fz,mx,my,mz\n"
                  "0,1,1,1,1,1,1,0,0,0,0,0,0\n"
                  "0,1,1,1,1,1,1,0,0,0,0,0,0\n");
  CHECK(code_of([&] { (void)load_dataset(path); }) == errc::parse_error);
  // wrong field count
  write_text_file(path,
                  "t,s1,s2,s3,s4,s5,s6,fx,fy,fz,mx,my,mz\n"
                  "0,1,1,1,1,1,1,0,0,0,0,0\n");
  CHECK(code_of([&] { (void)load_dataset(path); }) == errc::parse_error);
}

TEST_CASE("100k-row file parses in under a second") {
  TempDir tmp;
  model::SensorModel m = model::default_model();
  model::TrajectorySpec spec;
  spec.duration = 100.0;
  spec.rate = 1000.0;
  auto ranges = refdata::axis_ranges();
  for (int ax = 0; ax < 6; ++ax) spec.amplitudes[ax] = 0.3 * ranges[ax];
  model::Dataset d = simulate_dataset(m, spec, 1);
  REQUIRE(d.size() == 100000);
  std::string path = tmp.file("big.csv");
  save_dataset(d, path);
  auto t0 = std::chrono::steady_clock::now();
  model::Dataset back = load_dataset(path);
  auto t1 = std::chrono::steady_clock::now();
  CHECK(back.size() == 100000);
  CHECK(std::chrono::duration<double>(t1 - t0).count() < 1.0);
}

TEST_CASE("calibration csv round trip preserves every value and header") {
  TempDir tmp;
  model::Dataset d = sample_dataset(3.92e-2, 0.5, 13);
  calib::Calibration c = calib::calibrate_qp(
      d, calib::default_constraints(model::default_model().map, 100.0));
  std::string path = tmp.file("cal.csv");
  save_calibration(c, path);
  calib::Calibration back = load_calibration(path);
  CHECK(back.method == "qp");
  CHECK(back.repr == c.repr);
  CHECK(back.slack == c.slack);
  for (int i = 0; i < 6; ++i) {
    CHECK(back.offset[i] == c.offset[i]);
    for (int j = 0; j < 6; ++j) CHECK(back.c(i, j) == c.c(i, j));
    CHECK(back.kkt[i].stationarity == c.kkt[i].stationarity);
    CHECK(back.kkt[i].complementarity == c.kkt[i].complementarity);
  }
}

TEST_CASE("matrix file loader skips comments and validates shape") {
  TempDir tmp;
  std::string path = tmp.file("mat.csv");
  write_text_file(path,
                  "# method=fixture\n"
                  "1,2,3,4,5,6\n"
                  "1,2,3,4,5,6\n\n"
                  "1,2,3,4,5,6\n"
                  "1,2,3,4,5,6\n"
                  "1,2,3,4,5,6\n"
                  "6,5,4,3,2,1\n");
  la::Mat m = load_matrix(path);
  CHECK(m(0, 1) == 2.0);
  CHECK(m(5, 0) == 6.0);
  write_text_file(path, "1,2,3\n");
  CHECK(code_of([&] { (void)load_matrix(path); }) == errc::parse_error);
}

TEST_CASE("config defaults and full round trip") {
  ExperimentConfig def = default_config();
  CHECK(def.seed == 42);
  CHECK(def.slack == 100.0);
  CHECK(def.trajectory.kind == model::TrajectoryKind::mixed);
  CHECK(def.trajectory.amplitudes.fz ==
        doctest::Approx(0.3 * 1850.0));
  CHECK(def.methods.size() == 2);

  TempDir tmp;
  std::string path = tmp.file("exp.toml");
  write_text_file(path,
                  "# experiment\n"
                  "[model]\n"
                  "noise_std = 0.01\n"
                  "adc = true\n"
                  "cubic = 2.5\n"
                  "\n"
                  "[trajectory]\n"
                  "kind = \"sinusoid\"\n"
                  "duration = 2.0\n"
                  "rate = 500.0\n"
                  "amplitudes = [100, 100, 200, 5, 5, 5]\n"
                  "seed = 7\n"
                  "\n"
                  "[calibration]\n"
                  "methods = [\"qp\", \"ridge\"]\n"
                  "slack = 50.0\n"
                  "lambda = 0.5\n"
                  "degree = 2\n"
                  "\n"
                  "[evaluation]\n"
                  "ranges = [1000, 1000, 2000, 20, 20, 30]\n"
                  "crosstalk_orientation = \"response-rows\"\n"
                  "theta = 0.25\n");
  ExperimentConfig cfg = load_config(path);
  CHECK(cfg.adc);
  CHECK(cfg.curve.noise_std.value() == doctest::Approx(0.01));
  CHECK(cfg.curve.cubic.value() == doctest::Approx(2.5));
  CHECK(cfg.trajectory.kind == model::TrajectoryKind::sinusoid);
  CHECK(cfg.trajectory.rate == doctest::Approx(500.0));
  CHECK(cfg.trajectory.amplitudes.fz == doctest::Approx(200.0));
  CHECK(cfg.seed == 7);
  CHECK(cfg.methods == std::vector<std::string>{"qp", "ridge"});
  CHECK(cfg.slack == doctest::Approx(50.0));
  CHECK(cfg.lambda == doctest::Approx(0.5));
  CHECK(cfg.degree == 2);
  CHECK(cfg.ranges[2] == doctest::Approx(2000.0));
  CHECK_FALSE(cfg.xtalk_rows_loaded);
  CHECK(cfg.theta == doctest::Approx(0.25));

  model::SensorModel m = cfg.make_model();
  CHECK(m.quantize_output);
  for (const auto& cu : m.curves) {
    CHECK(cu.noise_std == doctest::Approx(0.01));
    CHECK(cu.cubic == doctest::Approx(2.5));
  }
  auto specs = cfg.method_specs();
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].name == "qp");
  CHECK(specs[0].slack == doctest::Approx(50.0));
  CHECK(specs[1].lambda == doctest::Approx(0.5));
}

TEST_CASE("unconfigured amplitudes follow configured ranges") {
  TempDir tmp;
  std::string path = tmp.file("exp.toml");
  write_text_file(path,
                  "[evaluation]\n"
                  "ranges = [1000, 1000, 1000, 10, 10, 10]\n");
  ExperimentConfig cfg = load_config(path);
  CHECK(cfg.trajectory.amplitudes.fx == doctest::Approx(300.0));
  CHECK(cfg.trajectory.amplitudes.mx == doctest::Approx(3.0));
}

TEST_CASE("config errors carry file and line") {
  TempDir tmp;
  std::string path = tmp.file("exp.toml");

  write_text_file(path, "[model]\nnoise_st = 0.01\n");
  try {
    (void)load_config(path);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::config_error);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
    CHECK(std::string(e.what()).find("noise_st") != std::string::npos);
  }

  write_text_file(path, "[modle]\n");
  CHECK(code_of([&] { (void)load_config(path); }) == errc::config_error);

  write_text_file(path, "[model]\nnoise_std = abc\n");
  CHECK(code_of([&] { (void)load_config(path); }) == errc::config_error);

  write_text_file(path, "[model]\nnoise_std = 0.01\nnoise_std = 0.02\n");
  CHECK(code_of([&] { (void)load_config(path); }) == errc::config_error);

  write_text_file(path, "[trajectory]\nkind = \"spiral\"\n");
  CHECK(code_of([&] { (void)load_config(path); }) == errc::config_error);

  write_text_file(path, "[calibration]\nmethods = [\"pinv\", \"forest\"]\n");
  CHECK(code_of([&] { (void)load_config(path); }) == errc::config_error);

  write_text_file(path, "[evaluation]\nranges = [1, 2, 3]\n");
  CHECK(code_of([&] { (void)load_config(path); }) == errc::config_error);

  write_text_file(path, "noise_std = 0.01\n");
  CHECK(code_of([&] { (void)load_config(path); }) == errc::config_error);
}

TEST_CASE("model files override compliance and curves") {
  TempDir tmp;
  std::string path = tmp.file("model.toml");
  write_text_file(path,
                  "[compliance]\n"
                  "ranges = [1050, 1200, 1850, 25, 25, 36]\n"
                  "\n"
                  "[noise]\n"
                  "std = 0.02\n"
                  "\n"
                  "[curve3]\n"
                  "gain = -4.0\n"
                  "noise_std = 0.05\n"
                  "\n"
                  "[adc]\n"
                  "enabled = true\n");
  model::SensorModel m = load_model_config(path);
  CHECK(m.quantize_output);
  CHECK(m.curves[0].noise_std == doctest::Approx(0.02));
  CHECK(m.curves[2].noise_std == doctest::Approx(0.05));
  CHECK(m.curves[2].gain == doctest::Approx(-4.0));
  CHECK(m.curves[1].gain == doctest::Approx(-5.0));
  // default ratios untouched; scale derived from the given ranges
  CHECK(m.map.ratios(0, 3) == doctest::Approx(119.30));

  write_text_file(path, "[compliance]\nrow_fx = [0, 0, 0, 0, 0, 0]\n");
  // zero row breaks the scale derivation
  CHECK_THROWS_AS((void)load_model_config(path), Error);
}

TEST_CASE("kalman filter limits and convergence") {
  // r -> 0 passes the input through; q > 0 keeps the posterior variance off
  // the absorbing zero fixed point so the unit gain persists
  std::vector<double> z = {1.0, 2.0, -0.5, 3.0, 0.0};
  KalmanParams p;
  p.r = 1e-300;
  p.q = 1e-6;
  std::vector<double> out = kalman_filter(z, p);
  for (std::size_t k = 0; k < z.size(); ++k)
    CHECK(out[k] == doctest::Approx(z[k]).epsilon(1e-9));

  // constant input converges to the constant
  KalmanParams pc;
  std::vector<double> zc(2000, 1.65);
  std::vector<double> oc = kalman_filter(zc, pc);
  CHECK(oc.back() == doctest::Approx(1.65).epsilon(1e-9));

  // invalid parameters
  KalmanParams bad;
  bad.r = 0.0;
  CHECK_THROWS_AS((void)kalman_filter(z, bad), Error);
}

TEST_CASE("kalman filter halves the noise variance on a constant signal") {
  uint64_t stream = Rng::substream(3, "noise").state();
  const int n = 10000;
  std::vector<double> z(n);
  for (int k = 0; k < n; ++k)
    z[size_t(k)] = 1.65 + 3.92e-2 * gaussian_at(stream, uint64_t(k));
  KalmanParams p;
  p.q = 0.0;
  std::vector<double> out = kalman_filter(z, p);
  // measure output variance after the gain settles
  double mi = 0.0, mo = 0.0;
  const int skip = 100;
  for (int k = skip; k < n; ++k) {
    mi += z[size_t(k)];
    mo += out[size_t(k)];
  }
  mi /= n - skip;
  mo /= n - skip;
  double vi = 0.0, vo = 0.0;
  for (int k = skip; k < n; ++k) {
    vi += (z[size_t(k)] - mi) * (z[size_t(k)] - mi);
    vo += (out[size_t(k)] - mo) * (out[size_t(k)] - mo);
  }
  CHECK(vo < 0.5 * vi);
}

TEST_CASE("kalman filter is causal") {
  Rng rng(9);
  std::vector<double> z(500);
  for (double& v : z) v = rng.gaussian();
  KalmanParams p;
  std::vector<double> full = kalman_filter(z, p);
  for (std::size_t cut : {std::size_t(1), std::size_t(10), std::size_t(250),
                          std::size_t(499)}) {
    std::vector<double> prefix(z.begin(), z.begin() + long(cut));
    std::vector<double> got = kalman_filter(prefix, p);
    for (std::size_t k = 0; k < cut; ++k) CHECK(got[k] == full[k]);
  }
}

TEST_CASE("manifest format is deterministic and hashes files") {
  TempDir tmp;
  std::string f = tmp.file("x.txt");
  write_text_file(f, "hello\n");
  RunManifest m;
  m.command = "simulate";
  m.seed = 42;
  m.backend = "scalar";
  m.note("frames", "1000");
  m.add_file("x.txt", f);
  std::string a = format_manifest(m);
  std::string b = format_manifest(m);
  CHECK(a == b);
  CHECK(a.find("command=simulate") != std::string::npos);
  CHECK(a.find("status=ok") != std::string::npos);
  CHECK(a.find("seed=42") != std::string::npos);
  CHECK(a.find("backend=scalar") != std::string::npos);
  CHECK(a.find("note frames=1000") != std::string::npos);
  CHECK(a.find("file=x.txt fnv1a:") != std::string::npos);
  // fnv1a of "hello\n"
  CHECK(fnv1a_bytes("hello\n") != fnv1a_bytes("hello"));
  m.status = "error";
  m.error = "boom";
  CHECK(format_manifest(m).find("error=boom") != std::string::npos);
}

#ifdef FTCAL_BIN
namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + FTCAL_BIN + "\" " + args;
  int rc = std::system(cmd.c_str());
  if (rc >= 0 && WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -1;
}

}  // namespace

TEST_CASE("check-signs flags the unconstrained published matrix and exits 1") {
  TempDir tmp;
  la::Mat c = refdata::least_squares_calibration();
  std::string csv = "# unconstrained fit\n";
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", c(i, j));
      csv += buf;
      csv += j + 1 < 6 ? "," : "\n";
    }
  }
  std::string mat = tmp.file("cal.csv");
  write_text_file(mat, csv);
  std::string out = tmp.file("run");
  int rc = run_cli("check-signs \"" + mat + "\" --out \"" + out + "\"");
  CHECK(rc == 1);
  std::string manifest = read_text_file(out + "/manifest.txt");
  CHECK(manifest.find("command=check-signs") != std::string::npos);
  auto pos = manifest.find("sign_violations=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stoi(manifest.substr(pos + 16)) > 0);
  std::string report = read_text_file(out + "/sign_check.txt");
  CHECK(report.find("Fz") != std::string::npos);
}

TEST_CASE("demo-nullspace on the built-in config reports qp wins") {
  TempDir tmp;
  std::string out = tmp.file("run");
  int rc = run_cli("demo-nullspace --out \"" + out + "\"");
  CHECK(rc == 0);
  std::string manifest = read_text_file(out + "/manifest.txt");
  CHECK(manifest.find("status=ok") != std::string::npos);
  auto pos = manifest.find("qp_wins=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stoi(manifest.substr(pos + 8)) >= 4);
}
#endif

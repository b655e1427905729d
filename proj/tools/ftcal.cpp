#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ft/calib.hpp"
#include "ft/config.hpp"
#include "ft/constraints.hpp"
#include "ft/csvio.hpp"
#include "ft/error.hpp"
#include "ft/eval.hpp"
#include "ft/kernels.hpp"
#include "ft/manifest.hpp"
#include "ft/model.hpp"
#include "ft/rng.hpp"

namespace fs = std::filesystem;
using namespace ft;
using pipeline::ExperimentConfig;
using pipeline::RunManifest;

namespace {

int exit_code_for(errc c) {
  switch (c) {
    case errc::parse_error:
    case errc::header_mismatch:
    case errc::config_error:
    case errc::invalid_argument:
    case errc::unknown_kind:
    case errc::length_mismatch:
    case errc::representation_mismatch:
    case errc::insufficient_sweep:
    case errc::non_finite:
      return 1;
    default:
      return 2;
  }
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Opts {
  std::string config_path;
  std::string out = ".";
  uint64_t seed = 0;
  bool seed_given = false;
  std::string method;
  std::string data_path;
  std::string calib_path;
  std::string matrix_path;
};

ExperimentConfig load_cfg(const Opts& o, RunManifest& man) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    man.config_path = o.config_path;
    man.has_config = true;
    man.config_hash = pipeline::fnv1a_bytes(pipeline::read_text_file(o.config_path));
    cfg = pipeline::load_config(o.config_path);
  }
  if (o.seed_given) cfg.seed = o.seed;
  man.seed = cfg.seed;
  return cfg;
}

int run(const Opts& o, const char* name,
        const std::function<int(RunManifest&)>& body) {
  RunManifest man;
  man.command = name;
  man.backend = kernels::backend_name(kernels::active_backend());
  int code = 0;
  std::error_code ec;
  fs::create_directories(o.out, ec);
  try {
    if (ec) raise(errc::io_error, "cannot create output directory " + o.out);
    code = body(man);
  } catch (const Error& e) {
    man.status = "error";
    man.error = e.what();
    code = exit_code_for(e.code());
    std::fprintf(stderr, "ftcal %s: %s\n", name, e.what());
  } catch (const std::exception& e) {
    man.status = "error";
    man.error = e.what();
    code = 2;
    std::fprintf(stderr, "ftcal %s: %s\n", name, e.what());
  }
  try {
    pipeline::write_manifest(man, o.out + "/manifest.txt");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ftcal %s: cannot write manifest: %s\n", name, e.what());
    if (code == 0) code = 2;
  }
  return code;
}

model::Representation expected_repr(const ExperimentConfig& cfg) {
  return cfg.adc ? model::Representation::counts : model::Representation::volts;
}

// fully excited held-out set, seeded from a named sub-stream of the run seed
model::Dataset held_out_set(const ExperimentConfig& cfg,
                            const model::SensorModel& m) {
  model::TrajectorySpec spec = cfg.trajectory;
  spec.kind = model::TrajectoryKind::mixed;
  spec.remove_direction.reset();
  spec.axes_mask = 0x3f;
  spec.duration = 2.0;
  uint64_t test_seed = Rng::substream(cfg.seed, "test-data").state();
  return model::simulate_dataset(m, spec, test_seed);
}

void note_flags(RunManifest& man, Flags flags) {
  if (flags & flag_saturated) man.note("saturated", "true");
  if (flags & flag_null_space) man.note("null_space", "true");
  if (flags & flag_ridge_applied) man.note("ridge_applied", "true");
  if (flags & flag_rank_deficient_data) man.note("rank_deficient_data", "true");
}

std::string kkt_report(const calib::Calibration& c) {
  std::ostringstream os;
  os << "axis  stationarity  feasibility   dual_feas     complementarity\n";
  for (int ax = 0; ax < wrench_axes; ++ax) {
    const qp::Kkt& k = c.kkt[ax];
    char line[160];
    std::snprintf(line, sizeof line, "%-4s  %-12.3e  %-12.3e  %-12.3e  %.3e\n",
                  axis_names[ax], k.stationarity, k.feasibility,
                  k.dual_feasibility, k.complementarity);
    os << line;
  }
  return os.str();
}

std::string sign_report(const std::vector<calib::SignViolation>& viol,
                        double theta) {
  std::ostringstream os;
  if (viol.empty()) {
    os << "sign pattern check: OK (theta = " << fmt(theta) << ")\n";
  } else {
    os << "sign pattern check: " << viol.size() << " violation(s), theta = "
       << fmt(theta) << "\n";
    for (const auto& v : viol)
      os << axis_names[v.axis] << " s" << v.sensor + 1 << ": expected '"
         << v.expected << "', got '" << v.actual << "' (value "
         << fmt(v.value) << ")\n";
  }
  return os.str();
}

void save_metrics(const eval::MetricsReport& rep, const Opts& o,
                  RunManifest& man) {
  std::ostringstream csv, txt;
  eval::write_metrics_csv(csv, rep);
  eval::write_metrics_text(txt, rep);
  std::string base = o.out + "/metrics_" + rep.method;
  pipeline::write_text_file(base + ".csv", csv.str());
  pipeline::write_text_file(base + ".txt", txt.str());
  man.add_file("metrics_" + rep.method + ".csv", base + ".csv");
  man.add_file("metrics_" + rep.method + ".txt", base + ".txt");
  for (int ax = 0; ax < wrench_axes; ++ax)
    man.note(std::string("fse_") + rep.method + "_" + axis_names[ax],
             fmt(rep.fse[ax].mean, "%.17g"));
}

int cmd_simulate(const Opts& o) {
  return run(o, "simulate", [&](RunManifest& man) {
    ExperimentConfig cfg = load_cfg(o, man);
    model::SensorModel m = cfg.make_model();
    model::Dataset data = model::simulate_dataset(m, cfg.trajectory, cfg.seed);
    std::string path = o.out + "/dataset.csv";
    pipeline::save_dataset(data, path);
    man.note("frames", std::to_string(data.size()));
    man.note("trajectory", data.meta.trajectory);
    man.note("representation",
             model::representation_name(data.representation()));
    note_flags(man, data.flags);
    man.add_file("dataset.csv", path);
    return 0;
  });
}

int cmd_calibrate(const Opts& o) {
  return run(o, "calibrate", [&](RunManifest& man) {
    ExperimentConfig cfg = load_cfg(o, man);
    model::SensorModel m = cfg.make_model();
    model::Dataset train =
        o.data_path.empty()
            ? model::simulate_dataset(m, cfg.trajectory, cfg.seed)
            : pipeline::load_dataset(o.data_path, expected_repr(cfg));
    man.note("train_frames", std::to_string(train.size()));

    std::vector<std::string> methods =
        o.method.empty() ? cfg.methods : std::vector<std::string>{o.method};
    for (const std::string& name : methods) {
      if (name == "pinv") {
        calib::Calibration c = calib::calibrate_pseudo_inverse(train);
        std::string path = o.out + "/calibration_pinv.csv";
        pipeline::save_calibration(c, path);
        man.add_file("calibration_pinv.csv", path);
        note_flags(man, c.flags);
      } else if (name == "qp") {
        calib::Calibration c = calib::calibrate_qp(
            train, calib::default_constraints(m.map, cfg.slack));
        std::string path = o.out + "/calibration_qp.csv";
        pipeline::save_calibration(c, path);
        man.add_file("calibration_qp.csv", path);
        pipeline::write_text_file(o.out + "/kkt_report.txt", kkt_report(c));
        man.add_file("kkt_report.txt", o.out + "/kkt_report.txt");
        calib::DerivedConstants k = calib::derived_constants(m.map);
        man.note("fy_s4_over_s2", fmt(k.fy_s4_over_s2, "%.17g"));
        man.note("fy_s6_over_s2", fmt(k.fy_s6_over_s2, "%.17g"));
        man.note("my_s1_over_s3", fmt(k.my_s1_over_s3, "%.17g"));
        note_flags(man, c.flags);
      } else if (name == "ridge") {
        calib::PolyCalibrator c =
            calib::calibrate_regularized(train, cfg.lambda, cfg.degree);
        std::string path = o.out + "/poly_ridge.csv";
        pipeline::save_poly(c, path);
        man.add_file("poly_ridge.csv", path);
        note_flags(man, c.flags);
      } else if (name == "mlp") {
        calib::MlpCalibrator c =
            calib::train_mlp(train, cfg.epochs, cfg.learning_rate, cfg.seed);
        std::string path = o.out + "/mlp.csv";
        pipeline::save_mlp(c, path);
        man.add_file("mlp.csv", path);
        note_flags(man, c.flags);
      } else {
        raise(errc::unknown_kind, "unknown method '" + name + "'");
      }
    }
    return 0;
  });
}

int cmd_evaluate(const Opts& o) {
  return run(o, "evaluate", [&](RunManifest& man) {
    ExperimentConfig cfg = load_cfg(o, man);
    model::SensorModel m = cfg.make_model();
    model::Dataset test =
        o.data_path.empty()
            ? held_out_set(cfg, m)
            : pipeline::load_dataset(o.data_path, expected_repr(cfg));
    man.note("test_frames", std::to_string(test.size()));

    eval::MetricsReport rep;
    if (!o.calib_path.empty()) {
      calib::Calibration cal = pipeline::load_calibration(o.calib_path);
      rep = eval::evaluate(cal, test, m, cfg.ranges);
    } else {
      std::string name = o.method.empty() ? cfg.methods.front() : o.method;
      model::Dataset train =
          model::simulate_dataset(m, cfg.trajectory, cfg.seed);
      if (name == "pinv") {
        rep = eval::evaluate(calib::calibrate_pseudo_inverse(train), test, m,
                             cfg.ranges);
      } else if (name == "qp") {
        rep = eval::evaluate(
            calib::calibrate_qp(train,
                                calib::default_constraints(m.map, cfg.slack)),
            test, m, cfg.ranges);
      } else if (name == "ridge") {
        calib::PolyCalibrator c =
            calib::calibrate_regularized(train, cfg.lambda, cfg.degree);
        rep = eval::evaluate_predictor(
            "ridge", [&c](const model::SensorFrame& f) { return apply(c, f); },
            c.repr, test, m, cfg.ranges);
      } else if (name == "mlp") {
        calib::MlpCalibrator c =
            calib::train_mlp(train, cfg.epochs, cfg.learning_rate, cfg.seed);
        rep = eval::evaluate_predictor(
            "mlp", [&c](const model::SensorFrame& f) { return apply(c, f); },
            c.repr, test, m, cfg.ranges);
      } else {
        raise(errc::unknown_kind, "unknown method '" + name + "'");
      }
    }
    rep.xtalk_rows_loaded = cfg.xtalk_rows_loaded;
    save_metrics(rep, o, man);
    return 0;
  });
}

int cmd_compare(const Opts& o) {
  return run(o, "compare", [&](RunManifest& man) {
    ExperimentConfig cfg = load_cfg(o, man);
    model::SensorModel m = cfg.make_model();
    model::Dataset train = model::simulate_dataset(m, cfg.trajectory, cfg.seed);
    model::Dataset test = held_out_set(cfg, m);
    man.note("train_frames", std::to_string(train.size()));
    man.note("test_frames", std::to_string(test.size()));

    std::vector<eval::MethodSpec> specs = cfg.method_specs();
    if (!o.method.empty()) {
      std::vector<eval::MethodSpec> keep;
      for (const auto& s : specs)
        if (s.name == o.method) keep.push_back(s);
      if (keep.empty()) {
        eval::MethodSpec s;
        s.name = o.method;
        s.slack = cfg.slack;
        s.lambda = cfg.lambda;
        s.degree = cfg.degree;
        s.epochs = cfg.epochs;
        s.learning_rate = cfg.learning_rate;
        s.seed = cfg.seed;
        keep.push_back(s);
      }
      specs = keep;
    }
    eval::ComparisonReport rep =
        eval::compare_methods(train, test, specs, m, cfg.ranges);
    for (auto& f : rep.methods) f.metrics.xtalk_rows_loaded = cfg.xtalk_rows_loaded;

    std::ostringstream csv, txt;
    eval::write_comparison_csv(csv, rep);
    eval::write_comparison_text(txt, rep);
    pipeline::write_text_file(o.out + "/comparison.csv", csv.str());
    pipeline::write_text_file(o.out + "/comparison.txt", txt.str());
    man.add_file("comparison.csv", o.out + "/comparison.csv");
    man.add_file("comparison.txt", o.out + "/comparison.txt");

    for (const auto& f : rep.methods) {
      if (f.linear) {
        std::string path = o.out + "/calibration_" + f.spec.name + ".csv";
        pipeline::save_calibration(*f.linear, path);
        man.add_file("calibration_" + f.spec.name + ".csv", path);
      } else if (f.poly) {
        pipeline::save_poly(*f.poly, o.out + "/poly_ridge.csv");
        man.add_file("poly_ridge.csv", o.out + "/poly_ridge.csv");
      } else if (f.mlp) {
        pipeline::save_mlp(*f.mlp, o.out + "/mlp.csv");
        man.add_file("mlp.csv", o.out + "/mlp.csv");
      }
      for (int ax = 0; ax < wrench_axes; ++ax)
        man.note("fse_" + f.spec.name + "_" + axis_names[ax],
                 fmt(f.metrics.fse[ax].mean, "%.17g"));
    }
    for (int ax = 0; ax < wrench_axes; ++ax)
      if (std::isfinite(rep.improvement_ratio[ax]))
        man.note(std::string("improvement_") + axis_names[ax],
                 fmt(rep.improvement_ratio[ax], "%.17g"));
    return 0;
  });
}

int cmd_check_signs(const Opts& o) {
  return run(o, "check-signs", [&](RunManifest& man) {
    ExperimentConfig cfg = load_cfg(o, man);
    la::Mat c = pipeline::load_matrix(o.matrix_path);
    auto viol =
        calib::check_sign_structure(c, calib::reference_sign_pattern(cfg.theta));
    std::string report = sign_report(viol, cfg.theta);
    std::fputs(report.c_str(), stdout);
    pipeline::write_text_file(o.out + "/sign_check.txt", report);
    man.add_file("sign_check.txt", o.out + "/sign_check.txt");
    man.note("sign_violations", std::to_string(viol.size()));
    return viol.empty() ? 0 : 1;
  });
}

int cmd_demo_nullspace(const Opts& o) {
  return run(o, "demo-nullspace", [&](RunManifest& man) {
    ExperimentConfig cfg = load_cfg(o, man);
    model::SensorModel m = cfg.make_model();

    model::TrajectorySpec tr;
    tr.kind = model::TrajectoryKind::degenerate;
    tr.duration = 4.0;
    tr.rate = 1000.0;
    // range-scaled so the removed direction stays in the linear region
    std::array<double, 6> dir = {1.0, 1.0, 2.0, 0.5, -0.5, -1.0};
    double nrm = 0.0;
    for (int ax = 0; ax < wrench_axes; ++ax) {
      dir[size_t(ax)] *= cfg.ranges[size_t(ax)];
      nrm += dir[size_t(ax)] * dir[size_t(ax)];
    }
    nrm = std::sqrt(nrm);
    for (double& v : dir) v /= nrm;
    tr.remove_direction = dir;
    for (int ax = 0; ax < wrench_axes; ++ax)
      tr.amplitudes[ax] = 0.3 * cfg.ranges[ax];
    model::Dataset train = model::simulate_dataset(m, tr, cfg.seed);

    model::TrajectorySpec te = tr;
    te.kind = model::TrajectoryKind::mixed;
    te.remove_direction.reset();
    te.duration = 2.0;
    model::Dataset test = model::simulate_dataset(
        m, te, Rng::substream(cfg.seed, "test-data").state());
    man.note("train_frames", std::to_string(train.size()));
    man.note("test_frames", std::to_string(test.size()));

    calib::Calibration cp = calib::calibrate_pseudo_inverse(train);
    calib::Calibration cq =
        calib::calibrate_qp(train, calib::default_constraints(m.map, cfg.slack));
    pipeline::save_calibration(cp, o.out + "/calibration_pinv.csv");
    pipeline::save_calibration(cq, o.out + "/calibration_qp.csv");
    man.add_file("calibration_pinv.csv", o.out + "/calibration_pinv.csv");
    man.add_file("calibration_qp.csv", o.out + "/calibration_qp.csv");
    note_flags(man, cp.flags);

    auto pattern = calib::reference_sign_pattern(cfg.theta);
    pipeline::write_text_file(
        o.out + "/sign_check_pinv.txt",
        sign_report(calib::check_sign_structure(cp.c, pattern), cfg.theta));
    pipeline::write_text_file(
        o.out + "/sign_check_qp.txt",
        sign_report(calib::check_sign_structure(cq.c, pattern), cfg.theta));
    man.add_file("sign_check_pinv.txt", o.out + "/sign_check_pinv.txt");
    man.add_file("sign_check_qp.txt", o.out + "/sign_check_qp.txt");

    std::vector<Wrench> wp, wq;
    wp.reserve(test.size());
    wq.reserve(test.size());
    for (const auto& f : test.frames) {
      wp.push_back(apply(cp, f));
      wq.push_back(apply(cq, f));
    }
    auto fp = eval::full_scale_error(wp, test.wrench, cfg.ranges);
    auto fq = eval::full_scale_error(wq, test.wrench, cfg.ranges);

    std::ostringstream err;
    err << "axis,fse_pinv_pct,fse_qp_pct,ratio\n";
    int wins = 0;
    for (int ax = 0; ax < wrench_axes; ++ax) {
      double ratio = fq[ax].mean > 0.0 ? fp[ax].mean / fq[ax].mean : 1.0;
      err << axis_names[ax] << "," << fmt(fp[ax].mean, "%.17g") << ","
          << fmt(fq[ax].mean, "%.17g") << "," << fmt(ratio, "%.17g") << "\n";
      man.note(std::string("fse_pinv_") + axis_names[ax],
               fmt(fp[ax].mean, "%.17g"));
      man.note(std::string("fse_qp_") + axis_names[ax],
               fmt(fq[ax].mean, "%.17g"));
      man.note(std::string("improvement_") + axis_names[ax],
               fmt(ratio, "%.17g"));
      if (fq[ax].mean <= fp[ax].mean + 1e-6) ++wins;
    }
    man.note("qp_wins", std::to_string(wins));
    pipeline::write_text_file(o.out + "/errors.csv", err.str());
    man.add_file("errors.csv", o.out + "/errors.csv");

    std::printf("held-out FSE (%% of range), pinv vs qp, %d/6 axes won by qp\n",
                wins);
    for (int ax = 0; ax < wrench_axes; ++ax)
      std::printf("  %-2s  %10.4f  %10.4f\n", axis_names[ax], fp[ax].mean,
                  fq[ax].mean);
    return 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"six-axis force/torque sensor calibration toolkit"};
  app.require_subcommand(0, 1);
  std::string backend;
  app.add_option("--backend", backend, "compute backend (scalar or avx2)")
      ->check(CLI::IsMember({"scalar", "avx2"}));

  Opts o;
  auto add_common = [&](CLI::App* sub, bool with_seed = true) {
    sub->add_option("--config", o.config_path, "experiment config file");
    sub->add_option("--out", o.out, "output directory (default .)");
    if (with_seed)
      sub->add_option("--seed", o.seed, "override the config seed")
          ->each([&](const std::string&) { o.seed_given = true; });
  };

  CLI::App* sim = app.add_subcommand("simulate", "write a synthetic dataset CSV");
  add_common(sim);

  CLI::App* cal = app.add_subcommand("calibrate",
                                     "fit calibrations and write artifacts");
  add_common(cal);
  cal->add_option("--data", o.data_path, "training dataset CSV (default: simulate)");
  cal->add_option("--method", o.method, "single method: pinv, qp, ridge, mlp");

  CLI::App* ev = app.add_subcommand("evaluate", "write a metrics report");
  add_common(ev);
  ev->add_option("--data", o.data_path, "test dataset CSV (default: simulate)");
  ev->add_option("--method", o.method, "method to fit when no --calibration");
  ev->add_option("--calibration", o.calib_path, "stored calibration CSV");

  CLI::App* cmp = app.add_subcommand("compare",
                                     "fit all configured methods and compare");
  add_common(cmp);
  cmp->add_option("--method", o.method, "restrict to one method");

  CLI::App* chk = app.add_subcommand("check-signs",
                                     "check a matrix file against the expected sign pattern");
  add_common(chk, false);
  chk->add_option("matrix", o.matrix_path, "calibration matrix file")->required();

  CLI::App* demo = app.add_subcommand(
      "demo-nullspace", "degenerate-excitation experiment, pinv vs qp");
  add_common(demo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (backend == "scalar") {
    kernels::set_backend(kernels::Backend::scalar);
  } else if (backend == "avx2") {
    if (!kernels::set_backend(kernels::Backend::avx2)) {
      std::fprintf(stderr, "ftcal: avx2 backend not available on this machine\n");
      return 1;
    }
  }

  if (sim->parsed()) return cmd_simulate(o);
  if (cal->parsed()) return cmd_calibrate(o);
  if (ev->parsed()) return cmd_evaluate(o);
  if (cmp->parsed()) return cmd_compare(o);
  if (chk->parsed()) return cmd_check_signs(o);
  if (demo->parsed()) return cmd_demo_nullspace(o);
  std::fputs(app.help().c_str(), stdout);
  return 1;
}

#include "ft/eval.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "ft/refdata.hpp"

namespace ft::eval {

namespace {

constexpr double nan_d = std::numeric_limits<double>::quiet_NaN();

void check_pair(const std::vector<Wrench>& pred, const std::vector<Wrench>& ref) {
  if (pred.size() != ref.size())
    raise(errc::length_mismatch, "pred/ref series differ in length");
  if (pred.empty()) raise(errc::length_mismatch, "empty series");
}

void check_ranges(const AxisRanges& r) {
  for (double v : r)
    if (!(v > 0.0)) raise(errc::invalid_argument, "axis ranges must be positive");
}

std::string fmt(double v, const char* f = "%.10g") {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

AxisRanges default_ranges() { return refdata::axis_ranges(); }

std::array<AxisStats, 6> full_scale_error(const std::vector<Wrench>& pred,
                                          const std::vector<Wrench>& ref,
                                          const AxisRanges& ranges) {
  check_pair(pred, ref);
  check_ranges(ranges);
  const std::size_t n = pred.size();
  std::array<AxisStats, 6> out{};
  for (int ax = 0; ax < wrench_axes; ++ax) {
    double sum = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = std::fabs(pred[i][ax] - ref[i][ax]) / ranges[ax] * 100.0;
      sum += e;
      mx = std::max(mx, e);
    }
    double mean = sum / double(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = std::fabs(pred[i][ax] - ref[i][ax]) / ranges[ax] * 100.0 - mean;
      var += e * e;
    }
    out[ax] = {mean, std::sqrt(var / double(n)), mx};
  }
  return out;
}

std::array<double, 6> rmse(const std::vector<Wrench>& pred,
                           const std::vector<Wrench>& ref) {
  check_pair(pred, ref);
  std::array<double, 6> out{};
  for (int ax = 0; ax < wrench_axes; ++ax) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      double e = pred[i][ax] - ref[i][ax];
      acc += e * e;
    }
    out[ax] = std::sqrt(acc / double(pred.size()));
  }
  return out;
}

double nonlinearity_axis(const std::vector<double>& pred,
                         const std::vector<double>& ref, double range) {
  if (!(range > 0.0)) raise(errc::invalid_argument, "axis range must be positive");
  if (pred.size() != ref.size())
    raise(errc::length_mismatch, "pred/ref series differ in length");
  if (pred.size() < 10) raise(errc::insufficient_sweep, "sweep needs >= 10 points");
  bool up = true, down = true;
  for (std::size_t i = 1; i < ref.size(); ++i) {
    if (ref[i] < ref[i - 1]) up = false;
    if (ref[i] > ref[i - 1]) down = false;
  }
  if (!up && !down)
    raise(errc::invalid_argument, "sweep reference must be monotone");

  const std::size_t n = ref.size();
  double rm = 0.0, pm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rm += ref[i];
    pm += pred[i];
  }
  rm /= double(n);
  pm /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (ref[i] - rm) * (ref[i] - rm);
    sxy += (ref[i] - rm) * (pred[i] - pm);
  }
  double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double line = pm + slope * (ref[i] - rm);
    worst = std::max(worst, std::fabs(pred[i] - line));
  }
  return worst / range * 100.0;
}

std::array<double, 6> nonlinearity(const std::vector<Wrench>& pred,
                                   const std::vector<Wrench>& ref,
                                   const AxisRanges& ranges) {
  check_pair(pred, ref);
  check_ranges(ranges);
  std::array<double, 6> out{};
  std::vector<double> p(pred.size()), r(ref.size());
  for (int ax = 0; ax < wrench_axes; ++ax) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      p[i] = pred[i][ax];
      r[i] = ref[i][ax];
    }
    out[ax] = nonlinearity_axis(p, r, ranges[ax]);
  }
  return out;
}

namespace {

// noise off, quantization only when the consumer expects counts
model::SensorModel quiet_model(const model::SensorModel& m,
                               model::Representation repr) {
  model::SensorModel q = m;
  for (auto& c : q.curves) c.noise_std = 0.0;
  q.quantize_output = repr == model::Representation::counts;
  return q;
}

}  // namespace

la::Mat crosstalk(const Predictor& predict, model::Representation repr,
                  const model::SensorModel& m, const AxisRanges& ranges) {
  check_ranges(ranges);
  model::SensorModel quiet = quiet_model(m, repr);
  la::Mat out(6, 6, nan_d);
  for (int load = 0; load < wrench_axes; ++load) {
    Wrench pos, neg;
    pos[load] = ranges[load];
    neg[load] = -ranges[load];
    Wrench rp = predict(model::simulate_frame(quiet, pos, 0.0, 0, 0));
    Wrench rn = predict(model::simulate_frame(quiet, neg, 0.0, 0, 0));
    for (int j = 0; j < wrench_axes; ++j) {
      if (j == load) continue;
      out(load, j) =
          std::max(std::fabs(rp[j]), std::fabs(rn[j])) / ranges[j] * 100.0;
    }
  }
  return out;
}

la::Mat crosstalk(const calib::Calibration& cal, const model::SensorModel& m,
                  const AxisRanges& ranges) {
  return crosstalk([&](const model::SensorFrame& f) { return calib::apply(cal, f); },
                   cal.repr, m, ranges);
}

Resolution resolution(const std::array<double, 6>& noise_std_volts,
                      const calib::Calibration& cal, double lsb_volts) {
  for (double v : noise_std_volts)
    if (!(v >= 0.0)) raise(errc::invalid_argument, "noise std must be >= 0");
  if (!(lsb_volts >= 0.0)) raise(errc::invalid_argument, "lsb must be >= 0");
  Resolution r;
  for (int i = 0; i < wrench_axes; ++i) {
    double sn = 0.0, sq = 0.0;
    for (int j = 0; j < 6; ++j) {
      double c = cal.c(i, j);
      sn += c * c * noise_std_volts[j] * noise_std_volts[j];
      sq += c * c;
    }
    r.noise[i] = std::sqrt(sn);
    r.quantization[i] = lsb_volts * std::sqrt(sq);
  }
  return r;
}

MetricsReport evaluate_predictor(const std::string& name, const Predictor& predict,
                                 model::Representation repr,
                                 const model::Dataset& test,
                                 const model::SensorModel& m,
                                 const AxisRanges& ranges) {
  if (test.size() == 0) raise(errc::invalid_argument, "empty test set");
  if (test.wrench.size() != test.size())
    raise(errc::length_mismatch, "test set wrench/frame count mismatch");
  check_ranges(ranges);

  MetricsReport r;
  r.method = name;
  r.meta = test.meta;

  std::vector<Wrench> pred(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) pred[i] = predict(test.frames[i]);
  r.fse = full_scale_error(pred, test.wrench, ranges);
  r.rms = rmse(pred, test.wrench);

  // symmetric single-axis sweeps for the nonlinearity column
  model::SensorModel quiet = quiet_model(m, repr);
  constexpr int sweep_n = 101;
  std::vector<double> ps(sweep_n), rs(sweep_n);
  for (int ax = 0; ax < wrench_axes; ++ax) {
    for (int k = 0; k < sweep_n; ++k) {
      Wrench w;
      w[ax] = ranges[ax] * (2.0 * k / (sweep_n - 1) - 1.0);
      Wrench p = predict(model::simulate_frame(quiet, w, 0.0, 0, 0));
      ps[k] = p[ax];
      rs[k] = w[ax];
    }
    r.nonlin[ax] = nonlinearity_axis(ps, rs, ranges[ax]);
  }

  r.xtalk = crosstalk(predict, repr, m, ranges);
  return r;
}

MetricsReport evaluate(const calib::Calibration& cal, const model::Dataset& test,
                       const model::SensorModel& m, const AxisRanges& ranges) {
  MetricsReport r = evaluate_predictor(
      cal.method, [&](const model::SensorFrame& f) { return calib::apply(cal, f); },
      cal.repr, test, m, ranges);
  std::array<double, 6> noise{};
  for (int j = 0; j < 6; ++j) noise[j] = m.curves[j].noise_std;
  r.res = resolution(noise, cal);
  return r;
}

ComparisonReport compare_methods(const model::Dataset& train,
                                 const model::Dataset& test,
                                 const std::vector<MethodSpec>& methods,
                                 const model::SensorModel& m,
                                 const AxisRanges& ranges) {
  if (methods.empty()) raise(errc::invalid_argument, "no methods requested");
  ComparisonReport rep;
  rep.improvement_ratio.fill(nan_d);

  for (const MethodSpec& spec : methods) {
    FittedMethod fm;
    fm.spec = spec;
    try {
      if (spec.name == "pinv") {
        fm.linear = calib::calibrate_pseudo_inverse(train);
      } else if (spec.name == "qp") {
        fm.linear = calib::calibrate_qp(
            train, calib::default_constraints(m.map, spec.slack));
      } else if (spec.name == "ridge") {
        fm.poly = calib::calibrate_regularized(train, spec.lambda, spec.degree);
      } else if (spec.name == "mlp") {
        fm.mlp = calib::train_mlp(train, spec.epochs, spec.learning_rate, spec.seed);
      } else {
        raise(errc::unknown_kind, "method '" + spec.name + "'");
      }
      if (fm.linear) {
        fm.metrics = evaluate(*fm.linear, test, m, ranges);
        fm.metrics.method = spec.name;
      } else if (fm.poly) {
        const calib::PolyCalibrator& c = *fm.poly;
        fm.metrics = evaluate_predictor(
            spec.name,
            [&c](const model::SensorFrame& f) { return calib::apply(c, f); },
            c.repr, test, m, ranges);
      } else {
        const calib::MlpCalibrator& c = *fm.mlp;
        fm.metrics = evaluate_predictor(
            spec.name,
            [&c](const model::SensorFrame& f) { return calib::apply(c, f); },
            c.repr, test, m, ranges);
      }
    } catch (const Error& e) {
      raise(e.code(), spec.name + ": " + e.what());
    }
    rep.methods.push_back(std::move(fm));
  }

  const MetricsReport* pinv = nullptr;
  const MetricsReport* qp = nullptr;
  for (const FittedMethod& fm : rep.methods) {
    if (fm.spec.name == "pinv") pinv = &fm.metrics;
    if (fm.spec.name == "qp") qp = &fm.metrics;
  }
  if (pinv && qp)
    for (int ax = 0; ax < wrench_axes; ++ax) {
      double r = pinv->fse[ax].mean / qp->fse[ax].mean;
      rep.improvement_ratio[ax] = std::isnan(r) ? 1.0 : r;
    }
  return rep;
}

namespace {

void write_meta(std::ostream& os, const MetricsReport& r) {
  os << "# method=" << r.method << "\n";
  os << "# dataset_seed=" << r.meta.seed << "\n";
  os << "# dataset_trajectory=" << r.meta.trajectory << "\n";
  os << "# dataset_noise_std=" << fmt(r.meta.noise_std, "%.17g") << "\n";
  os << "# dataset_quantized=" << (r.meta.quantized ? 1 : 0) << "\n";
  os << "# fse_std=population\n";
}

}  // namespace

namespace {

void write_xtalk_grid(std::ostream& os, const la::Mat& x, bool rows_loaded) {
  os << "# crosstalk_pct rows=" << (rows_loaded ? "loaded" : "response") << " axis\n";
  os << (rows_loaded ? "loaded" : "response");
  for (int j = 0; j < wrench_axes; ++j) os << ',' << axis_names[j];
  os << "\n";
  for (int i = 0; i < wrench_axes; ++i) {
    os << axis_names[i];
    for (int j = 0; j < wrench_axes; ++j)
      os << ',' << fmt(rows_loaded ? x(i, j) : x(j, i));
    os << "\n";
  }
}

}  // namespace

void write_metrics_csv(std::ostream& os, const MetricsReport& r) {
  write_meta(os, r);
  os << "axis,fse_mean_pct,fse_std_pct,fse_max_pct,rmse,nonlinearity_pct,"
        "res_noise,res_quant\n";
  for (int ax = 0; ax < wrench_axes; ++ax) {
    os << axis_names[ax] << ',' << fmt(r.fse[ax].mean) << ',' << fmt(r.fse[ax].std)
       << ',' << fmt(r.fse[ax].max) << ',' << fmt(r.rms[ax]) << ','
       << fmt(r.nonlin[ax]) << ',' << fmt(r.res ? r.res->noise[ax] : nan_d) << ','
       << fmt(r.res ? r.res->quantization[ax] : nan_d) << "\n";
  }
  // both orientations, the configured one first
  write_xtalk_grid(os, r.xtalk, r.xtalk_rows_loaded);
  write_xtalk_grid(os, r.xtalk, !r.xtalk_rows_loaded);
}

void write_metrics_text(std::ostream& os, const MetricsReport& r) {
  os << "method " << r.method << " on " << r.meta.trajectory << " data (seed "
     << r.meta.seed << ")\n";
  os << "axis   fse mean%    fse std%    fse max%        rmse     nonlin%\n";
  for (int ax = 0; ax < wrench_axes; ++ax) {
    char line[160];
    std::snprintf(line, sizeof line, "%-4s %11.5f %11.5f %11.5f %11.5g %11.5f\n",
                  axis_names[ax], r.fse[ax].mean, r.fse[ax].std, r.fse[ax].max,
                  r.rms[ax], r.nonlin[ax]);
    os << line;
  }
  os << "crosstalk %FSE (rows = " << (r.xtalk_rows_loaded ? "loaded" : "response")
     << " axis, n/a on diagonal)\n";
  os << "      ";
  for (int j = 0; j < wrench_axes; ++j) {
    char c[16];
    std::snprintf(c, sizeof c, " %9s", axis_names[j]);
    os << c;
  }
  os << "\n";
  for (int i = 0; i < wrench_axes; ++i) {
    os << axis_names[i] << "    ";
    for (int j = 0; j < wrench_axes; ++j) {
      double v = r.xtalk_rows_loaded ? r.xtalk(i, j) : r.xtalk(j, i);
      char c[32];
      if (std::isnan(v))
        std::snprintf(c, sizeof c, " %9s", "n/a");
      else
        std::snprintf(c, sizeof c, " %9.5f", v);
      os << c;
    }
    os << "\n";
  }
  if (r.res) {
    os << "resolution (input units propagated through |C| rows)\n";
    for (int ax = 0; ax < wrench_axes; ++ax) {
      char line[128];
      std::snprintf(line, sizeof line, "%-4s noise %.6g quant %.6g\n",
                    axis_names[ax], r.res->noise[ax], r.res->quantization[ax]);
      os << line;
    }
  }
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& r) {
  os << "# methods=";
  for (std::size_t k = 0; k < r.methods.size(); ++k)
    os << (k ? "," : "") << r.methods[k].spec.name;
  os << "\n";
  os << "axis";
  for (const FittedMethod& fm : r.methods)
    os << ',' << fm.spec.name << "_fse_mean_pct" << ',' << fm.spec.name
       << "_fse_max_pct" << ',' << fm.spec.name << "_nonlin_pct";
  os << ",improvement_pinv_over_qp\n";
  for (int ax = 0; ax < wrench_axes; ++ax) {
    os << axis_names[ax];
    for (const FittedMethod& fm : r.methods)
      os << ',' << fmt(fm.metrics.fse[ax].mean) << ',' << fmt(fm.metrics.fse[ax].max)
         << ',' << fmt(fm.metrics.nonlin[ax]);
    os << ',' << fmt(r.improvement_ratio[ax]) << "\n";
  }
}

void write_comparison_text(std::ostream& os, const ComparisonReport& r) {
  os << "method comparison (FSE mean % / nonlinearity %)\n";
  os << "axis ";
  for (const FittedMethod& fm : r.methods) {
    char c[48];
    std::snprintf(c, sizeof c, " %21s", fm.spec.name.c_str());
    os << c;
  }
  os << "   pinv/qp\n";
  for (int ax = 0; ax < wrench_axes; ++ax) {
    os << axis_names[ax] << "  ";
    for (const FittedMethod& fm : r.methods) {
      char c[64];
      std::snprintf(c, sizeof c, " %10.5f /%9.5f", fm.metrics.fse[ax].mean,
                    fm.metrics.nonlin[ax]);
      os << c;
    }
    char tail[32];
    if (std::isnan(r.improvement_ratio[ax]))
      std::snprintf(tail, sizeof tail, " %9s", "n/a");
    else
      std::snprintf(tail, sizeof tail, " %9.3f", r.improvement_ratio[ax]);
    os << tail << "\n";
  }
}

}  // namespace ft::eval

#include "ft/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <utility>

#include "ft/csvio.hpp"
#include "ft/refdata.hpp"

namespace ft::pipeline {

namespace {

[[noreturn]] void cfg_fail(const std::string& path, int line, const std::string& msg) {
  if (line > 0)
    raise(errc::config_error, path + ":" + std::to_string(line) + ": " + msg);
  raise(errc::config_error, path + ": " + msg);
}

struct Value {
  enum class Kind { number, boolean, string, num_list, str_list } kind;
  double num = 0.0;
  bool b = false;
  std::string str;
  std::vector<double> nums;
  std::vector<std::string> strs;
  int line = 0;
};

struct ParsedFile {
  std::string path;
  std::map<std::string, std::map<std::string, Value>> sections;
  std::map<std::string, int> section_lines;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, const std::string& path, int line) {
  if (s.empty()) cfg_fail(path, line, "empty value");
  char* ep = nullptr;
  double v = std::strtod(s.c_str(), &ep);
  if (ep != s.c_str() + s.size())
    cfg_fail(path, line, "cannot parse '" + s + "' as a number");
  return v;
}

std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

Value parse_value(const std::string& raw, const std::string& path, int line) {
  Value v;
  v.line = line;
  if (raw.empty()) cfg_fail(path, line, "missing value");
  if (raw.front() == '[') {
    if (raw.back() != ']') cfg_fail(path, line, "unterminated list");
    std::string inner = trim(raw.substr(1, raw.size() - 2));
    if (inner.empty()) {
      v.kind = Value::Kind::num_list;
      return v;
    }
    std::vector<std::string> parts = split_top(inner);
    if (parts.front().size() >= 1 && parts.front().front() == '"') {
      v.kind = Value::Kind::str_list;
      for (const std::string& p : parts) {
        if (p.size() < 2 || p.front() != '"' || p.back() != '"')
          cfg_fail(path, line, "list mixes strings and non-strings");
        v.strs.push_back(p.substr(1, p.size() - 2));
      }
    } else {
      v.kind = Value::Kind::num_list;
      for (const std::string& p : parts) v.nums.push_back(parse_number(p, path, line));
    }
    return v;
  }
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      cfg_fail(path, line, "unterminated string");
    v.kind = Value::Kind::string;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::Kind::boolean;
    v.b = raw == "true";
    return v;
  }
  v.kind = Value::Kind::number;
  v.num = parse_number(raw, path, line);
  return v;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

ParsedFile parse_config_file(const std::string& path) {
  ParsedFile pf;
  pf.path = path;
  std::string text = read_text_file(path);

  std::string section;
  int line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string raw = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();

    // drop comments outside quotes
    bool quoted = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        raw.resize(i);
        break;
      }
    }
    std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') cfg_fail(path, line, "unterminated section header");
      std::string name = trim(s.substr(1, s.size() - 2));
      if (!valid_name(name)) cfg_fail(path, line, "bad section name");
      if (pf.sections.count(name)) cfg_fail(path, line, "duplicate section [" + name + "]");
      pf.sections[name];
      pf.section_lines[name] = line;
      section = name;
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) cfg_fail(path, line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (!valid_name(key)) cfg_fail(path, line, "bad key name");
    if (section.empty()) cfg_fail(path, line, "key outside any section");
    if (pf.sections[section].count(key))
      cfg_fail(path, line, "duplicate key '" + key + "'");
    pf.sections[section][key] = parse_value(trim(s.substr(eq + 1)), path, line);
  }
  return pf;
}

struct Reader {
  ParsedFile pf;

  std::optional<Value> take(const std::string& sec, const std::string& key) {
    auto s = pf.sections.find(sec);
    if (s == pf.sections.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    Value v = std::move(k->second);
    s->second.erase(k);
    return v;
  }

  std::optional<double> number(const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::number)
      cfg_fail(pf.path, v->line, "'" + key + "' expects a number");
    return v->num;
  }

  std::optional<bool> boolean(const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::boolean)
      cfg_fail(pf.path, v->line, "'" + key + "' expects true or false");
    return v->b;
  }

  std::optional<std::string> str(const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::string)
      cfg_fail(pf.path, v->line, "'" + key + "' expects a quoted string");
    return v->str;
  }

  std::optional<std::vector<double>> numbers(const std::string& sec,
                                             const std::string& key, std::size_t n,
                                             int* line_out = nullptr) {
    auto v = take(sec, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::num_list)
      cfg_fail(pf.path, v->line, "'" + key + "' expects a list of numbers");
    if (v->nums.size() != n)
      cfg_fail(pf.path, v->line,
               "'" + key + "' expects " + std::to_string(n) + " values");
    if (line_out) *line_out = v->line;
    return v->nums;
  }

  std::optional<std::vector<std::string>> strings(const std::string& sec,
                                                  const std::string& key,
                                                  int* line_out = nullptr) {
    auto v = take(sec, key);
    if (!v) return std::nullopt;
    if (v->kind == Value::Kind::num_list && v->nums.empty()) return std::vector<std::string>{};
    if (v->kind != Value::Kind::str_list)
      cfg_fail(pf.path, v->line, "'" + key + "' expects a list of strings");
    if (line_out) *line_out = v->line;
    return v->strs;
  }

  std::optional<uint64_t> uinteger(const std::string& sec, const std::string& key) {
    auto s = pf.sections.find(sec);
    int line = 0;
    if (s != pf.sections.end()) {
      auto k = s->second.find(key);
      if (k != s->second.end()) line = k->second.line;
    }
    auto v = number(sec, key);
    if (!v) return std::nullopt;
    if (!(*v >= 0.0) || std::floor(*v) != *v || *v > 9.007199254740992e15)
      cfg_fail(pf.path, line, "'" + key + "' expects a non-negative integer");
    return uint64_t(*v);
  }

  void finish(std::initializer_list<const char*> known) {
    for (const auto& [name, keys] : pf.sections) {
      bool ok = false;
      for (const char* k : known)
        if (name == k) ok = true;
      if (!ok) cfg_fail(pf.path, pf.section_lines[name], "unknown section [" + name + "]");
      if (!keys.empty())
        cfg_fail(pf.path, keys.begin()->second.line,
                 "unknown key '" + keys.begin()->first + "' in [" + name + "]");
    }
  }
};

void read_curve_keys(Reader& r, const std::string& sec,
                     model::PhotocouplerCurve& c) {
  if (auto v = r.number(sec, "operating_point")) c.operating_point = *v;
  if (auto v = r.number(sec, "gain")) c.gain = *v;
  if (auto v = r.number(sec, "bias")) c.bias = *v;
  if (auto v = r.number(sec, "range_lo")) c.range_lo = *v;
  if (auto v = r.number(sec, "range_hi")) c.range_hi = *v;
  if (auto v = r.number(sec, "noise_std")) c.noise_std = *v;
  if (auto v = r.number(sec, "cubic")) c.cubic = *v;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  ranges = eval::default_ranges();
  trajectory.kind = model::TrajectoryKind::mixed;
  trajectory.duration = 4.0;
  trajectory.rate = 1000.0;
  for (int ax = 0; ax < wrench_axes; ++ax)
    trajectory.amplitudes[ax] = 0.3 * ranges[ax];
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

model::SensorModel ExperimentConfig::make_model() const {
  model::SensorModel m = compliance == "default" ? model::default_model()
                                                 : load_model_config(compliance);
  for (auto& c : m.curves) {
    if (curve.operating_point) c.operating_point = *curve.operating_point;
    if (curve.gain) c.gain = *curve.gain;
    if (curve.bias) c.bias = *curve.bias;
    if (curve.range_lo) c.range_lo = *curve.range_lo;
    if (curve.range_hi) c.range_hi = *curve.range_hi;
    if (curve.noise_std) c.noise_std = *curve.noise_std;
    if (curve.cubic) c.cubic = *curve.cubic;
    model::validate_curve(c);
  }
  m.quantize_output = adc;
  return m;
}

std::vector<eval::MethodSpec> ExperimentConfig::method_specs() const {
  std::vector<eval::MethodSpec> out;
  for (const std::string& name : methods) {
    eval::MethodSpec s;
    s.name = name;
    s.slack = slack;
    s.lambda = lambda;
    s.degree = degree;
    s.epochs = epochs;
    s.learning_rate = learning_rate;
    s.seed = seed;
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  Reader r{parse_config_file(path)};
  ExperimentConfig cfg;
  const std::string& p = r.pf.path;

  if (auto v = r.str("model", "compliance")) cfg.compliance = *v;
  if (auto v = r.number("model", "operating_point")) cfg.curve.operating_point = *v;
  if (auto v = r.number("model", "gain")) cfg.curve.gain = *v;
  if (auto v = r.number("model", "bias")) cfg.curve.bias = *v;
  if (auto v = r.number("model", "range_lo")) cfg.curve.range_lo = *v;
  if (auto v = r.number("model", "range_hi")) cfg.curve.range_hi = *v;
  if (auto v = r.number("model", "noise_std")) cfg.curve.noise_std = *v;
  if (auto v = r.number("model", "cubic")) cfg.curve.cubic = *v;
  if (auto v = r.boolean("model", "adc")) cfg.adc = *v;

  if (auto v = r.str("trajectory", "kind")) {
    try {
      cfg.trajectory.kind = model::trajectory_kind_from(*v);
    } catch (const Error&) {
      cfg_fail(p, 0, "unknown trajectory kind '" + *v + "'");
    }
  }
  if (auto v = r.number("trajectory", "duration")) cfg.trajectory.duration = *v;
  if (auto v = r.number("trajectory", "rate")) cfg.trajectory.rate = *v;
  if (auto v = r.number("trajectory", "frequency")) cfg.trajectory.frequency = *v;
  bool amps_set = false;
  if (auto v = r.numbers("trajectory", "amplitudes", 6)) {
    for (int ax = 0; ax < wrench_axes; ++ax) cfg.trajectory.amplitudes[ax] = (*v)[ax];
    amps_set = true;
  }
  if (auto v = r.uinteger("trajectory", "seed")) cfg.seed = *v;
  if (auto v = r.uinteger("trajectory", "axes_mask")) {
    if (*v > 0x3f) cfg_fail(p, 0, "axes_mask must be in [0, 63]");
    cfg.trajectory.axes_mask = uint32_t(*v);
  }
  if (auto v = r.numbers("trajectory", "remove_direction", 6)) {
    std::array<double, 6> d{};
    for (int ax = 0; ax < wrench_axes; ++ax) d[ax] = (*v)[ax];
    cfg.trajectory.remove_direction = d;
  }

  int methods_line = 0;
  if (auto v = r.strings("calibration", "methods", &methods_line)) {
    if (v->empty()) cfg_fail(p, methods_line, "'methods' must not be empty");
    for (const std::string& name : *v)
      if (name != "pinv" && name != "qp" && name != "ridge" && name != "mlp")
        cfg_fail(p, methods_line, "unknown method '" + name + "'");
    cfg.methods = *v;
  }
  if (auto v = r.number("calibration", "slack")) {
    if (!(*v >= 0.0)) cfg_fail(p, 0, "'slack' must be >= 0");
    cfg.slack = *v;
  }
  if (auto v = r.number("calibration", "lambda")) {
    if (!(*v >= 0.0)) cfg_fail(p, 0, "'lambda' must be >= 0");
    cfg.lambda = *v;
  }
  if (auto v = r.number("calibration", "degree")) {
    if (*v != 1.0 && *v != 2.0) cfg_fail(p, 0, "'degree' must be 1 or 2");
    cfg.degree = int(*v);
  }
  if (auto v = r.uinteger("calibration", "epochs")) cfg.epochs = int(*v);
  if (auto v = r.number("calibration", "learning_rate")) {
    if (!(*v > 0.0)) cfg_fail(p, 0, "'learning_rate' must be > 0");
    cfg.learning_rate = *v;
  }

  int ranges_line = 0;
  if (auto v = r.numbers("evaluation", "ranges", 6, &ranges_line)) {
    for (int ax = 0; ax < wrench_axes; ++ax) {
      if (!((*v)[ax] > 0.0)) cfg_fail(p, ranges_line, "ranges must be positive");
      cfg.ranges[ax] = (*v)[ax];
    }
    if (!amps_set)
      for (int ax = 0; ax < wrench_axes; ++ax)
        cfg.trajectory.amplitudes[ax] = 0.3 * cfg.ranges[ax];
  }
  if (auto v = r.str("evaluation", "crosstalk_orientation")) {
    if (*v == "loaded-rows")
      cfg.xtalk_rows_loaded = true;
    else if (*v == "response-rows")
      cfg.xtalk_rows_loaded = false;
    else
      cfg_fail(p, 0, "crosstalk_orientation must be loaded-rows or response-rows");
  }
  if (auto v = r.number("evaluation", "theta")) {
    if (!(*v > 0.0 && *v < 1.0)) cfg_fail(p, 0, "'theta' must be in (0, 1)");
    cfg.theta = *v;
  }

  r.finish({"model", "trajectory", "calibration", "evaluation"});

  if (!(cfg.trajectory.duration > 0.0)) cfg_fail(p, 0, "'duration' must be > 0");
  if (!(cfg.trajectory.rate > 0.0)) cfg_fail(p, 0, "'rate' must be > 0");
  return cfg;
}

model::SensorModel load_model_config(const std::string& path) {
  Reader r{parse_config_file(path)};
  const std::string& p = r.pf.path;

  la::Mat ratios = refdata::fem_displacement_ratios();
  const char* row_keys[6] = {"row_fx", "row_fy", "row_fz", "row_mx", "row_my", "row_mz"};
  for (int i = 0; i < 6; ++i)
    if (auto v = r.numbers("compliance", row_keys[i], 6))
      for (int j = 0; j < 6; ++j) ratios(i, j) = (*v)[j];

  std::array<double, 6> ranges = refdata::axis_ranges();
  if (auto v = r.numbers("compliance", "ranges", 6)) {
    for (int i = 0; i < 6; ++i) {
      if (!((*v)[i] > 0.0)) cfg_fail(p, 0, "ranges must be positive");
      ranges[i] = (*v)[i];
    }
  }
  std::array<double, 6> scale{};
  if (auto v = r.numbers("compliance", "scale", 6)) {
    for (int i = 0; i < 6; ++i) scale[i] = (*v)[i];
  } else {
    scale = model::displacement_scales(ratios, ranges);
  }

  model::SensorModel m;
  m.map = model::compliance_from_table(ratios, scale);
  m.curves.fill(model::PhotocouplerCurve{});
  if (auto v = r.number("noise", "std")) {
    if (!(*v >= 0.0)) cfg_fail(p, 0, "noise std must be >= 0");
    for (auto& c : m.curves) c.noise_std = *v;
  }
  for (int i = 0; i < 6; ++i)
    read_curve_keys(r, "curve" + std::to_string(i + 1), m.curves[i]);
  if (auto v = r.boolean("adc", "enabled")) m.quantize_output = *v;

  r.finish({"compliance", "curve1", "curve2", "curve3", "curve4", "curve5", "curve6",
            "noise", "adc"});
  for (const auto& c : m.curves) model::validate_curve(c);
  return m;
}

}  // namespace ft::pipeline

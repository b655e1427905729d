#include "ft/csvio.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace ft::pipeline {

namespace {

constexpr const char* dataset_header = "t,s1,s2,s3,s4,s5,s6,fx,fy,fz,mx,my,mz";

std::string loc(const std::string& path, int line) {
  return path + ":" + std::to_string(line);
}

std::string loc(const std::string& path, int line, int field) {
  return loc(path, line) + ": field " + std::to_string(field);
}

void append_g17(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

// one CSV number; *p sits on the first character of the field
double take_number(const char*& p, const char* end, const std::string& path,
                   int line, int field) {
  if (p >= end || *p == '\n' || *p == '\r' || *p == ',')
    raise(errc::parse_error, loc(path, line, field) + ": empty value");
  char* ep = nullptr;
  double v = std::strtod(p, &ep);
  if (ep == p) raise(errc::parse_error, loc(path, line, field) + ": not a number");
  p = ep;
  return v;
}

void take_separator(const char*& p, const char* end, const std::string& path,
                    int line, int field) {
  if (p < end && *p == ',') {
    ++p;
    return;
  }
  raise(errc::parse_error, loc(path, line, field) + ": expected ','");
}

void take_line_end(const char*& p, const char* end, const std::string& path,
                   int line) {
  if (p < end && *p == '\r') ++p;
  if (p < end) {
    if (*p != '\n')
      raise(errc::parse_error, loc(path, line) + ": trailing characters");
    ++p;
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) raise(errc::io_error, "cannot open " + path);
  std::string out;
  char buf[1 << 16];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, got);
  bool bad = std::ferror(f);
  std::fclose(f);
  if (bad) raise(errc::io_error, "cannot read " + path);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) raise(errc::io_error, "cannot open " + path + " for writing");
  std::size_t put = std::fwrite(content.data(), 1, content.size(), f);
  bool bad = put != content.size() || std::fclose(f) != 0;
  if (bad) raise(errc::io_error, "cannot write " + path);
}

void save_dataset(const model::Dataset& data, const std::string& path) {
  if (data.wrench.size() != data.frames.size())
    raise(errc::length_mismatch, "dataset wrench/frame count mismatch");
  std::string out;
  out.reserve(64 * data.size() + 64);
  out += dataset_header;
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    append_g17(out, data.frames[i].t);
    for (int j = 0; j < 6; ++j) {
      out += ',';
      append_g17(out, data.frames[i].s[j]);
    }
    for (int j = 0; j < 6; ++j) {
      out += ',';
      append_g17(out, data.wrench[i][j]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

model::Dataset load_dataset(const std::string& path, model::Representation expected) {
  std::string text = read_text_file(path);
  const char* p = text.data();
  const char* end = p + text.size();

  const char* nl = static_cast<const char*>(std::memchr(p, '\n', std::size_t(end - p)));
  std::string header(p, nl ? nl : end);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != dataset_header)
    raise(errc::header_mismatch,
          loc(path, 1) + ": expected header '" + dataset_header + "'");
  p = nl ? nl + 1 : end;

  model::Dataset ds;
  int line = 2;
  const bool counts = expected == model::Representation::counts;
  while (p < end) {
    if (*p == '\n' && p + 1 == end) break;  // single trailing blank line
    double vals[13];
    for (int f = 0; f < 13; ++f) {
      vals[f] = take_number(p, end, path, line, f + 1);
      if (f < 12) take_separator(p, end, path, line, f + 2);
    }
    take_line_end(p, end, path, line);

    model::SensorFrame fr;
    fr.t = vals[0];
    fr.repr = expected;
    if (!std::isfinite(fr.t))
      raise(errc::parse_error, loc(path, line, 1) + ": non-finite time");
    if (!ds.frames.empty() && !(fr.t > ds.frames.back().t))
      raise(errc::parse_error,
            loc(path, line, 1) + ": timestamps must increase strictly");
    for (int j = 0; j < 6; ++j) {
      double v = vals[1 + j];
      if (counts) {
        if (!(v >= 0.0 && v <= 65535.0) || std::floor(v) != v)
          raise(errc::parse_error,
                loc(path, line, 2 + j) + ": expected an ADC count in [0, 65535]");
      } else if (!(v >= -1e-9 && v <= 3.3 + 1e-9)) {
        raise(errc::parse_error,
              loc(path, line, 2 + j) + ": expected a voltage in [0, 3.3]");
      }
      fr.s[j] = v;
    }
    Wrench w;
    for (int j = 0; j < 6; ++j) {
      double v = vals[7 + j];
      if (!std::isfinite(v))
        raise(errc::parse_error, loc(path, line, 8 + j) + ": non-finite wrench");
      w[j] = v;
    }
    ds.frames.push_back(fr);
    ds.wrench.push_back(w);
    ++line;
  }
  ds.meta.quantized = counts;
  return ds;
}

namespace {

void append_list(std::string& out, const double* v, int n) {
  for (int j = 0; j < n; ++j) {
    if (j) out += ',';
    append_g17(out, v[j]);
  }
  out += '\n';
}

struct HeaderKv {
  std::string key, value;
};

// "# key=value" lines followed by data rows; returns data start pointer
std::vector<HeaderKv> take_headers(const char*& p, const char* end, int& line) {
  std::vector<HeaderKv> kv;
  while (p < end && *p == '#') {
    const char* nl = static_cast<const char*>(
        std::memchr(p, '\n', std::size_t(end - p)));
    std::string s(p + 1, nl ? nl : end);
    if (!s.empty() && s.back() == '\r') s.pop_back();
    std::size_t b = s.find_first_not_of(' ');
    std::size_t eq = s.find('=');
    if (b != std::string::npos && eq != std::string::npos && eq > b)
      kv.push_back({s.substr(b, eq - b), s.substr(eq + 1)});
    p = nl ? nl + 1 : end;
    ++line;
  }
  return kv;
}

la::Vec take_row(const char*& p, const char* end, int n, const std::string& path,
                 int& line) {
  la::Vec row(n);
  for (int f = 0; f < n; ++f) {
    row[f] = take_number(p, end, path, line, f + 1);
    if (f < n - 1) take_separator(p, end, path, line, f + 2);
  }
  take_line_end(p, end, path, line);
  ++line;
  return row;
}

std::array<double, 6> parse_six(const std::string& s, const std::string& path) {
  std::array<double, 6> out{};
  const char* p = s.data();
  const char* end = p + s.size();
  for (int f = 0; f < 6; ++f) {
    out[f] = take_number(p, end, path, 0, f + 1);
    if (f < 5) take_separator(p, end, path, 0, f + 2);
  }
  return out;
}

}  // namespace

void save_calibration(const calib::Calibration& c, const std::string& path) {
  std::string out;
  out += "# representation=";
  out += model::representation_name(c.repr);
  out += '\n';
  out += "# method=" + c.method + '\n';
  out += "# slack=";
  append_g17(out, c.slack);
  out += '\n';
  out += "# flags=" + std::to_string(c.flags) + '\n';
  const char* names[4] = {"kkt_stationarity", "kkt_feasibility",
                          "kkt_dual_feasibility", "kkt_complementarity"};
  for (int part = 0; part < 4; ++part) {
    out += "# ";
    out += names[part];
    out += '=';
    for (int ax = 0; ax < 6; ++ax) {
      if (ax) out += ',';
      const qp::Kkt& k = c.kkt[ax];
      double v = part == 0   ? k.stationarity
                 : part == 1 ? k.feasibility
                 : part == 2 ? k.dual_feasibility
                             : k.complementarity;
      append_g17(out, v);
    }
    out += '\n';
  }
  for (int i = 0; i < 6; ++i) append_list(out, c.c.row(i), 6);
  append_list(out, c.offset.data(), 6);
  write_text_file(path, out);
}

calib::Calibration load_calibration(const std::string& path) {
  std::string text = read_text_file(path);
  const char* p = text.data();
  const char* end = p + text.size();
  int line = 1;

  calib::Calibration c;
  c.method = "unknown";
  for (const HeaderKv& kv : take_headers(p, end, line)) {
    if (kv.key == "representation") {
      if (kv.value == "volts")
        c.repr = model::Representation::volts;
      else if (kv.value == "counts")
        c.repr = model::Representation::counts;
      else
        raise(errc::parse_error, path + ": unknown representation '" + kv.value + "'");
    } else if (kv.key == "method") {
      c.method = kv.value;
    } else if (kv.key == "slack") {
      c.slack = std::strtod(kv.value.c_str(), nullptr);
    } else if (kv.key == "flags") {
      c.flags = Flags(std::strtoul(kv.value.c_str(), nullptr, 10));
    } else if (kv.key == "kkt_stationarity" || kv.key == "kkt_feasibility" ||
               kv.key == "kkt_dual_feasibility" || kv.key == "kkt_complementarity") {
      std::array<double, 6> v = parse_six(kv.value, path);
      for (int ax = 0; ax < 6; ++ax) {
        if (kv.key == "kkt_stationarity") c.kkt[ax].stationarity = v[ax];
        if (kv.key == "kkt_feasibility") c.kkt[ax].feasibility = v[ax];
        if (kv.key == "kkt_dual_feasibility") c.kkt[ax].dual_feasibility = v[ax];
        if (kv.key == "kkt_complementarity") c.kkt[ax].complementarity = v[ax];
      }
    }
    // unknown header keys are ignored: the matrix block is what matters
  }
  for (int i = 0; i < 6; ++i) {
    la::Vec row = take_row(p, end, 6, path, line);
    for (int j = 0; j < 6; ++j) c.c(i, j) = row[j];
  }
  la::Vec off = take_row(p, end, 6, path, line);
  for (int j = 0; j < 6; ++j) c.offset[j] = off[j];
  return c;
}

la::Mat load_matrix(const std::string& path) {
  std::string text = read_text_file(path);
  const char* p = text.data();
  const char* end = p + text.size();
  int line = 1;
  la::Mat m(6, 6);
  int got = 0;
  while (p < end && got < 6) {
    if (*p == '#') {
      const char* nl = static_cast<const char*>(
          std::memchr(p, '\n', std::size_t(end - p)));
      p = nl ? nl + 1 : end;
      ++line;
      continue;
    }
    if (*p == '\n' || *p == '\r') {
      take_line_end(p, end, path, line);
      ++line;
      continue;
    }
    la::Vec row = take_row(p, end, 6, path, line);
    for (int j = 0; j < 6; ++j) m(got, j) = row[j];
    ++got;
  }
  if (got < 6)
    raise(errc::parse_error, path + ": expected 6 matrix rows, found " +
                                 std::to_string(got));
  return m;
}

void save_poly(const calib::PolyCalibrator& c, const std::string& path) {
  std::string out;
  out += "# representation=";
  out += model::representation_name(c.repr);
  out += '\n';
  out += "# degree=" + std::to_string(c.degree) + '\n';
  out += "# lambda=";
  append_g17(out, c.lambda);
  out += '\n';
  out += "# flags=" + std::to_string(c.flags) + '\n';
  for (int i = 0; i < 6; ++i) append_list(out, c.coef.row(i), c.coef.cols);
  append_list(out, c.offset.data(), 6);
  write_text_file(path, out);
}

void save_mlp(const calib::MlpCalibrator& c, const std::string& path) {
  std::string out;
  out += "# representation=";
  out += model::representation_name(c.repr);
  out += '\n';
  out += "# layers=6,12,6\n";
  out += "# epochs=" +
         std::to_string(c.train_loss.empty() ? 0 : c.train_loss.size() - 1) + '\n';
  if (!c.val_loss.empty()) {
    out += "# final_val_loss=";
    append_g17(out, c.val_loss.back());
    out += '\n';
  }
  out += "# rows: in_mean, in_std, out_mean, out_std, 12x w1, b1, 6x w2, b2\n";
  append_list(out, c.in_mean.data(), 6);
  append_list(out, c.in_std.data(), 6);
  append_list(out, c.out_mean.data(), 6);
  append_list(out, c.out_std.data(), 6);
  for (int i = 0; i < 12; ++i) append_list(out, c.params.w1.row(i), 6);
  append_list(out, c.params.b1.data(), 12);
  for (int i = 0; i < 6; ++i) append_list(out, c.params.w2.row(i), 12);
  append_list(out, c.params.b2.data(), 6);
  write_text_file(path, out);
}

}  // namespace ft::pipeline

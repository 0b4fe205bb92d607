#pragma once

// Sweep tables as CSV and deterministic SVG views of modes and sweeps.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flightstab/analysis.hpp"
#include "flightstab/errors.hpp"
#include "flightstab/modes.hpp"
#include "flightstab/sweep.hpp"

namespace flightstab {

inline constexpr const char* kCsvHeader =
    "param,value,mode_label,re_lambda,im_lambda,zeta,omega_n,period,t_eq";

// One CSV line. A failed sweep point is a single record labelled "error" with
// NaN in every numeric column after value.
struct CsvRecord {
  std::string param;
  double value = 0.0;
  std::string mode_label;
  double re_lambda = 0.0;
  double im_lambda = 0.0;
  double zeta = 0.0;
  double omega_n = 0.0;
  double period = 0.0;  // NaN for non-oscillatory modes
  double t_eq = 0.0;

  // Bitwise equality of the numeric fields, so NaN == NaN.
  friend bool operator==(const CsvRecord& a, const CsvRecord& b) {
    auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
    return a.param == b.param && a.mode_label == b.mode_label && same(a.value, b.value) &&
           same(a.re_lambda, b.re_lambda) && same(a.im_lambda, b.im_lambda) &&
           same(a.zeta, b.zeta) && same(a.omega_n, b.omega_n) && same(a.period, b.period) &&
           same(a.t_eq, b.t_eq);
  }
};

inline std::vector<CsvRecord> csv_records(const SweepResult& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<CsvRecord> out;
  for (const auto& row : r.rows) {
    if (row.error) {
      out.push_back({to_string(r.parameter), row.value, "error", nan, nan, nan, nan, nan, nan});
      continue;
    }
    for (const auto& m : row.modes.all())
      out.push_back({to_string(r.parameter), row.value, to_string(m.label), m.eigenvalue.real(),
                     m.eigenvalue.imag(), m.damping_ratio, m.natural_frequency,
                     m.period.value_or(nan), m.time_to_equilibrium});
  }
  return out;
}

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline double csv_parse_number(const std::string& s, int line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (!s.empty() && *b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ParseError(line, "not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string emit_csv(const std::vector<CsvRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\r\n";
  for (const auto& r : records) {
    out += detail::csv_field(r.param) + ',' + detail::csv_number(r.value) + ',' +
           detail::csv_field(r.mode_label);
    for (double v : {r.re_lambda, r.im_lambda, r.zeta, r.omega_n, r.period, r.t_eq})
      out += ',' + detail::csv_number(v);
    out += "\r\n";
  }
  return out;
}

inline std::string emit_csv(const SweepResult& r) { return emit_csv(csv_records(r)); }

// RFC-4180 rows: quoted fields may contain commas, doubled quotes and line
// breaks. Returns rows together with the line number each row starts on.
inline std::vector<std::pair<int, std::vector<std::string>>> read_csv_rows(std::istream& in) {
  std::vector<std::pair<int, std::vector<std::string>>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  int line = 1, row_line = 1;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.emplace_back(row_line, row);
    row.clear();
    row_line = line;
  };
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      ++line;
      end_row();
    } else if (c == '\n') {
      ++line;
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ParseError(line, "unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::vector<CsvRecord> read_csv(std::istream& in) {
  const auto rows = read_csv_rows(in);
  if (rows.empty()) throw ParseError(1, "missing header");
  std::string header;
  for (std::size_t i = 0; i < rows[0].second.size(); ++i)
    header += (i ? "," : "") + rows[0].second[i];
  if (header != kCsvHeader) throw ParseError(rows[0].first, "unexpected header '" + header + "'");
  std::vector<CsvRecord> out;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& [line, f] = rows[k];
    if (f.size() != 9)
      throw ParseError(line, "expected 9 fields, got " + std::to_string(f.size()));
    CsvRecord r;
    r.param = f[0];
    r.value = detail::csv_parse_number(f[1], line);
    r.mode_label = f[2];
    double* dst[] = {&r.re_lambda, &r.im_lambda, &r.zeta, &r.omega_n, &r.period, &r.t_eq};
    for (int i = 0; i < 6; ++i) *dst[i] = detail::csv_parse_number(f[3 + i], line);
    out.push_back(r);
  }
  return out;
}

inline std::vector<CsvRecord> read_csv(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

// ---------------------------------------------------------------- SVG

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

struct Frame {
  double x0, x1, y0, y1;
  double width = 640, height = 480, margin = 60;

  double px(double x) const { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); }
  double py(double y) const { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); }
};

inline void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double w = std::max(1.0, std::abs(lo)) * 0.5;
    lo -= w;
    hi += w;
    return;
  }
  const double w = 0.08 * (hi - lo);
  lo -= w;
  hi += w;
}

inline std::string svg_open(const Frame& f, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", f.width) +
                  "\" height=\"" + fmt("%.0f", f.height) + "\" viewBox=\"0 0 " +
                  fmt("%.0f", f.width) + " " + fmt("%.0f", f.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", f.width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       xml_escape(title) + "</text>\n";
  return s;
}

inline std::string svg_frame(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<rect x=\"" + fmt("%.1f", f.margin) + "\" y=\"" + fmt("%.1f", f.margin) + "\" width=\"" +
       fmt("%.1f", f.width - 2 * f.margin) + "\" height=\"" + fmt("%.1f", f.height - 2 * f.margin) +
       "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + fmt("%.1f", f.px(xv)) + "\" y=\"" + fmt("%.1f", f.height - f.margin + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + fmt("%.4g", xv) +
         "</text>\n";
    s += "<text x=\"" + fmt("%.1f", f.margin - 4) + "\" y=\"" + fmt("%.1f", f.py(yv) + 3) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt("%.4g", yv) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt("%.1f", f.width / 2) + "\" y=\"" + fmt("%.1f", f.height - 16) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(xlabel) +
       "</text>\n";
  s += "<text x=\"16\" y=\"" + fmt("%.1f", f.height / 2) + "\" transform=\"rotate(-90 16 " +
       fmt("%.1f", f.height / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       xml_escape(ylabel) + "</text>\n";
  return s;
}

}  // namespace detail

// One marker per mode; conjugate partners are not drawn.
inline std::string emit_svg_splane(const std::vector<EigenMode>& modes) {
  using detail::fmt;
  if (modes.empty()) throw InputError("s-plane plot needs at least one mode");
  double xlo = 0.0, xhi = 0.0, yhi = 0.0;
  for (const auto& m : modes) {
    xlo = std::min(xlo, m.eigenvalue.real());
    xhi = std::max(xhi, m.eigenvalue.real());
    yhi = std::max(yhi, std::abs(m.eigenvalue.imag()));
  }
  double ylo = 0.0;
  detail::pad_range(xlo, xhi);
  if (yhi == 0.0) yhi = 0.5 * (xhi - xlo);
  ylo = -0.1 * yhi;
  yhi *= 1.15;
  detail::Frame f{xlo, xhi, ylo, yhi};

  std::string s = detail::svg_open(f, "Stability modes on the s-plane");
  s += detail::svg_frame(f, "Re(lambda) [1/s]", "Im(lambda) [rad/s]");
  s += "<line x1=\"" + fmt("%.1f", f.margin) + "\" y1=\"" + fmt("%.1f", f.py(0)) + "\" x2=\"" +
       fmt("%.1f", f.width - f.margin) + "\" y2=\"" + fmt("%.1f", f.py(0)) + "\" stroke=\"black\"/>\n";
  if (xlo < 0.0 && xhi > 0.0)
    s += "<line x1=\"" + fmt("%.1f", f.px(0)) + "\" y1=\"" + fmt("%.1f", f.margin) + "\" x2=\"" +
         fmt("%.1f", f.px(0)) + "\" y2=\"" + fmt("%.1f", f.height - f.margin) + "\" stroke=\"black\"/>\n";
  for (const auto& m : modes) {
    const double x = f.px(m.eigenvalue.real());
    const double y = f.py(std::abs(m.eigenvalue.imag()));
    s += "<circle class=\"mode\" cx=\"" + fmt("%.2f", x) + "\" cy=\"" + fmt("%.2f", y) +
         "\" r=\"5\" fill=\"" + (m.stable() ? "#1f77b4" : "#d62728") + "\"/>\n";
    s += "<text x=\"" + fmt("%.2f", x + 7) + "\" y=\"" + fmt("%.2f", y - 7) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::xml_escape(to_string(m.label)) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

struct SweepCurve {
  std::string kind;  // "logistic" or "linear"
  std::optional<LogisticFit> logistic;
  std::optional<LinearFit> linear;

  double operator()(double x) const { return logistic ? logistic_eval(*logistic, x) : (*linear)(x); }
};

// Logistic for density/altitude/velocity, straight line for mass and bank.
inline std::optional<SweepCurve> fit_sweep_series(SweepParameter p,
                                                  const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::pair<double, double>> finite;
  for (const auto& q : pts)
    if (std::isfinite(q.second)) finite.push_back(q);
  try {
    SweepCurve c;
    if (p == SweepParameter::Mass || p == SweepParameter::BankAngle) {
      c.kind = "linear";
      c.linear = fit_linear(finite);
    } else {
      c.kind = "logistic";
      c.logistic = fit_logistic(finite);
    }
    return c;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Short-period and Dutch-roll t_eq against the swept parameter, with fitted curves.
inline std::string emit_svg_sweep(const SweepResult& r) {
  using detail::fmt;
  const ModeLabel labels[] = {ModeLabel::ShortPeriod, ModeLabel::DutchRoll};
  const char* colors[] = {"#1f77b4", "#d62728"};
  std::vector<std::pair<double, double>> series[2];
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (int k = 0; k < 2; ++k) {
    for (const auto& q : mode_series(r, labels[k])) {
      if (!std::isfinite(q.second)) continue;
      series[k].push_back(q);
      xlo = std::min(xlo, q.first), xhi = std::max(xhi, q.first);
      ylo = std::min(ylo, q.second), yhi = std::max(yhi, q.second);
    }
  }
  if (!std::isfinite(xlo)) xlo = xhi = ylo = yhi = 0.0;
  const double data_x0 = xlo, data_x1 = xhi;
  detail::pad_range(xlo, xhi);
  detail::pad_range(ylo, yhi);
  detail::Frame f{xlo, xhi, ylo, yhi};
  const std::string name = to_string(r.parameter);
  std::string s = detail::svg_open(f, "Time to equilibrium against " + name);
  s += detail::svg_frame(f, name, "t_eq [s]");
  for (int k = 0; k < 2; ++k) {
    if (series[k].size() >= 2 && data_x1 > data_x0) {
      if (const auto c = fit_sweep_series(r.parameter, series[k])) {
        std::string path;
        for (int i = 0; i <= 100; ++i) {
          const double x = data_x0 + (data_x1 - data_x0) * i / 100.0;
          double y;
          try {
            y = (*c)(x);
          } catch (const NumericalError&) {
            continue;
          }
          if (!std::isfinite(y)) continue;
          y = std::clamp(y, f.y0, f.y1);
          path += (path.empty() ? "" : " ") + fmt("%.2f", f.px(x)) + "," + fmt("%.2f", f.py(y));
        }
        s += "<polyline class=\"fit\" data-kind=\"" + c->kind + "\" points=\"" + path +
             "\" fill=\"none\" stroke=\"" + colors[k] + "\" stroke-dasharray=\"4 3\"/>\n";
      }
    }
    for (const auto& [x, y] : series[k])
      s += "<circle class=\"point\" cx=\"" + fmt("%.2f", f.px(x)) + "\" cy=\"" + fmt("%.2f", f.py(y)) +
           "\" r=\"3.5\" fill=\"" + colors[k] + "\"/>\n";
    s += "<text x=\"" + fmt("%.1f", f.width - f.margin - 110) + "\" y=\"" +
         fmt("%.1f", f.margin + 16 + 16 * k) + "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" +
         colors[k] + "\">" + to_string(labels[k]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace flightstab

#pragma once

// Command-line front end. Exit status: 0 success, 1 input error, 2 numerical
// failure.

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "flightstab/analysis.hpp"
#include "flightstab/errors.hpp"
#include "flightstab/geometry.hpp"
#include "flightstab/modes.hpp"
#include "flightstab/report.hpp"
#include "flightstab/sweep.hpp"
#include "flightstab/trim.hpp"

namespace flightstab::cli {

struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;
};

struct RunConfig {
  std::string command;
  std::string aircraft;
  FlightCondition condition;
  std::string parameter = "density";
  std::optional<SweepRange> range;
  double epsilon = kDefaultEpsilon;
  std::string out_dir = ".";
  std::string input;  // fit: CSV path
};

inline SweepRange parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  if (parts.size() != 3) throw InputError("--range expects a:b:n, got '" + text + "'");
  SweepRange r;
  try {
    std::size_t used = 0;
    r.start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("a");
    r.stop = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("b");
    r.steps = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::logic_error&) {
    throw InputError("--range expects a:b:n, got '" + text + "'");
  }
  if (r.steps < 1) throw InputError("--range step count must be at least 1");
  return r;
}

// Grid used when --range is absent.
inline SweepRange default_range(SweepParameter p) {
  switch (p) {
    case SweepParameter::Density: return {isa::min_density(), isa::kSeaLevelDensity, 12};
    case SweepParameter::Altitude: return {0.0, isa::kTropopause, 12};
    case SweepParameter::Velocity: return {120.0, 250.0, 14};
    case SweepParameter::Mass: return {66000.0, 79000.0, 14};
    case SweepParameter::BankAngle: return {0.0, 60.0, 13};
  }
  return {};
}

namespace detail {

inline std::string num(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return std::filesystem::path(cfg.out_dir) / name;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw InputError("cannot write '" + path.string() + "'");
}

inline AircraftModel load_aircraft(const RunConfig& cfg) {
  if (cfg.aircraft.empty()) throw InputError("--aircraft is required");
  return parse_aircraft_file(read_file(cfg.aircraft));
}

}  // namespace detail

inline std::string mode_table(const ClassifiedModes& m) {
  std::string s = "axis          mode            re_lambda      im_lambda      zeta        omega_n     period      t_eq\n";
  auto line = [&](const char* axis, const EigenMode& e) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-13s %-15s %-14.6g %-14.6g %-11.5g %-11.5g %-11s %.6g\n", axis,
                  to_string(e.label).c_str(), e.eigenvalue.real(), e.eigenvalue.imag(),
                  e.damping_ratio, e.natural_frequency,
                  e.period ? detail::num("%.5g", *e.period).c_str() : "-", e.time_to_equilibrium);
    s += buf;
  };
  for (const auto& e : m.longitudinal) line("longitudinal", e);
  for (const auto& e : m.lateral) line("lateral", e);
  for (const auto& d : m.diagnostics) s += "note: " + d + "\n";
  return s;
}

inline int cmd_modes(const RunConfig& cfg, std::ostream& out) {
  const auto a = analyze(detail::load_aircraft(cfg), cfg.condition, cfg.epsilon);
  out << mode_table(a.modes);
  return 0;
}

inline int cmd_splane(const RunConfig& cfg, std::ostream& out) {
  const auto a = analyze(detail::load_aircraft(cfg), cfg.condition, cfg.epsilon);
  const auto path = detail::output_path(cfg, "splane.svg");
  detail::write_file(path, emit_svg_splane(a.modes.all()));
  out << mode_table(a.modes) << "wrote " << path.string() << "\n";
  return 0;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = detail::load_aircraft(cfg);
  SweepSpec spec;
  spec.parameter = sweep_parameter_from_string(cfg.parameter);
  const auto range = cfg.range.value_or(default_range(spec.parameter));
  spec.start = range.start;
  spec.stop = range.stop;
  spec.steps = range.steps;
  spec.base = cfg.condition;
  spec.epsilon = cfg.epsilon;
  const auto result = run_sweep(model, spec);

  const std::string name = to_string(spec.parameter);
  int failures = 0;
  for (const auto& row : result.rows) {
    out << name << " = " << detail::num("%.6g", row.value);
    if (row.turn) out << " (" << to_string(*row.turn) << " turn)";
    out << "\n";
    if (row.error) {
      ++failures;
      err << "point " << name << " = " << detail::num("%.6g", row.value) << " failed: " << *row.error << "\n";
      out << "failed: " << *row.error << "\n";
      continue;
    }
    out << mode_table(row.modes);
  }
  for (auto label : {ModeLabel::ShortPeriod, ModeLabel::DutchRoll}) {
    if (const auto c = fit_sweep_series(spec.parameter, mode_series(result, label))) {
      out << to_string(label) << " " << c->kind << " fit:";
      if (c->logistic)
        out << " N0=" << detail::num("%.6g", c->logistic->n0) << " r=" << detail::num("%.6g", c->logistic->r)
            << " K=" << detail::num("%.6g", c->logistic->k) << " R2=" << detail::num("%.6f", c->logistic->r_squared);
      else
        out << " slope=" << detail::num("%.6g", c->linear->slope)
            << " intercept=" << detail::num("%.6g", c->linear->intercept)
            << " R2=" << detail::num("%.6f", c->linear->r_squared);
      out << "\n";
    }
  }
  const auto csv = detail::output_path(cfg, "sweep_" + name + ".csv");
  const auto svg = detail::output_path(cfg, "sweep_" + name + ".svg");
  detail::write_file(csv, emit_csv(result));
  detail::write_file(svg, emit_svg_sweep(result));
  out << "wrote " << csv.string() << "\nwrote " << svg.string() << "\n";
  return failures == static_cast<int>(result.rows.size()) ? 2 : 0;
}

// (x, y) series grouped by name. A sweep CSV is grouped by mode_label; any
// other CSV must have a header and two numeric columns.
inline std::map<std::string, std::vector<Point>> read_fit_input(const std::string& text) {
  std::map<std::string, std::vector<Point>> groups;
  if (text.rfind(kCsvHeader, 0) == 0) {
    for (const auto& r : read_csv(text)) {
      if (r.mode_label == "error" || !std::isfinite(r.t_eq)) continue;
      groups[r.mode_label].emplace_back(r.value, r.t_eq);
    }
    return groups;
  }
  std::istringstream in(text);
  const auto rows = read_csv_rows(in);
  if (rows.empty()) throw ParseError(1, "missing header");
  if (rows[0].second.size() != 2) throw ParseError(rows[0].first, "expected two columns");
  const std::string name = rows[0].second[1];
  auto& g = groups[name];
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& [line, f] = rows[k];
    if (f.size() != 2) throw ParseError(line, "expected two fields");
    g.emplace_back(flightstab::detail::csv_parse_number(f[0], line),
                   flightstab::detail::csv_parse_number(f[1], line));
  }
  return groups;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const auto groups = read_fit_input(detail::read_file(cfg.input));
  if (groups.empty()) throw InputError("no data to fit");
  std::string report;
  for (const auto& [name, pts] : groups) {
    report += name + " (" + std::to_string(pts.size()) + " points)\n";
    try {
      const auto lf = fit_linear(pts);
      report += "  linear   slope=" + detail::num("%.10g", lf.slope) +
                " intercept=" + detail::num("%.10g", lf.intercept) +
                " R2=" + detail::num("%.10g", lf.r_squared) + "\n";
    } catch (const std::exception& e) {
      report += std::string("  linear   failed: ") + e.what() + "\n";
    }
    try {
      const auto g = fit_logistic(pts);
      report += "  logistic N0=" + detail::num("%.10g", g.n0) + " r=" + detail::num("%.10g", g.r) +
                " K=" + detail::num("%.10g", g.k) + " R2=" + detail::num("%.10g", g.r_squared) +
                (g.converged ? "" : " (not converged)") + "\n";
    } catch (const std::exception& e) {
      report += std::string("  logistic failed: ") + e.what() + "\n";
    }
  }
  out << report;
  if (cfg.out_dir != ".") {
    const auto path = detail::output_path(cfg, "fit_report.txt");
    detail::write_file(path, report);
    out << "wrote " << path.string() << "\n";
  }
  return 0;
}

namespace detail {

// Real part of the eigenvector for the eigenvalue closest to lambda, scaled
// so its largest component is 1.
inline Eigen::VectorXd modal_shape(const Eigen::MatrixXd& a, Complex lambda) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i] - lambda) < std::abs(es.eigenvalues()[best] - lambda)) best = i;
  Eigen::VectorXcd v = es.eigenvectors().col(best);
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  v /= v[k];
  return v.real();
}

}  // namespace detail

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto a = analyze(detail::load_aircraft(cfg), cfg.condition, cfg.epsilon);
  struct Case {
    const char* axis;
    ModeLabel label;
    const Eigen::Matrix4d* matrix;
    const char* columns;
  };
  const Case cases[] = {
      {"longitudinal", ModeLabel::ShortPeriod, &a.linear.longitudinal, "t,u,w,q,theta"},
      {"lateral", ModeLabel::DutchRoll, &a.linear.lateral, "t,v,p,r,phi"},
  };
  std::string report;
  for (const auto& c : cases) {
    const auto* mode = a.modes.find(c.label);
    if (!mode || !mode->period) {
      report += to_string(c.label) + ": mode not present\n";
      continue;
    }
    const Eigen::MatrixXd A = *c.matrix;
    const Eigen::VectorXd x0 = detail::modal_shape(A, mode->eigenvalue);
    const double dt = std::min(0.01, max_stable_step(A));
    const double horizon = std::isfinite(mode->time_to_equilibrium)
                               ? std::max(1.5 * mode->time_to_equilibrium, 4.0 * *mode->period)
                               : 6.0 * *mode->period;
    const auto tr = simulate_linear(A, x0, dt, horizon);
    std::string csv = std::string(c.columns) + "\r\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
      csv += flightstab::detail::csv_number(tr.time[i]);
      for (int k = 0; k < 4; ++k) csv += "," + flightstab::detail::csv_number(tr.states[i][k]);
      csv += "\r\n";
    }
    const auto path = detail::output_path(cfg, std::string("simulate_") + c.axis + ".csv");
    detail::write_file(path, csv);
    out << "wrote " << path.string() << "\n";

    Eigen::Index channel = 0;
    x0.cwiseAbs().maxCoeff(&channel);
    report += to_string(c.label) + " (" + c.axis + ", channel " + std::to_string(channel) + ")\n";
    try {
      const auto d = log_decrement(tr, static_cast<int>(channel), cfg.epsilon);
      report += "  decrement=" + detail::num("%.6g", d.decrement) + " period=" + detail::num("%.6g", d.period) +
                " cycles=" + std::to_string(d.cycles) + " t_eq=" + detail::num("%.6g", d.time_to_equilibrium) +
                (d.unstable ? " (growing)" : "") + "\n";
    } catch (const NumericalError& e) {
      report += std::string("  decrement unavailable: ") + e.what() + "\n";
    }
    report += "  eigenvalue t_eq=" + detail::num("%.6g", mode->time_to_equilibrium) + "\n";
  }
  const auto path = detail::output_path(cfg, "decrement.txt");
  detail::write_file(path, report);
  out << report << "wrote " << path.string() << "\n";
  return 0;
}

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aircraft stability modes from a vortex-lattice model", "flightstab"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::optional<double> mass;
  std::string range;

  auto common = [&](CLI::App* sub, bool sweep_flags) {
    sub->add_option("--aircraft", cfg.aircraft, "aircraft definition file")->check(CLI::ExistingFile);
    sub->add_option("--alt", cfg.condition.altitude, "altitude [m]");
    sub->add_option("--speed", cfg.condition.speed, "true airspeed [m/s]");
    sub->add_option("--bank", cfg.condition.bank_deg, "bank angle [deg]");
    sub->add_option("--mass", mass, "mass override [kg]");
    sub->add_option("--eps", cfg.epsilon, "settling fraction in (0, 1)");
    sub->add_option("--out", cfg.out_dir, "output directory");
    if (sweep_flags) {
      sub->add_option("--param", cfg.parameter, "density|altitude|velocity|mass|bank");
      sub->add_option("--range", range, "start:stop:steps");
    }
  };
  auto* modes = app.add_subcommand("modes", "print the labelled mode table");
  common(modes, false);
  auto* sweep = app.add_subcommand("sweep", "sweep one parameter, write CSV and SVG");
  common(sweep, true);
  auto* fit = app.add_subcommand("fit", "fit logistic and linear models to a CSV");
  fit->add_option("csv", cfg.input, "sweep CSV or two-column CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--eps", cfg.epsilon, "unused, accepted for symmetry");
  fit->add_option("--out", cfg.out_dir, "output directory");
  auto* simulate = app.add_subcommand("simulate", "simulate modal responses, write trajectory CSV");
  common(simulate, false);
  auto* splane = app.add_subcommand("splane", "write the s-plane SVG");
  common(splane, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, x;
    const int code = app.exit(e, o, x);
    out << o.str();
    err << x.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (mass) cfg.condition.mass = *mass;
    if (!range.empty()) cfg.range = parse_range(range);
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw InputError("--eps must lie in (0, 1)");
    if (*modes) return cmd_modes(cfg, out);
    if (*sweep) return cmd_sweep(cfg, out, err);
    if (*fit) return cmd_fit(cfg, out);
    if (*simulate) return cmd_simulate(cfg, out);
    if (*splane) return cmd_splane(cfg, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

inline int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, out, err);
}

}  // namespace flightstab::cli

// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <sys/wait.h>

#include "flightstab/analysis.hpp"
#include "flightstab/report.hpp"
#include "flightstab/sweep.hpp"

using namespace flightstab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const AircraftModel& transport() {
  static const AircraftModel m = parse_aircraft_file(slurp(FLIGHTSTAB_DATA_DIR "/transport.aircraft"));
  return m;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  return a;
}

std::vector<Complex> companion_roots(const Polynomial& p) {
  const int n = p.degree();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) c(i, n - 1) = -p[i] / p.leading();
  Eigen::EigenSolver<Eigen::MatrixXd> es(c);
  return {es.eigenvalues().begin(), es.eigenvalues().end()};
}

double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  double worst = 0.0;
  for (const auto& z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](const Complex& x, const Complex& y) {
      return std::abs(x - z) < std::abs(y - z);
    });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

Outcome eigen_oracle() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> sig(0.05, 3.0), om(0.1, 4.0), coin(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
    for (int b = 0; b < 4; b += 2) {
      if (coin(rng) < 0.5) {
        const double s = sig(rng), w = om(rng);
        d(b, b) = d(b + 1, b + 1) = -s;
        d(b, b + 1) = w;
        d(b + 1, b) = -w;
      } else {
        d(b, b) = -sig(rng);
        d(b + 1, b + 1) = -sig(rng);
      }
    }
    const Eigen::MatrixXd p = random_matrix(rng, 4, -1, 1) + 2.0 * Eigen::MatrixXd::Identity(4, 4);
    const auto poly = char_poly(p * d * p.inverse());
    worst = std::max(worst, multiset_distance(poly_roots(poly), companion_roots(poly)));
  }
  Outcome o;
  o.check(worst < 1e-8, "max root distance " + fmt("%.2e", worst) + " over 100 matrices (< 1e-8)");
  return o;
}

Outcome two_by_two_exact() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(-10000, 10000);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a1 = u(rng), a2 = u(rng), b1 = u(rng), b2 = u(rng);
    Eigen::MatrixXd a(2, 2);
    a << a1, a2, b1, b2;
    const auto p = char_poly(a);
    if (!(p[2] == 1.0 && p[1] == -(a1 + b2) && p[0] == a1 * b2 - a2 * b1)) ++mismatches;
  }
  Outcome o;
  o.check(mismatches == 0, std::to_string(mismatches) + " of 1000 integer matrices inexact");
  return o;
}

AircraftModel rectangular_wing(double ar, int nc, int ns) {
  AircraftModel m;
  m.name = "rect";
  m.sref = ar;
  m.cref = 1.0;
  m.bref = ar;
  m.moment_reference = Vec3(0.25, 0, 0);
  LiftingSurface s;
  s.name = "wing";
  s.chordwise_panels = nc;
  s.spanwise_panels = ns;
  s.mirror = true;
  s.sections = {{Vec3(0, 0, 0), 1.0, 0.0}, {Vec3(0, ar / 2, 0), 1.0, 0.0}};
  m.surfaces = {s};
  return m;
}

AircraftModel elliptic_wing(double ar) {
  const double semi = 5.0, root = 8.0 * semi / (std::numbers::pi * ar);
  AircraftModel m;
  m.name = "ellipse";
  LiftingSurface s;
  s.name = "wing";
  s.chordwise_panels = 4;
  s.spanwise_panels = 60;
  s.mirror = true;
  double area = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double th = std::numbers::pi / 2 * k / 40;
    const double y = semi * std::sin(th), c = std::max(root * std::cos(th), 1e-3 * root);
    s.sections.push_back({Vec3(-0.25 * c, y, 0), c, 0.0});
    if (k > 0) area += 0.5 * (s.sections[k - 1].chord + c) * (y - s.sections[k - 1].leading_edge.y());
  }
  m.surfaces = {s};
  m.sref = 2 * area;
  m.bref = 2 * semi;
  m.cref = m.sref / m.bref;
  return m;
}

AeroState at_alpha(double alpha) {
  AeroState st;
  st.speed = 50.0;
  st.alpha = alpha;
  return st;
}

Outcome lifting_line() {
  const double alpha = 5.0 * std::numbers::pi / 180.0;
  Outcome o;
  const double slope = aero_coefficients(build_lattice(rectangular_wing(10, 4, 10)), at_alpha(alpha)).cl / alpha;
  const double target = 2 * std::numbers::pi / (1 + 2.0 / 10.0);
  const double err = slope / target - 1.0;
  o.check(std::abs(err) <= 0.05, "AR-10 slope " + fmt("%.4f", slope) + " vs " + fmt("%.4f", target) +
                                     " (" + fmt("%+.2f", 100 * err) + "%, limit 5%)");

  const auto em = elliptic_wing(8.0);
  const auto c = aero_coefficients(build_lattice(em), at_alpha(4.0 * std::numbers::pi / 180.0));
  const double e = c.cl * c.cl / (std::numbers::pi * (em.bref * em.bref / em.sref) * c.cdi);
  o.check(std::abs(e - 1.0) <= 0.05, "elliptic e " + fmt("%.4f", e));

  const double c1 = aero_coefficients(build_lattice(rectangular_wing(10, 4, 10)), at_alpha(alpha)).cl;
  const double c2 = aero_coefficients(build_lattice(rectangular_wing(10, 8, 20)), at_alpha(alpha)).cl;
  const double change = std::abs(c2 - c1) / std::abs(c2);
  o.check(change <= 0.02, "CL change under doubling " + fmt("%.2f", 100 * change) + "%");
  return o;
}

using State8 = Eigen::Matrix<double, 8, 1>;
constexpr int kLon[4] = {0, 2, 4, 7};  // u, w, q, theta
constexpr int kLat[4] = {1, 3, 5, 6};  // v, p, r, phi

State8 residual8(const TrimState& t, const DimensionalDerivatives& d, const State8& x, const State8& xd) {
  auto pert = [](const State8& s) {
    PerturbationState p;
    p.u = s[0], p.v = s[1], p.w = s[2], p.p = s[3], p.q = s[4], p.r = s[5], p.phi = s[6], p.theta = s[7];
    return p;
  };
  const auto r6 = eom_residual(t, pert(x), pert(xd), aero_forces(d, pert(x)));
  const auto r2 = kinematic_residual(t, pert(x), pert(xd));
  State8 r;
  for (int k = 0; k < 6; ++k) r[k] = r6[k];
  r[6] = r2[0];
  r[7] = r2[1];
  return r;
}

// The residual is affine in the rates; solving it gives the nonlinear state derivative.
State8 rates(const TrimState& t, const DimensionalDerivatives& d, const State8& x) {
  const auto r0 = residual8(t, d, x, State8::Zero());
  Eigen::Matrix<double, 8, 8> m;
  for (int j = 0; j < 8; ++j) m.col(j) = residual8(t, d, x, State8::Unit(j)) - r0;
  return m.partialPivLu().solve(-r0);
}

Eigen::Matrix<double, 8, 8> fd_jacobian(const TrimState& t, const DimensionalDerivatives& d) {
  Eigen::Matrix<double, 8, 8> j;
  for (int k = 0; k < 8; ++k)
    j.col(k) = (rates(t, d, 1e-4 * State8::Unit(k)) - rates(t, d, -1e-4 * State8::Unit(k))) / 2e-4;
  return j;
}

Eigen::Matrix<double, 8, 8> embed(const LinearModel& lm) {
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      a(kLon[r], kLon[c]) = lm.longitudinal(r, c);
      a(kLat[r], kLat[c]) = lm.lateral(r, c);
    }
  return a;
}

// Blocks are compared with the finite-difference Jacobian in level flight and
// in a 30 deg turn. The remainder ratio uses full 8-state perturbations about
// level trims, where the two 4x4 models are the complete linearization.
Outcome linearization() {
  Outcome o;
  double worst = 0.0, cross = 0.0;
  double ratio_lo = 1e300, ratio_hi = -1e300;
  struct Case {
    double altitude, speed, bank;
  };
  for (const auto& cs : {Case{0, 220, 0}, Case{8000, 200, 0}, Case{0, 220, 30}}) {
    FlightCondition fc;
    fc.altitude = cs.altitude;
    fc.speed = cs.speed;
    fc.bank_deg = cs.bank;
    const auto an = analyze(transport(), fc);
    const auto& t = an.trim.state;
    const auto& d = an.dimensional;
    const auto j = fd_jacobian(t, d);
    const auto a = embed(an.linear);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        const bool same_axis = (std::find(kLon, kLon + 4, r) != kLon + 4) ==
                               (std::find(kLon, kLon + 4, c) != kLon + 4);
        if (same_axis)
          worst = std::max(worst, std::abs(a(r, c) - j(r, c)) / (std::abs(j(r, c)) + 1e-4));
        else
          cross = std::max(cross, std::abs(j(r, c)));
      }
    if (cs.bank != 0.0) continue;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      State8 x;
      for (int k = 0; k < 8; ++k) x[k] = n(rng);
      x.segment(0, 3) *= 5.0;
      x.segment(3, 3) *= 0.05;
      x.segment(6, 2) *= 0.1;
      auto rem = [&](double eps) { return residual8(t, d, eps * x, a * (eps * x)).head<6>().norm(); };
      const double ratio = rem(1e-2) / rem(5e-3);
      ratio_lo = std::min(ratio_lo, ratio);
      ratio_hi = std::max(ratio_hi, ratio);
    }
  }
  o.check(worst <= 1e-6, "max block entry mismatch " + fmt("%.2e", worst) + " relative");
  o.check(ratio_lo >= 3.8 && ratio_hi <= 4.2,
          "level-trim remainder ratio in [" + fmt("%.4f", ratio_lo) + ", " + fmt("%.4f", ratio_hi) + "]");
  o.detail += "; info: largest cross-axis Jacobian entry in the turn " + fmt("%.3g", cross);
  return o;
}

Outcome decrement() {
  Outcome o;
  for (double zeta : {0.05, 0.1, 0.3}) {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, -4.0, -4.0 * zeta;
    const double wd = 2.0 * std::sqrt(1 - zeta * zeta), period = 2 * std::numbers::pi / wd;
    const auto tr = simulate_linear(a, Eigen::Vector2d(1, 0), 0.5 * max_stable_step(a), 6.5 * period);
    const auto est = log_decrement(tr, 0);
    const double exact = 2 * std::numbers::pi * zeta / std::sqrt(1 - zeta * zeta);
    o.check(std::abs(est.decrement - exact) <= 1e-3,
            "zeta " + fmt("%.2f", zeta) + ": delta err " + fmt("%.1e", est.decrement - exact));
    const auto m = eigenmodes(a)[0];
    o.check(std::abs(est.time_to_equilibrium - m.time_to_equilibrium) < period,
            "t_eq " + fmt("%.3f", est.time_to_equilibrium) + " vs " + fmt("%.3f", m.time_to_equilibrium));
  }
  return o;
}

Outcome logistic_recovery() {
  struct Set {
    double n0, r, k, t0, t1;
  };
  Outcome o;
  for (const auto& s : {Set{180.0, 6.0e-3, 7.10, 100, 250}, Set{52.0, 8.0e-3, 6.5, 100, 250},
                        Set{20.0, -0.269, -6.29, 0, 10}}) {
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) {
      const double t = s.t0 + (s.t1 - s.t0) * i / 29.0;
      pts.emplace_back(t, logistic_eval(LogisticFit{s.n0, s.r, s.k}, t));
    }
    const auto f = fit_logistic(pts);
    const double err = std::max({std::abs(f.n0 / s.n0 - 1), std::abs(f.r / s.r - 1), std::abs(f.k / s.k - 1)});
    o.check(err <= 1e-3, "(" + fmt("%g", s.n0) + ", " + fmt("%g", s.r) + ", " + fmt("%g", s.k) +
                             ") max rel err " + fmt("%.1e", err));
  }
  return o;
}

Outcome linear_exact() {
  struct Line {
    double slope, intercept, x0, x1;
  };
  Outcome o;
  const double eps = std::numeric_limits<double>::epsilon();
  for (const auto& l : {Line{2.051e-4, 39.28, 45000, 79000}, Line{2.184e-4, 11.16, 45000, 79000},
                        Line{-1.089e-1, 57.25, 0, 60}, Line{-1.829e-2, 27.78, 0, 60}}) {
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) {
      const double x = l.x0 + (l.x1 - l.x0) * i / 11.0;
      pts.emplace_back(x, l.slope * x + l.intercept);
    }
    const auto f = fit_linear(pts);
    const double es = std::abs(f.slope / l.slope - 1) / eps, ei = std::abs(f.intercept / l.intercept - 1) / eps;
    o.check(es <= 16 && ei <= 16, fmt("%g", l.slope) + "/" + fmt("%g", l.intercept) + ": " +
                                      fmt("%.0f", es) + " and " + fmt("%.0f", ei) + " ulp");
  }
  return o;
}

SweepResult sweep(SweepParameter p, double a, double b, int n, double eps = kDefaultEpsilon) {
  SweepSpec s;
  s.parameter = p;
  s.start = a;
  s.stop = b;
  s.steps = n;
  s.epsilon = eps;
  return run_sweep(transport(), s);
}

bool strictly(const std::vector<Point>& pts, bool increasing) {
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (increasing ? !(pts[i].second > pts[i - 1].second) : !(pts[i].second < pts[i - 1].second)) return false;
  return true;
}

Outcome density_trend() {
  Outcome o;
  std::string info;
  for (double eps : {0.05, 0.01, 0.001}) {
    const auto r = sweep(SweepParameter::Density, isa::min_density(), isa::kSeaLevelDensity, 12, eps);
    for (auto label : {ModeLabel::ShortPeriod, ModeLabel::DutchRoll}) {
      const auto pts = mode_series(r, label);
      o.check(pts.size() == 12 && strictly(pts, false),
              to_string(label) + " decreasing at eps " + fmt("%g", eps));
      if (eps == kDefaultEpsilon) {
        const auto f = fit_logistic(pts);
        o.check(f.r_squared > 0.95, to_string(label) + " logistic R2 " + fmt("%.4f", f.r_squared));
        std::vector<Point> envelope;
        for (const auto& row : r.rows)
          if (const auto* m = row.modes.find(label)) envelope.emplace_back(row.value, m->envelope_time);
        info += "; info: " + to_string(label) + " envelope-time logistic R2 " +
                fmt("%.4f", fit_logistic(envelope).r_squared);
      }
    }
  }
  o.detail += info;
  return o;
}

Outcome mass_trend() {
  Outcome o;
  const auto r = sweep(SweepParameter::Mass, 66000, 79000, 14);
  for (auto label : {ModeLabel::ShortPeriod, ModeLabel::DutchRoll}) {
    const auto pts = mode_series(r, label);
    const auto f = fit_linear(pts);
    o.check(pts.size() == 14 && strictly(pts, true), to_string(label) + " increasing over 66-79 t");
    o.check(f.r_squared > 0.99, to_string(label) + " linear R2 " + fmt("%.4f", f.r_squared));
  }
  // Wider range, reported only: the Dutch-roll cycle count steps once below 66 t.
  const auto wide = mode_series(sweep(SweepParameter::Mass, 45000, 79000, 18), ModeLabel::DutchRoll);
  o.detail += "; info: DutchRoll R2 over 45-79 t " + fmt("%.4f", fit_linear(wide).r_squared);
  return o;
}

Outcome taxonomy() {
  const auto m = analyze(transport(), FlightCondition{}).modes;
  Outcome o;
  const auto* sp = m.find(ModeLabel::ShortPeriod);
  const auto* ph = m.find(ModeLabel::Phugoid);
  const auto* dr = m.find(ModeLabel::DutchRoll);
  const auto* rs = m.find(ModeLabel::RollSubsidence);
  const auto* sl = m.find(ModeLabel::Spiral);
  o.check(m.diagnostics.empty() && sp && ph && dr && rs && sl, "five labelled modes");
  if (!o.pass) return o;
  o.check(sp->oscillatory() && ph->oscillatory() && sp->stable() && ph->stable(),
          "two stable longitudinal pairs");
  o.check(sp->natural_frequency > ph->natural_frequency,
          "wn " + fmt("%.4g", sp->natural_frequency) + " > " + fmt("%.4g", ph->natural_frequency));
  o.check(dr->oscillatory() && !rs->oscillatory() && !sl->oscillatory() &&
              std::abs(rs->eigenvalue.real()) > std::abs(sl->eigenvalue.real()),
          "lateral pair + fast real " + fmt("%.4g", rs->eigenvalue.real()) + " + slow real " +
              fmt("%.4g", sl->eigenvalue.real()));
  return o;
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "flightstab_acceptance";
  fs::remove_all(base);
  const std::string bin = FLIGHTSTAB_CLI_PATH;
  const std::string aircraft = FLIGHTSTAB_DATA_DIR "/transport.aircraft";
  Outcome o;
  for (int k : {0, 1}) {
    const auto dir = base / std::to_string(k);
    for (const std::string cmd : {"sweep --param density --range 0.5:1.225:4", "sweep --param bank --range 0:50:3", "splane"}) {
      const std::string line = bin + " " + cmd + " --aircraft " + aircraft + " --out " + dir.string() +
                               " >/dev/null 2>&1";
      const int s = std::system(line.c_str());
      if (!WIFEXITED(s) || WEXITSTATUS(s) != 0) o.check(false, "command failed: " + cmd);
    }
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(base / "0")) {
    const auto other = base / "1" / e.path().filename();
    o.check(fs::exists(other) && slurp(e.path()) == slurp(other), e.path().filename().string() + " identical");
    ++files;
  }
  o.check(files == 5, std::to_string(files) + " artifacts compared");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "eigen oracle equivalence", 5, eigen_oracle},
      {2, "2x2 characteristic polynomial exactness", 1, two_by_two_exact},
      {3, "lifting-line agreement", 30, lifting_line},
      {4, "linearization consistency", 10, linearization},
      {5, "decrement formula", 5, decrement},
      {6, "logistic fit recovery", 5, logistic_recovery},
      {7, "linear fit exactness", 1, linear_exact},
      {8, "density trend", 60, density_trend},
      {9, "mass trend", 60, mass_trend},
      {10, "mode taxonomy", 10, taxonomy},
      {11, "determinism", 1e300, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s < 1e300) o.check(secs < c.budget_s, fmt("%.2f s", secs) + " < " + fmt("%g s", c.budget_s));
    else o.detail += "; " + fmt("%.2f s", secs);
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed;
}

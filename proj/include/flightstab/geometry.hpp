#pragma once

// Aircraft definition: lifting surfaces, reference quantities and mass
// properties, plus the line-oriented text format they are stored in.
//
//   # leading comment lines are kept as the model description
//   AIRCRAFT <name>
//   REFERENCE Sref cref bref xref yref zref
//   MASS m Ix Iy Iz Ixz xcg ycg zcg
//   SURFACE <name> Nchord Nspan mirror
//     SECTION xle yle zle chord incidence_deg
//
// Geometry axes follow the usual lattice convention: x aft, y right, z up.

#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "flightstab/errors.hpp"

namespace flightstab {

using Vec3 = Eigen::Vector3d;

struct SurfaceSection {
  Vec3 leading_edge = Vec3::Zero();
  double chord = 1.0;
  double incidence_deg = 0.0;

  bool operator==(const SurfaceSection&) const = default;
};

struct LiftingSurface {
  std::string name;
  std::vector<SurfaceSection> sections;
  int chordwise_panels = 1;
  int spanwise_panels = 1;
  bool mirror = false;

  bool operator==(const LiftingSurface&) const = default;
};

struct MassProperties {
  double mass = 1.0;
  double ix = 1.0;
  double iy = 1.0;
  double iz = 1.0;
  double ixz = 0.0;
  Vec3 cg = Vec3::Zero();

  bool operator==(const MassProperties&) const = default;
};

struct AircraftModel {
  std::string name;
  std::vector<std::string> description;  // leading comment lines, without '#'
  std::vector<LiftingSurface> surfaces;
  double sref = 1.0;
  double cref = 1.0;
  double bref = 1.0;
  Vec3 moment_reference = Vec3::Zero();
  MassProperties mass_properties;

  bool operator==(const AircraftModel&) const = default;
};

struct Violation {
  std::string path;
  std::string message;
};

// Unit vector along which a surface's sections advance, projected on the
// y-z plane. Zero when the first and last section share a y-z position.
inline Vec3 span_axis(const LiftingSurface& surface) {
  if (surface.sections.size() < 2) return Vec3::Zero();
  Vec3 d = surface.sections.back().leading_edge - surface.sections.front().leading_edge;
  d.x() = 0.0;
  const double n = d.norm();
  return n > 0.0 ? Vec3(d / n) : Vec3(Vec3::Zero());
}

// Spanwise station of every section along span_axis, relative to the first.
inline std::vector<double> span_stations(const LiftingSurface& surface) {
  const Vec3 axis = span_axis(surface);
  std::vector<double> s;
  s.reserve(surface.sections.size());
  for (const auto& sec : surface.sections)
    s.push_back((sec.leading_edge - surface.sections.front().leading_edge).dot(axis));
  return s;
}

inline std::vector<Violation> validate(const AircraftModel& model) {
  std::vector<Violation> out;
  auto bad = [&](std::string path, std::string msg) {
    out.push_back({std::move(path), std::move(msg)});
  };
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };

  if (!positive(model.sref)) bad("reference.sref", "must be > 0");
  if (!positive(model.cref)) bad("reference.cref", "must be > 0");
  if (!positive(model.bref)) bad("reference.bref", "must be > 0");
  if (!model.moment_reference.allFinite()) bad("reference.moment_reference", "must be finite");

  const auto& mp = model.mass_properties;
  if (!positive(mp.mass)) bad("mass.m", "must be > 0");
  if (!positive(mp.ix)) bad("mass.Ix", "must be > 0");
  if (!positive(mp.iy)) bad("mass.Iy", "must be > 0");
  if (!positive(mp.iz)) bad("mass.Iz", "must be > 0");
  if (!std::isfinite(mp.ixz)) bad("mass.Ixz", "must be finite");
  if (!mp.cg.allFinite()) bad("mass.cg", "must be finite");
  if (positive(mp.ix) && positive(mp.iz) && std::isfinite(mp.ixz) &&
      !(mp.ix * mp.iz - mp.ixz * mp.ixz > 0.0))
    bad("mass", "inertia not positive-definite");

  if (model.surfaces.empty()) bad("surfaces", "no lifting surfaces");
  for (const auto& s : model.surfaces) {
    const std::string base = "surface[" + s.name + "]";
    if (s.name.empty()) bad(base + ".name", "must not be empty");
    if (s.chordwise_panels < 1) bad(base + ".Nchord", "must be >= 1");
    if (s.spanwise_panels < 1) bad(base + ".Nspan", "must be >= 1");
    if (s.sections.size() < 2) {
      bad(base + ".sections", "needs at least 2 sections");
      continue;
    }
    for (std::size_t i = 0; i < s.sections.size(); ++i) {
      const auto& sec = s.sections[i];
      const std::string p = base + ".section[" + std::to_string(i) + "]";
      if (!positive(sec.chord)) bad(p + ".chord", "must be > 0");
      if (!sec.leading_edge.allFinite()) bad(p + ".leading_edge", "must be finite");
      if (!std::isfinite(sec.incidence_deg)) bad(p + ".incidence", "must be finite");
    }
    const auto st = span_stations(s);
    bool monotone = span_axis(s).norm() > 0.0;
    for (std::size_t i = 1; monotone && i < st.size(); ++i) monotone = st[i] > st[i - 1];
    if (!monotone) bad(base + ".sections", "spanwise coordinate not strictly monotone");
  }
  return out;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(const std::string& tok, int line, const char* field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, std::string("expected a number for ") + field + ", got '" + tok + "'");
  return v;
}

inline int parse_int(const std::string& tok, int line, const char* field) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, std::string("expected an integer for ") + field + ", got '" + tok + "'");
  return v;
}

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace detail

// Parses the aircraft text format. Syntax problems raise ParseError with the
// offending line; semantic problems raise InputError naming the field path.
inline AircraftModel parse_aircraft_file(std::istream& in) {
  AircraftModel model;
  bool seen_aircraft = false, seen_reference = false, seen_mass = false;
  bool in_header = true;
  LiftingSurface* current = nullptr;
  std::string raw;
  int line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto hash = raw.find('#');
    if (in_header && hash != std::string::npos && detail::trim(raw.substr(0, hash)).empty()) {
      std::string text = raw.substr(hash + 1);
      if (!text.empty() && text.front() == ' ') text.erase(0, 1);
      model.description.push_back(text);
      continue;
    }
    const auto tok = detail::split_ws(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (tok.empty()) continue;
    in_header = false;
    const std::string& key = tok[0];

    auto expect = [&](std::size_t n) {
      if (tok.size() != n)
        throw ParseError(line_no, key + " expects " + std::to_string(n - 1) + " fields, got " +
                                      std::to_string(tok.size() - 1));
    };

    if (key == "AIRCRAFT") {
      if (seen_aircraft) throw ParseError(line_no, "duplicate AIRCRAFT");
      if (tok.size() < 2) throw ParseError(line_no, "AIRCRAFT expects a name");
      const auto pos = raw.find("AIRCRAFT") + 8;
      model.name = detail::trim(hash == std::string::npos ? raw.substr(pos)
                                                          : raw.substr(pos, hash - pos));
      seen_aircraft = true;
    } else if (key == "REFERENCE") {
      expect(7);
      if (seen_reference) throw ParseError(line_no, "duplicate REFERENCE");
      model.sref = detail::parse_double(tok[1], line_no, "Sref");
      model.cref = detail::parse_double(tok[2], line_no, "cref");
      model.bref = detail::parse_double(tok[3], line_no, "bref");
      for (int k = 0; k < 3; ++k)
        model.moment_reference[k] = detail::parse_double(tok[4 + k], line_no, "moment reference");
      seen_reference = true;
    } else if (key == "MASS") {
      expect(9);
      if (seen_mass) throw ParseError(line_no, "duplicate MASS");
      auto& mp = model.mass_properties;
      mp.mass = detail::parse_double(tok[1], line_no, "m");
      mp.ix = detail::parse_double(tok[2], line_no, "Ix");
      mp.iy = detail::parse_double(tok[3], line_no, "Iy");
      mp.iz = detail::parse_double(tok[4], line_no, "Iz");
      mp.ixz = detail::parse_double(tok[5], line_no, "Ixz");
      for (int k = 0; k < 3; ++k) mp.cg[k] = detail::parse_double(tok[6 + k], line_no, "cg");
      seen_mass = true;
    } else if (key == "SURFACE") {
      expect(5);
      LiftingSurface s;
      s.name = tok[1];
      s.chordwise_panels = detail::parse_int(tok[2], line_no, "Nchord");
      s.spanwise_panels = detail::parse_int(tok[3], line_no, "Nspan");
      const int m = detail::parse_int(tok[4], line_no, "mirror");
      if (m != 0 && m != 1) throw ParseError(line_no, "mirror flag must be 0 or 1");
      s.mirror = m == 1;
      model.surfaces.push_back(std::move(s));
      current = &model.surfaces.back();
    } else if (key == "SECTION") {
      expect(6);
      if (!current) throw ParseError(line_no, "SECTION outside a SURFACE block");
      SurfaceSection sec;
      for (int k = 0; k < 3; ++k)
        sec.leading_edge[k] = detail::parse_double(tok[1 + k], line_no, "leading edge");
      sec.chord = detail::parse_double(tok[4], line_no, "chord");
      sec.incidence_deg = detail::parse_double(tok[5], line_no, "incidence");
      current->sections.push_back(sec);
    } else {
      throw ParseError(line_no, "unknown keyword '" + key + "'");
    }
  }

  if (!seen_aircraft) throw ParseError(line_no, "missing AIRCRAFT section");
  if (!seen_reference) throw ParseError(line_no, "missing REFERENCE section");
  if (!seen_mass) throw ParseError(line_no, "missing MASS section");
  if (model.surfaces.empty()) throw ParseError(line_no, "missing SURFACE section");

  const auto violations = validate(model);
  if (!violations.empty()) {
    std::string msg = "invalid aircraft definition:";
    for (const auto& v : violations) msg += "\n  " + v.path + ": " + v.message;
    throw InputError(msg);
  }
  return model;
}

inline AircraftModel parse_aircraft_file(const std::string& text) {
  std::istringstream in(text);
  return parse_aircraft_file(in);
}

// Canonical text form. Numbers use the shortest representation that reads
// back to the same double, so parse(serialize(m)) == m.
inline std::string serialize_aircraft_file(const AircraftModel& model) {
  using detail::format_number;
  std::ostringstream out;
  for (const auto& d : model.description) out << "#" << (d.empty() ? "" : " ") << d << '\n';
  out << "AIRCRAFT " << model.name << '\n';
  out << "REFERENCE " << format_number(model.sref) << ' ' << format_number(model.cref) << ' '
      << format_number(model.bref);
  for (int k = 0; k < 3; ++k) out << ' ' << format_number(model.moment_reference[k]);
  out << '\n';
  const auto& mp = model.mass_properties;
  out << "MASS " << format_number(mp.mass) << ' ' << format_number(mp.ix) << ' '
      << format_number(mp.iy) << ' ' << format_number(mp.iz) << ' ' << format_number(mp.ixz);
  for (int k = 0; k < 3; ++k) out << ' ' << format_number(mp.cg[k]);
  out << '\n';
  for (const auto& s : model.surfaces) {
    out << '\n'
        << "SURFACE " << s.name << ' ' << s.chordwise_panels << ' ' << s.spanwise_panels << ' '
        << (s.mirror ? 1 : 0) << '\n';
    for (const auto& sec : s.sections) {
      out << "  SECTION";
      for (int k = 0; k < 3; ++k) out << ' ' << format_number(sec.leading_edge[k]);
      out << ' ' << format_number(sec.chord) << ' ' << format_number(sec.incidence_deg) << '\n';
    }
  }
  return out.str();
}

// Mirrored surfaces expanded into explicit halves. The reflected half keeps
// the spanwise ordering increasing along +y so that panel normals of the two
// halves are mirror images of each other.
inline std::vector<LiftingSurface> expand_mirrors(const AircraftModel& model) {
  std::vector<LiftingSurface> out;
  for (const auto& s : model.surfaces) {
    LiftingSurface right = s;
    right.mirror = false;
    out.push_back(right);
    if (!s.mirror) continue;
    LiftingSurface left = right;
    left.name = s.name + "#mirror";
    left.sections.assign(s.sections.rbegin(), s.sections.rend());
    for (auto& sec : left.sections) sec.leading_edge.y() = -sec.leading_edge.y();
    out.push_back(std::move(left));
  }
  return out;
}

}  // namespace flightstab

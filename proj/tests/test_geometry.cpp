#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "flightstab/geometry.hpp"

using namespace flightstab;

namespace {

const char* kMinimal = R"(AIRCRAFT plank
REFERENCE 10 1 10 0.25 0 0
MASS 100 10 20 30 0 0.25 0 0
SURFACE wing 2 4 1
SECTION 0 0 0 1 0
SECTION 0 5 0 1 0
)";

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AircraftModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-50.0, 50.0), pos(1e-3, 1e3);
  std::uniform_int_distribution<int> count(1, 3), sections(2, 5), panels(1, 30), coin(0, 1);
  AircraftModel m;
  m.name = "random" + std::to_string(rng() % 1000);
  if (coin(rng)) m.description = {"generated", "", "line three"};
  m.sref = pos(rng);
  m.cref = pos(rng);
  m.bref = pos(rng);
  m.moment_reference = Vec3(u(rng), u(rng), u(rng));
  auto& mp = m.mass_properties;
  mp.mass = pos(rng);
  mp.ix = pos(rng);
  mp.iy = pos(rng);
  mp.iz = pos(rng);
  mp.ixz = std::sqrt(mp.ix * mp.iz) * std::uniform_real_distribution<double>(-0.9, 0.9)(rng);
  mp.cg = Vec3(u(rng), u(rng), u(rng));
  const int ns = count(rng);
  for (int k = 0; k < ns; ++k) {
    LiftingSurface s;
    s.name = "s" + std::to_string(k);
    s.chordwise_panels = panels(rng);
    s.spanwise_panels = panels(rng);
    s.mirror = coin(rng) == 1;
    const bool vertical = coin(rng) == 1;
    double station = u(rng);
    const int nsec = sections(rng);
    for (int i = 0; i < nsec; ++i) {
      SurfaceSection sec;
      station += pos(rng) * 0.01 + 1e-3;
      sec.leading_edge = vertical ? Vec3(u(rng), 0.1 * station, station) : Vec3(u(rng), station, 0.1 * station);
      sec.chord = pos(rng);
      sec.incidence_deg = std::uniform_real_distribution<double>(-10, 10)(rng);
      s.sections.push_back(sec);
    }
    m.surfaces.push_back(s);
  }
  return m;
}

}  // namespace

TEST(Geometry, MinimalFileParses) {
  const auto m = parse_aircraft_file(std::string(kMinimal));
  EXPECT_EQ(m.name, "plank");
  ASSERT_EQ(m.surfaces.size(), 1u);
  EXPECT_TRUE(m.surfaces[0].mirror);
  EXPECT_EQ(m.surfaces[0].sections.size(), 2u);
  const auto halves = expand_mirrors(m);
  ASSERT_EQ(halves.size(), 2u);
  EXPECT_DOUBLE_EQ(halves[1].sections.front().leading_edge.y(), -5.0);
  EXPECT_DOUBLE_EQ(halves[1].sections.back().leading_edge.y(), 0.0);
  EXPECT_TRUE(validate(m).empty());
}

TEST(Geometry, ZeroChordNamesSection) {
  std::string text = kMinimal;
  text.replace(text.find("SECTION 0 5 0 1 0"), 17, "SECTION 0 5 0 0 0");
  try {
    parse_aircraft_file(text);
    FAIL() << "expected InputError";
  } catch (const ParseError&) {
    FAIL() << "semantic error reported as syntax error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("surface[wing].section[1].chord"), std::string::npos) << e.what();
  }
}

TEST(Geometry, SyntaxErrorsCarryLineNumbers) {
  std::string text = kMinimal;
  text.replace(text.find("MASS 100"), 8, "MASS abc");
  try {
    parse_aircraft_file(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_aircraft_file(std::string("AIRCRAFT x\nREFERENCE 1 1 1 0 0 0\n")), ParseError);
  EXPECT_THROW(parse_aircraft_file(std::string(kMinimal) + "WING 1\n"), ParseError);
  EXPECT_THROW(parse_aircraft_file(std::string(kMinimal) + "REFERENCE 1 1 1 0 0 0\n"), ParseError);
  EXPECT_THROW(parse_aircraft_file(std::string("SECTION 0 0 0 1 0\n") + kMinimal), ParseError);
}

TEST(Geometry, InertiaNotPositiveDefinite) {
  auto m = parse_aircraft_file(std::string(kMinimal));
  m.mass_properties.ixz = std::sqrt(m.mass_properties.ix * m.mass_properties.iz);
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "inertia not positive-definite");
}

TEST(Geometry, NonMonotoneSpanNamesSurface) {
  auto m = parse_aircraft_file(std::string(kMinimal));
  SurfaceSection back = m.surfaces[0].sections[1];
  back.leading_edge.y() = 2.0;
  m.surfaces[0].sections.push_back(back);
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "surface[wing].sections");
  EXPECT_EQ(v[0].message, "spanwise coordinate not strictly monotone");
}

TEST(Geometry, ValidateFlagsEachInvariant) {
  const auto good = parse_aircraft_file(std::string(kMinimal));
  auto check = [&](auto mutate, const std::string& path) {
    AircraftModel m = good;
    mutate(m);
    const auto v = validate(m);
    ASSERT_FALSE(v.empty()) << path;
    EXPECT_EQ(v[0].path, path);
  };
  check([](AircraftModel& m) { m.sref = 0; }, "reference.sref");
  check([](AircraftModel& m) { m.cref = -1; }, "reference.cref");
  check([](AircraftModel& m) { m.bref = 0; }, "reference.bref");
  check([](AircraftModel& m) { m.mass_properties.iy = 0; }, "mass.Iy");
  check([](AircraftModel& m) { m.surfaces.clear(); }, "surfaces");
  check([](AircraftModel& m) { m.surfaces[0].chordwise_panels = 0; }, "surface[wing].Nchord");
  check([](AircraftModel& m) { m.surfaces[0].spanwise_panels = 0; }, "surface[wing].Nspan");
  check([](AircraftModel& m) { m.surfaces[0].sections.pop_back(); }, "surface[wing].sections");
}

TEST(Geometry, MinimalRoundTrip) {
  const auto m = parse_aircraft_file(std::string(kMinimal));
  const auto text = serialize_aircraft_file(m);
  EXPECT_EQ(parse_aircraft_file(text), m);
  EXPECT_NE(text.find("SURFACE wing 2 4 1"), std::string::npos);
}

TEST(Geometry, RandomModelsRoundTrip) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_model(rng);
    ASSERT_TRUE(validate(m).empty()) << i;
    const auto text = serialize_aircraft_file(m);
    ASSERT_EQ(parse_aircraft_file(text), m) << text;
  }
}

TEST(Geometry, ShippedExampleIsCanonical) {
  const auto text = read_text(FLIGHTSTAB_DATA_DIR "/transport.aircraft");
  const auto m = parse_aircraft_file(text);
  EXPECT_DOUBLE_EQ(m.sref, 124.6);
  EXPECT_DOUBLE_EQ(m.cref, 4.02);
  EXPECT_DOUBLE_EQ(m.bref, 34.32);
  EXPECT_EQ(m.surfaces.size(), 3u);
  EXPECT_EQ(serialize_aircraft_file(m), text);
}

TEST(Geometry, CommentsAndBlankLinesIgnored) {
  const std::string text = std::string("# heading\n\n") + kMinimal + "  # trailing\n\n";
  const auto m = parse_aircraft_file(text);
  EXPECT_EQ(m.description, std::vector<std::string>{"heading"});
}

#include "doctest.h"

#include <sstream>

#include "pulsegate/io.hpp"
#include "pulsegate/studies.hpp"

using namespace pulsegate;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "units": "omega_c=1",
  "trap": {"omega_c": 1, "eta_c": 0.1, "nbar_c": 1, "nbar_s": 1},
  "pulses": [{"t_start": 0, "duration": 1.5, "amplitude": 2, "omega": 3.5}]
})";

std::string replaced(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("sequence file round trip is exact") {
  io::SequenceFile f;
  f.trap.eta_c = 0.07;
  f.sequence = example_sequence("n5-fast");
  f.sequence.pulses[2].dphi = 0.1 + 0.2;
  io::SequenceDescriptor d;
  d.kind = Parametrization::kSymmetric;
  d.n_pulses = 5;
  d.durations = {0.0953071, 0.288972, 0.269998};
  d.gaps = {0.0305622, 0.272151};
  d.amplitudes = {1.0, 2.91057, 3.59685};
  d.omega = 20.4761;
  f.descriptor = d;

  const std::string text = io::serialize(f);
  const io::SequenceFile g = io::parse_sequence_file(text);
  CHECK(g.sequence == f.sequence);
  CHECK(g.trap.eta_c == f.trap.eta_c);
  REQUIRE(g.descriptor);
  CHECK(*g.descriptor == d);
  CHECK(io::serialize(g) == text);
  CHECK(d.expand().pulses == example_sequence("n5-fast").pulses);
}

TEST_CASE("sequence file defaults and descriptor expansion") {
  const auto f = io::parse_sequence_file(kMinimal);
  REQUIRE(f.sequence.size() == 1);
  CHECK(f.sequence.pulses[0].dphi == 0.0);
  CHECK(f.sequence.parametrization == Parametrization::kGeneral);

  const auto a = io::parse_sequence_file(R"({
    "schema_version": 1, "units": "omega_c=1",
    "trap": {"omega_c": 1, "eta_c": 0.1, "nbar_c": 1, "nbar_s": 1},
    "descriptor": {"kind": "equal-amplitude", "n_pulses": 4, "durations": [0.5, 1.0],
                   "gaps": [2.6, 2.7], "omega": 4.0}})");
  REQUIRE(a.sequence.size() == 4);
  CHECK(a.sequence.parametrization == Parametrization::kEqualAmplitude);
  CHECK(a.sequence.pulses[3].duration == 0.5);
  CHECK(a.sequence.pulses[1].t_start == doctest::Approx(0.5 + 2.6));
  CHECK(a.sequence.pulses[2].t_start == doctest::Approx(0.5 + 2.6 + 1.0 + 2.7));

  const auto s = io::parse_sequence_file(R"({
    "schema_version": 1, "units": "omega_c=1",
    "trap": {"omega_c": 1, "eta_c": 0.1, "nbar_c": 1, "nbar_s": 1},
    "descriptor": {"kind": "shaped", "n_pulses": 3, "durations": [1, 2, 3],
                   "amplitudes": [1, -1, 1], "omega": 2.0}})");
  REQUIRE(s.sequence.size() == 3);
  CHECK(s.sequence.pulses[2].t_start == 3.0);
  CHECK(s.sequence.pulses[1].amplitude == -1.0);
}

TEST_CASE("malformed sequence files are rejected") {
  const std::string ok = kMinimal;
  CHECK_NOTHROW(io::parse_sequence_file(ok));
  CHECK_THROWS_AS(io::parse_sequence_file("{"), io::ParseError);
  CHECK_THROWS_AS(io::parse_sequence_file(replaced(ok, "\"units\"", "\"extra\": 1, \"units\"")),
                  io::ParseError);
  CHECK_THROWS_AS(io::parse_sequence_file(replaced(ok, "\"omega\": 3.5", "\"omega\": 3.5, \"x\": 0")),
                  io::ParseError);
  CHECK_THROWS_AS(io::parse_sequence_file(replaced(ok, "\"schema_version\": 1", "\"schema_version\": 2")),
                  io::ParseError);
  CHECK_THROWS_AS(io::parse_sequence_file(replaced(ok, "omega_c=1", "hz")), io::ParseError);
  CHECK_THROWS_AS(io::parse_sequence_file(replaced(ok, "\"omega_c\": 1", "\"omega_c\": 2")),
                  io::ParseError);
  CHECK_THROWS_AS(io::parse_sequence_file(replaced(ok, "\"duration\": 1.5", "\"duration\": \"1.5\"")),
                  io::ParseError);
  CHECK_THROWS_AS(io::parse_sequence_file(replaced(ok, "\"amplitude\": 2, ", "")), io::ParseError);
  CHECK_THROWS_AS(io::read_sequence_file("/nonexistent/file.json"), io::ParseError);
}

TEST_CASE("search config parsing") {
  const SearchConfig def;
  const SearchConfig empty = io::parse_search_config("{}");
  CHECK(empty.n_pulses == def.n_pulses);
  CHECK(empty.constraints == def.constraints);
  CHECK(empty.seed == def.seed);

  const SearchConfig c = io::parse_search_config(R"({
    "n_pulses": 4, "parametrization": "equal-amplitude", "max_tau_over_period": 2.2,
    "seed": 9, "restarts": 3, "anneal": {"steps": 7}, "omega": [0.5, 9],
    "constraints": ["re:dac+", "im:theta+"], "minimize_area": true})");
  CHECK(c.n_pulses == 4);
  CHECK(c.parametrization == Parametrization::kEqualAmplitude);
  CHECK(c.max_tau_over_period == 2.2);
  CHECK(c.seed == 9);
  CHECK(c.anneal.steps == 7);
  CHECK(c.anneal.cooling == def.anneal.cooling);
  CHECK(c.omega.lo == 0.5);
  REQUIRE(c.constraints.size() == 2);
  CHECK(c.constraints[1] == ConstraintRow{ConstraintKind::kThetaPlus, true});
  CHECK(c.minimize_area);

  const SearchConfig back = io::parse_search_config(io::serialize(c));
  CHECK(io::serialize(back) == io::serialize(c));

  CHECK_THROWS_AS(io::parse_search_config(R"({"restart": 3})"), io::ParseError);
  CHECK_THROWS_AS(io::parse_search_config(R"({"seed": -1})"), io::ParseError);
  CHECK_THROWS_AS(io::parse_search_config(R"({"constraints": ["dac+"]})"), io::ParseError);
  CHECK_THROWS_AS(io::parse_search_config(R"({"n_pulses": 0})"), io::ParseError);
}

TEST_CASE("csv output") {
  std::ostringstream out;
  io::CsvWriter w(out, {"a", "b"}, 42, "scan");
  w.cell(0.1).cell(3).end_row();
  CHECK(out.str() == "# pulsegate 0.1.0 schema_version=1 command=scan seed=42\na,b\n0.1,3\n");
  w.cell(1.0);
  CHECK_THROWS_AS(w.end_row(), std::logic_error);
  w.cell(2.0);
  CHECK_THROWS_AS(w.cell(3.0), std::logic_error);

  CHECK(io::format_double(1e-300) == "1e-300");
  CHECK(std::stod(io::format_double(0.1 + 0.2)) == 0.1 + 0.2);
}

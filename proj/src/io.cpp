#include "pulsegate/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pulsegate::io {

using json = nlohmann::ordered_json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ParseError(where + ": unknown field '" + key + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ParseError(where + ": not finite");
  return x;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  return j.get<std::string>();
}

Parametrization parametrization(const json& j, const std::string& where) {
  try {
    return parse_parametrization(text(j, where));
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Bounds bounds(const json& j, const std::string& where) {
  const std::vector<double> v = numbers(j, where);
  if (v.size() != 2) throw ParseError(where + ": expected [lo, hi]");
  return {v[0], v[1]};
}

json to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

PulseSequence SequenceDescriptor::expand() const {
  switch (kind) {
    case Parametrization::kSymmetric:
    case Parametrization::kEqualAmplitude: {
      SymmetricParams p;
      p.durations = durations;
      p.gaps = gaps;
      p.amplitudes = amplitudes;
      p.omega = omega;
      PulseSequence s = expand_symmetric(p, n_pulses);
      s.parametrization = kind;
      return s;
    }
    case Parametrization::kShaped:
      if (!gaps.empty()) throw std::invalid_argument("shaped descriptor cannot have gaps");
      if (static_cast<int>(durations.size()) != n_pulses) {
        throw std::invalid_argument("shaped descriptor needs one duration per segment");
      }
      return expand_shaped(durations, amplitudes, omega);
    default:
      throw std::invalid_argument("no descriptor form for " + to_string(kind));
  }
}

SequenceFile parse_sequence_file(const std::string& input) {
  json j;
  try {
    j = json::parse(input);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, {"schema_version", "units", "trap", "parametrization", "pulses", "descriptor"},
             "file");
  SequenceFile f;
  if (!j.contains("schema_version")) throw ParseError("file: missing schema_version");
  f.schema_version = integer(j["schema_version"], "schema_version");
  if (f.schema_version != kSchemaVersion) {
    throw ParseError("unsupported schema_version " + std::to_string(f.schema_version));
  }
  if (!j.contains("units") || text(j["units"], "units") != kUnits) {
    throw ParseError(std::string("units must be \"") + kUnits + "\"");
  }

  if (j.contains("trap")) {
    const json& t = j["trap"];
    check_keys(t, {"omega_c", "eta_c", "nbar_c", "nbar_s"}, "trap");
    if (t.contains("omega_c") && number(t["omega_c"], "trap.omega_c") != 1.0) {
      throw ParseError("trap.omega_c must be 1 in these units");
    }
    const double eta = t.contains("eta_c") ? number(t["eta_c"], "trap.eta_c") : 0.1;
    const double nc = t.contains("nbar_c") ? number(t["nbar_c"], "trap.nbar_c") : 1.0;
    const double ns = t.contains("nbar_s") ? number(t["nbar_s"], "trap.nbar_s") : 1.0;
    try {
      f.trap = TrapConfig::two_ion(eta, nc, ns);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("trap: ") + e.what());
    }
  }

  if (j.contains("descriptor")) {
    const json& d = j["descriptor"];
    check_keys(d, {"kind", "n_pulses", "durations", "gaps", "amplitudes", "omega"}, "descriptor");
    SequenceDescriptor desc;
    if (!d.contains("kind") || !d.contains("n_pulses") || !d.contains("durations") ||
        !d.contains("omega")) {
      throw ParseError("descriptor: needs kind, n_pulses, durations and omega");
    }
    desc.kind = parametrization(d["kind"], "descriptor.kind");
    desc.n_pulses = integer(d["n_pulses"], "descriptor.n_pulses");
    desc.durations = numbers(d["durations"], "descriptor.durations");
    if (d.contains("gaps")) desc.gaps = numbers(d["gaps"], "descriptor.gaps");
    if (d.contains("amplitudes")) desc.amplitudes = numbers(d["amplitudes"], "descriptor.amplitudes");
    desc.omega = number(d["omega"], "descriptor.omega");
    f.descriptor = desc;
  }

  if (j.contains("pulses")) {
    const json& ps = j["pulses"];
    if (!ps.is_array()) throw ParseError("pulses: expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string where = "pulses[" + std::to_string(i) + "]";
      check_keys(ps[i], {"t_start", "duration", "amplitude", "omega", "dphi"}, where);
      for (const char* key : {"t_start", "duration", "amplitude", "omega"}) {
        if (!ps[i].contains(key)) throw ParseError(where + ": missing " + key);
      }
      Pulse p;
      p.t_start = number(ps[i]["t_start"], where + ".t_start");
      p.duration = number(ps[i]["duration"], where + ".duration");
      p.amplitude = number(ps[i]["amplitude"], where + ".amplitude");
      p.omega = number(ps[i]["omega"], where + ".omega");
      p.dphi = ps[i].contains("dphi") ? number(ps[i]["dphi"], where + ".dphi") : 0.0;
      f.sequence.pulses.push_back(p);
    }
  } else if (f.descriptor) {
    try {
      f.sequence = f.descriptor->expand();
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("descriptor: ") + e.what());
    }
  } else {
    throw ParseError("file: needs pulses or a descriptor");
  }
  if (j.contains("parametrization")) {
    f.sequence.parametrization = parametrization(j["parametrization"], "parametrization");
  } else if (f.descriptor) {
    f.sequence.parametrization = f.descriptor->kind;
  }
  return f;
}

std::string serialize(const SequenceFile& f) {
  json j;
  j["schema_version"] = f.schema_version;
  j["units"] = kUnits;
  j["trap"] = {{"omega_c", f.trap.omega_c},
               {"eta_c", f.trap.eta_c},
               {"nbar_c", f.trap.nbar_c},
               {"nbar_s", f.trap.nbar_s}};
  j["parametrization"] = to_string(f.sequence.parametrization);
  json ps = json::array();
  for (const Pulse& p : f.sequence.pulses) {
    ps.push_back({{"t_start", p.t_start},
                  {"duration", p.duration},
                  {"amplitude", p.amplitude},
                  {"omega", p.omega},
                  {"dphi", p.dphi}});
  }
  j["pulses"] = ps;
  if (f.descriptor) {
    const SequenceDescriptor& d = *f.descriptor;
    j["descriptor"] = {{"kind", to_string(d.kind)},
                       {"n_pulses", d.n_pulses},
                       {"durations", to_json(d.durations)},
                       {"gaps", to_json(d.gaps)},
                       {"amplitudes", to_json(d.amplitudes)},
                       {"omega", d.omega}};
  }
  return j.dump(2) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SequenceFile read_sequence_file(const std::filesystem::path& path) {
  return parse_sequence_file(read_text(path));
}

void write_sequence_file(const std::filesystem::path& path, const SequenceFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize(file);
}

SearchConfig parse_search_config(const std::string& input) {
  json j;
  try {
    j = json::parse(input);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j,
             {"n_pulses", "parametrization", "omega", "duration", "gap", "max_tau_over_period",
              "dphi_grid", "threshold", "seed", "restarts", "anneal", "simplex", "constraints",
              "threads", "stop_factor", "minimize_area", "area_margin"},
             "config");
  SearchConfig c;
  if (j.contains("n_pulses")) c.n_pulses = integer(j["n_pulses"], "n_pulses");
  if (j.contains("parametrization")) {
    c.parametrization = parametrization(j["parametrization"], "parametrization");
  }
  if (j.contains("omega")) c.omega = bounds(j["omega"], "omega");
  if (j.contains("duration")) c.duration = bounds(j["duration"], "duration");
  if (j.contains("gap")) c.gap = bounds(j["gap"], "gap");
  if (j.contains("max_tau_over_period")) {
    c.max_tau_over_period = number(j["max_tau_over_period"], "max_tau_over_period");
  }
  if (j.contains("dphi_grid")) c.dphi_grid = numbers(j["dphi_grid"], "dphi_grid");
  if (j.contains("threshold")) c.threshold = number(j["threshold"], "threshold");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("restarts")) c.restarts = integer(j["restarts"], "restarts");
  if (j.contains("threads")) c.threads = integer(j["threads"], "threads");
  if (j.contains("stop_factor")) c.stop_factor = number(j["stop_factor"], "stop_factor");
  if (j.contains("minimize_area")) {
    if (!j["minimize_area"].is_boolean()) throw ParseError("minimize_area: expected a boolean");
    c.minimize_area = j["minimize_area"].get<bool>();
  }
  if (j.contains("area_margin")) c.area_margin = number(j["area_margin"], "area_margin");
  if (j.contains("anneal")) {
    const json& a = j["anneal"];
    check_keys(a, {"t0", "cooling", "steps", "step_scale"}, "anneal");
    if (a.contains("t0")) c.anneal.t0 = number(a["t0"], "anneal.t0");
    if (a.contains("cooling")) c.anneal.cooling = number(a["cooling"], "anneal.cooling");
    if (a.contains("steps")) c.anneal.steps = integer(a["steps"], "anneal.steps");
    if (a.contains("step_scale")) c.anneal.step_scale = number(a["step_scale"], "anneal.step_scale");
  }
  if (j.contains("simplex")) {
    const json& s = j["simplex"];
    check_keys(s, {"max_iterations", "initial_step", "ftol", "xtol"}, "simplex");
    if (s.contains("max_iterations")) {
      c.simplex.max_iterations = integer(s["max_iterations"], "simplex.max_iterations");
    }
    if (s.contains("initial_step")) c.simplex.initial_step = number(s["initial_step"], "simplex.initial_step");
    if (s.contains("ftol")) c.simplex.ftol = number(s["ftol"], "simplex.ftol");
    if (s.contains("xtol")) c.simplex.xtol = number(s["xtol"], "simplex.xtol");
  }
  if (j.contains("constraints")) {
    const json& rows = j["constraints"];
    if (!rows.is_array()) throw ParseError("constraints: expected an array");
    c.constraints.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      // "re:dac+" or "im:theta+"
      const std::string s = text(rows[i], "constraints[" + std::to_string(i) + "]");
      const auto colon = s.find(':');
      if (colon == std::string::npos || (s.substr(0, colon) != "re" && s.substr(0, colon) != "im")) {
        throw ParseError("constraints: expected re:<kind> or im:<kind>, got " + s);
      }
      try {
        c.constraints.push_back({parse_constraint_kind(s.substr(colon + 1)), s[0] == 'i'});
      } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("constraints: ") + e.what());
      }
    }
  }
  if (c.n_pulses < 1) throw ParseError("n_pulses must be at least 1");
  if (c.restarts < 0) throw ParseError("restarts must be non-negative");
  return c;
}

std::string serialize(const SearchConfig& c) {
  json j;
  j["n_pulses"] = c.n_pulses;
  j["parametrization"] = to_string(c.parametrization);
  j["omega"] = {c.omega.lo, c.omega.hi};
  j["duration"] = {c.duration.lo, c.duration.hi};
  j["gap"] = {c.gap.lo, c.gap.hi};
  j["max_tau_over_period"] = c.max_tau_over_period;
  j["dphi_grid"] = to_json(c.dphi_grid);
  j["threshold"] = c.threshold;
  j["seed"] = c.seed;
  j["restarts"] = c.restarts;
  j["anneal"] = {{"t0", c.anneal.t0},
                 {"cooling", c.anneal.cooling},
                 {"steps", c.anneal.steps},
                 {"step_scale", c.anneal.step_scale}};
  j["simplex"] = {{"max_iterations", c.simplex.max_iterations},
                  {"initial_step", c.simplex.initial_step},
                  {"ftol", c.simplex.ftol},
                  {"xtol", c.simplex.xtol}};
  json rows = json::array();
  for (const auto& r : c.constraints) {
    rows.push_back(std::string(r.imaginary ? "im:" : "re:") + to_string(r.kind));
  }
  j["constraints"] = rows;
  j["threads"] = c.threads;
  j["stop_factor"] = c.stop_factor;
  j["minimize_area"] = c.minimize_area;
  j["area_margin"] = c.area_margin;
  return j.dump(2) + "\n";
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& columns,
                     std::uint64_t seed, const std::string& command)
    : out_(out), columns_(columns.size()) {
  out_ << "# pulsegate " << kToolVersion << " schema_version=" << kSchemaVersion
       << " command=" << command << " seed=" << seed << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }

CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (in_row_ >= columns_) throw std::logic_error("CsvWriter: too many cells in row");
  out_ << (in_row_ ? "," : "") << s;
  ++in_row_;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("CsvWriter: row has the wrong number of cells");
  out_ << "\n";
  in_row_ = 0;
}

}  // namespace pulsegate::io

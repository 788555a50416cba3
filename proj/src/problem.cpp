#include "varcalc/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "varcalc/errors.hpp"

namespace varcalc {

namespace {

struct RawValue {
  bool is_list = false;
  bool quoted = false;
  std::string text;
  std::vector<RawValue> items;
};

struct RawEntry {
  RawValue value;
  int line = 0;
};

using RawSection = std::map<std::string, RawEntry>;

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw InvalidInputError("line " + std::to_string(line) + ": " + message);
}

RawValue parse_value(const std::string& text, std::size_t& pos, int line);

RawValue parse_list(const std::string& text, std::size_t& pos, int line) {
  RawValue list;
  list.is_list = true;
  ++pos;  // consume '['
  for (;;) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) fail(line, "unterminated list");
    if (text[pos] == ']') {
      ++pos;
      return list;
    }
    if (!list.items.empty()) {
      if (text[pos] != ',') fail(line, "expected ',' or ']' in list");
      ++pos;
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos >= text.size()) fail(line, "unterminated list");
      if (text[pos] == ']') fail(line, "trailing comma in list");
    }
    list.items.push_back(parse_value(text, pos, line));
  }
}

RawValue parse_value(const std::string& text, std::size_t& pos, int line) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size()) fail(line, "missing value");
  if (text[pos] == '[') return parse_list(text, pos, line);
  if (text[pos] == '"') {
    const std::size_t close = text.find('"', pos + 1);
    if (close == std::string::npos) fail(line, "unterminated quoted expression");
    RawValue value;
    value.quoted = true;
    value.text = text.substr(pos + 1, close - pos - 1);
    pos = close + 1;
    return value;
  }
  const std::size_t start = pos;
  while (pos < text.size() && text[pos] != ',' && text[pos] != ']') ++pos;
  RawValue value;
  value.text = trim(text.substr(start, pos - start));
  if (value.text.empty()) fail(line, "missing value");
  return value;
}

struct ParsedFile {
  std::map<std::string, RawSection> sections;
  std::map<std::string, int> section_lines;
};

ParsedFile parse_raw(std::istream& in) {
  static const std::vector<std::string> known_sections = {
      "system", "params", "extrinsic", "curve", "solve", "numerics"};

  ParsedFile file;
  RawSection* current = nullptr;
  std::string current_name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Cut comments outside quotes.
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "malformed section header " + line);
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (std::find(known_sections.begin(), known_sections.end(), name) ==
          known_sections.end()) {
        fail(lineno, "unknown section [" + name + "]");
      }
      if (file.sections.count(name)) fail(lineno, "duplicate section [" + name + "]");
      current = &file.sections[name];
      file.section_lines[name] = lineno;
      current_name = name;
      continue;
    }

    std::size_t eq = std::string::npos;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '=' && !quoted) {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos) fail(lineno, "expected key = value, got " + line);
    if (!current) fail(lineno, "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(lineno, "empty key");
    const std::string value_text = trim(line.substr(eq + 1));
    std::size_t pos = 0;
    RawValue value = parse_value(value_text, pos, lineno);
    while (pos < value_text.size() &&
           std::isspace(static_cast<unsigned char>(value_text[pos]))) {
      ++pos;
    }
    if (pos != value_text.size()) fail(lineno, "trailing input after value of " + key);
    if (current->count(key)) fail(lineno, "duplicate key " + key + " in [" + current_name + "]");
    (*current)[key] = RawEntry{std::move(value), lineno};
  }
  return file;
}

class SectionReader {
 public:
  SectionReader(const ParsedFile& file, const std::string& name)
      : name_(name), section_(nullptr) {
    auto it = file.sections.find(name);
    if (it != file.sections.end()) section_ = &it->second;
  }

  bool present() const { return section_ != nullptr; }

  const RawEntry* find(const std::string& key) const {
    if (!section_) return nullptr;
    auto it = section_->find(key);
    used_.push_back(key);
    return it == section_->end() ? nullptr : &it->second;
  }

  const RawEntry& require(const std::string& key) const {
    const RawEntry* entry = find(key);
    if (!entry) {
      throw InvalidInputError("[" + name_ + "] is missing the key " + key);
    }
    return *entry;
  }

  void reject_unknown_keys() const {
    if (!section_) return;
    for (const auto& [key, entry] : *section_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        fail(entry.line, "unknown key " + key + " in [" + name_ + "]");
      }
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const RawSection* section_;
  mutable std::vector<std::string> used_;
};

double as_number(const RawEntry& entry, const std::string& what) {
  if (entry.value.is_list) fail(entry.line, what + " must be a number");
  const std::string& text = entry.value.text;
  char* end = nullptr;
  const double parsed = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty()) {
    fail(entry.line, what + " is not a number: " + text);
  }
  return parsed;
}

int as_int(const RawEntry& entry, const std::string& what) {
  const double value = as_number(entry, what);
  const int rounded = static_cast<int>(value);
  if (static_cast<double>(rounded) != value) {
    fail(entry.line, what + " must be an integer");
  }
  return rounded;
}

std::string as_text(const RawValue& value, int line, const std::string& what) {
  if (value.is_list) fail(line, what + " must be text, not a list");
  return value.text;
}

std::vector<std::string> as_text_list(const RawEntry& entry, const std::string& what) {
  if (!entry.value.is_list) fail(entry.line, what + " must be a bracketed list");
  std::vector<std::string> out;
  for (const RawValue& item : entry.value.items) {
    out.push_back(as_text(item, entry.line, "entry of " + what));
  }
  return out;
}

std::vector<double> as_number_list(const RawEntry& entry, const std::string& what) {
  if (!entry.value.is_list) fail(entry.line, what + " must be a bracketed list");
  std::vector<double> out;
  for (const RawValue& item : entry.value.items) {
    if (item.is_list) fail(entry.line, what + " must hold numbers");
    char* end = nullptr;
    const double parsed = std::strtod(item.text.c_str(), &end);
    if (end != item.text.c_str() + item.text.size() || item.text.empty()) {
      fail(entry.line, "entry of " + what + " is not a number: " + item.text);
    }
    out.push_back(parsed);
  }
  return out;
}

Eigen::VectorXd as_vector(const RawEntry& entry, const std::string& what,
                          int expected_size) {
  const std::vector<double> values = as_number_list(entry, what);
  if (static_cast<int>(values.size()) != expected_size) {
    fail(entry.line, what + " needs " + std::to_string(expected_size) +
                         " entries, got " + std::to_string(values.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

SystemSpec build_system(const SectionReader& system) {
  if (!system.present()) {
    throw InvalidInputError("problem file needs a [system] section");
  }
  SystemSpec spec;
  const int n = as_int(system.require("n"), "[system] n");
  const int r = as_int(system.require("r"), "[system] r");
  spec.state_names = as_text_list(system.require("states"), "[system] states");
  spec.control_names = as_text_list(system.require("controls"), "[system] controls");
  spec.psi = as_text_list(system.require("psi"), "[system] psi");
  if (static_cast<int>(spec.state_names.size()) != n) {
    const RawEntry& entry = system.require("states");
    fail(entry.line, "states count " + std::to_string(spec.state_names.size()) +
                         " != n " + std::to_string(n));
  }
  if (static_cast<int>(spec.control_names.size()) != r) {
    const RawEntry& entry = system.require("controls");
    fail(entry.line, "controls count " + std::to_string(spec.control_names.size()) +
                         " != r " + std::to_string(r));
  }
  if (static_cast<int>(spec.psi.size()) != n) {
    const RawEntry& entry = system.require("psi");
    fail(entry.line, "psi count " + std::to_string(spec.psi.size()) + " != n " +
                         std::to_string(n));
  }
  if (const RawEntry* lag = system.find("lagrangian")) {
    spec.lagrangian = as_text(lag->value, lag->line, "[system] lagrangian");
  }
  system.reject_unknown_keys();
  return spec;
}

void fill_params(const ParsedFile& file, SystemSpec& spec) {
  auto it = file.sections.find("params");
  if (it == file.sections.end()) return;
  for (const auto& [key, entry] : it->second) {
    spec.parameters[key] = as_number(entry, "[params] " + key);
  }
}

std::vector<std::vector<std::string>> read_controls(const RawEntry& entry, int arcs,
                                                    int r) {
  if (!entry.value.is_list) {
    fail(entry.line, "[curve] controls must be a bracketed list with one entry per arc");
  }
  if (static_cast<int>(entry.value.items.size()) != arcs) {
    fail(entry.line, "[curve] controls needs " + std::to_string(arcs) +
                         " entries (one per arc), got " +
                         std::to_string(entry.value.items.size()));
  }
  std::vector<std::vector<std::string>> out;
  for (const RawValue& item : entry.value.items) {
    std::vector<std::string> arc_exprs;
    if (item.is_list) {
      for (const RawValue& inner : item.items) {
        arc_exprs.push_back(as_text(inner, entry.line, "control expression"));
      }
    } else {
      arc_exprs.push_back(item.text);
    }
    if (static_cast<int>(arc_exprs.size()) != r) {
      fail(entry.line, "each [curve] controls entry needs " + std::to_string(r) +
                           " expressions, got " + std::to_string(arc_exprs.size()));
    }
    out.push_back(std::move(arc_exprs));
  }
  return out;
}

std::vector<Eigen::VectorXd> read_z_seeds(const RawEntry& entry, int segments, int r) {
  if (!entry.value.is_list) fail(entry.line, "[solve] z_seeds must be a list");
  if (static_cast<int>(entry.value.items.size()) != segments) {
    fail(entry.line, "[solve] z_seeds needs " + std::to_string(segments) +
                         " entries (one per segment), got " +
                         std::to_string(entry.value.items.size()));
  }
  std::vector<Eigen::VectorXd> out;
  for (const RawValue& item : entry.value.items) {
    std::vector<double> values;
    if (item.is_list) {
      for (const RawValue& inner : item.items) {
        char* end = nullptr;
        const double parsed = std::strtod(inner.text.c_str(), &end);
        if (inner.is_list || end != inner.text.c_str() + inner.text.size()) {
          fail(entry.line, "[solve] z_seeds entries must be numbers");
        }
        values.push_back(parsed);
      }
    } else {
      char* end = nullptr;
      const double parsed = std::strtod(item.text.c_str(), &end);
      if (end != item.text.c_str() + item.text.size()) {
        fail(entry.line, "[solve] z_seeds entries must be numbers");
      }
      values.push_back(parsed);
    }
    if (static_cast<int>(values.size()) != r) {
      fail(entry.line, "each z_seeds entry needs " + std::to_string(r) +
                           " numbers, got " + std::to_string(values.size()));
    }
    out.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                    static_cast<Eigen::Index>(values.size())));
  }
  return out;
}

ProblemFile build_problem(const ParsedFile& file) {
  ProblemFile problem;
  SectionReader system(file, "system");
  problem.system = build_system(system);
  fill_params(file, problem.system);

  SectionReader numerics(file, "numerics");
  if (numerics.present()) {
    if (const RawEntry* e = numerics.find("grid_density")) {
      problem.numerics.grid_density = as_int(*e, "[numerics] grid_density");
    }
    if (const RawEntry* e = numerics.find("tolerance")) {
      problem.numerics.tolerance = as_number(*e, "[numerics] tolerance");
    }
    if (const RawEntry* e = numerics.find("admissibility_tolerance")) {
      problem.numerics.admissibility_tolerance =
          as_number(*e, "[numerics] admissibility_tolerance");
    }
    if (const RawEntry* e = numerics.find("residual_tolerance")) {
      problem.numerics.residual_tolerance =
          as_number(*e, "[numerics] residual_tolerance");
    }
    if (const RawEntry* e = numerics.find("acceptance_tolerance")) {
      problem.numerics.acceptance_tolerance =
          as_number(*e, "[numerics] acceptance_tolerance");
    }
    if (const RawEntry* e = numerics.find("scan_points")) {
      problem.numerics.scan_points = as_int(*e, "[numerics] scan_points");
    }
    numerics.reject_unknown_keys();
  }

  const int n = static_cast<int>(problem.system.state_names.size());
  const int r = static_cast<int>(problem.system.control_names.size());

  SectionReader extrinsic(file, "extrinsic");
  if (extrinsic.present()) {
    ExtrinsicSpec spec;
    spec.state_names = problem.system.state_names;
    spec.free_lagrangian = as_text(extrinsic.require("free_lagrangian").value,
                                   extrinsic.require("free_lagrangian").line,
                                   "[extrinsic] free_lagrangian");
    if (const RawEntry* e = extrinsic.find("constraints")) {
      spec.constraints = as_text_list(*e, "[extrinsic] constraints");
    }
    spec.parameters = problem.system.parameters;
    extrinsic.reject_unknown_keys();
    problem.extrinsic = std::move(spec);
  }

  SectionReader curve(file, "curve");
  if (curve.present()) {
    ProblemFile::CurveSection section;
    section.t_start = as_number(curve.require("t_start"), "[curve] t_start");
    section.t_end = as_number(curve.require("t_end"), "[curve] t_end");
    section.q0 = as_vector(curve.require("q0"), "[curve] q0", n);
    if (const RawEntry* e = curve.find("corner_times")) {
      section.corner_times = as_number_list(*e, "[curve] corner_times");
    }
    section.controls = read_controls(
        curve.require("controls"),
        static_cast<int>(section.corner_times.size()) + 1, r);
    if (const RawEntry* e = curve.find("grid_density")) {
      section.grid_density = as_int(*e, "[curve] grid_density");
    }
    curve.reject_unknown_keys();
    problem.curve = std::move(section);
  }

  SectionReader solve(file, "solve");
  if (solve.present()) {
    ProblemFile::SolveSection section;
    section.t_start = as_number(solve.require("t_start"), "[solve] t_start");
    section.t_end = as_number(solve.require("t_end"), "[solve] t_end");
    section.q_start = as_vector(solve.require("q_start"), "[solve] q_start", n);
    section.q_end = as_vector(solve.require("q_end"), "[solve] q_end", n);

    const RawEntry* corners_entry = solve.find("corners");
    const RawEntry* corner_seeds_entry = solve.find("corner_time_seeds");
    const RawEntry* z_seeds_entry = solve.find("z_seeds");
    if (corners_entry) {
      section.corners = as_int(*corners_entry, "[solve] corners");
      if (section.corners < 0) fail(corners_entry->line, "[solve] corners must be >= 0");
    } else if (corner_seeds_entry) {
      section.corners =
          static_cast<int>(as_number_list(*corner_seeds_entry,
                                          "[solve] corner_time_seeds").size());
    } else if (z_seeds_entry && z_seeds_entry->value.is_list) {
      section.corners = static_cast<int>(z_seeds_entry->value.items.size()) - 1;
    }

    if (const RawEntry* e = solve.find("p_seed")) {
      section.p_seed = as_vector(*e, "[solve] p_seed", n);
    } else {
      section.p_seed = Eigen::VectorXd::Zero(n);
    }
    if (corner_seeds_entry) {
      section.corner_time_seeds =
          as_number_list(*corner_seeds_entry, "[solve] corner_time_seeds");
      if (static_cast<int>(section.corner_time_seeds.size()) != section.corners) {
        fail(corner_seeds_entry->line,
             "[solve] corner_time_seeds needs " + std::to_string(section.corners) +
                 " entries, got " + std::to_string(section.corner_time_seeds.size()));
      }
    } else {
      const double span = section.t_end - section.t_start;
      for (int s = 1; s <= section.corners; ++s) {
        section.corner_time_seeds.push_back(section.t_start +
                                            span * s / (section.corners + 1));
      }
    }
    if (z_seeds_entry) {
      section.z_seeds = read_z_seeds(*z_seeds_entry, section.corners + 1, r);
    } else {
      section.z_seeds.assign(static_cast<std::size_t>(section.corners) + 1,
                             Eigen::VectorXd::Zero(r));
    }
    solve.reject_unknown_keys();
    problem.solve = std::move(section);
  }

  return problem;
}

}  // namespace

ProblemFile parse_problem_file(std::istream& in) {
  return build_problem(parse_raw(in));
}

ProblemFile parse_problem_text(const std::string& text) {
  std::istringstream in(text);
  return parse_problem_file(in);
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file " + path);
  return parse_problem_file(in);
}

PiecewiseCurve build_reference_curve(const ProblemFile& problem,
                                     const ControlSystem& sys) {
  if (!problem.curve) {
    throw InvalidInputError("problem file has no [curve] section");
  }
  const ProblemFile::CurveSection& section = *problem.curve;
  const int r = sys.control_dim();

  const std::vector<std::string> slots = {"t"};
  std::vector<std::vector<CompiledExpr>> compiled;
  for (const std::vector<std::string>& arc_exprs : section.controls) {
    std::vector<CompiledExpr> per_arc;
    for (const std::string& text : arc_exprs) {
      per_arc.emplace_back(parse_expression(text), slots,
                           problem.system.parameters);
    }
    compiled.push_back(std::move(per_arc));
  }

  ZProvider provider = [&compiled, r](int arc, double t) -> Eigen::VectorXd {
    Eigen::VectorXd z(r);
    const double slot_values[1] = {t};
    for (int a = 0; a < r; ++a) {
      z[a] = compiled[static_cast<std::size_t>(arc)][static_cast<std::size_t>(a)].eval(
          slot_values);
    }
    return z;
  };

  const int density = section.grid_density.value_or(problem.numerics.grid_density);
  return integrate_admissible(sys, section.q0, section.t_start, section.t_end,
                              section.corner_times, provider, density);
}

namespace {

const std::map<std::string, std::string>& builtin_table() {
  static const std::map<std::string, std::string> table = {
      {"appb1", R"ini(# Unit-speed steering, two straight legs meeting at a right angle.
[system]
n = 2
r = 1
states = [x, y]
controls = [z1]
psi = ["v*cos(z1)", "v*sin(z1)"]

[params]
v = 1
pi = 3.141592653589793

[curve]
t_start = -1
t_end = 1
q0 = [0, -1]
corner_times = [0]
controls = ["pi/2", "0"]
)ini"},
      {"appb1-arc1", R"ini(# First leg of appb1: due north along the y axis.
[system]
n = 2
r = 1
states = [x, y]
controls = [z1]
psi = ["v*cos(z1)", "v*sin(z1)"]

[params]
v = 1
pi = 3.141592653589793

[curve]
t_start = -1
t_end = 0
q0 = [0, -1]
controls = ["pi/2"]
)ini"},
      {"appb1-arc2", R"ini(# Second leg of appb1: due east along the x axis.
[system]
n = 2
r = 1
states = [x, y]
controls = [z1]
psi = ["v*cos(z1)", "v*sin(z1)"]

[params]
v = 1
pi = 3.141592653589793

[curve]
t_start = 0
t_end = 1
q0 = [0, 0]
controls = ["0"]
)ini"},
      {"appb2", R"ini(# Quartic drift in the first coordinate; the drift vanishes on the
# first leg (z = a*t) and the velocity jumps at t = 1.
[system]
n = 2
r = 1
states = [x, y]
controls = [z1]
psi = ["(z1^2 - a^2*t^2)^2 / v^3", "z1"]

[params]
a = 1
v = 1

[curve]
t_start = 0.25
t_end = 2
q0 = [0, -0.46875]
corner_times = [1]
controls = ["a*t", "0"]
)ini"},
      {"appb2-arc1", R"ini(# First leg of appb2: the control tracks a*t and the drift vanishes.
[system]
n = 2
r = 1
states = [x, y]
controls = [z1]
psi = ["(z1^2 - a^2*t^2)^2 / v^3", "z1"]

[params]
a = 1
v = 1

[curve]
t_start = 0.25
t_end = 1
q0 = [0, -0.46875]
controls = ["a*t"]
)ini"},
      {"appb2-arc2", R"ini(# Second leg of appb2: zero control, pure drift in x.
[system]
n = 2
r = 1
states = [x, y]
controls = [z1]
psi = ["(z1^2 - a^2*t^2)^2 / v^3", "z1"]

[params]
a = 1
v = 1

[curve]
t_start = 1
t_end = 2
q0 = [0, 0]
controls = ["0"]
)ini"},
      {"appb3", R"ini(# Third state couples to the first control through a factor that is
# flat at t = 0 and exactly zero for t >= 0.
[system]
n = 3
r = 2
states = [q1, q2, q3]
controls = [z1, z2]
psi = ["z1", "z2", "flatstep(t)*z1"]

[curve]
t_start = -1
t_end = 1
q0 = [0, 0, 0]
controls = [["1", "t"]]
)ini"},
      {"freeparticle", R"ini(# Free particle: straight lines extremize the kinetic action.
[system]
n = 1
r = 1
states = [x]
controls = [z]
psi = ["z"]
lagrangian = "z^2 / 2"

[curve]
t_start = 0
t_end = 1
q0 = [0]
controls = ["1"]

[solve]
t_start = 0
t_end = 1
q_start = [0]
q_end = [1]
p_seed = [0.3]
z_seeds = [[0.3]]
)ini"},
      {"doublewell", R"ini(# Double-well control cost: the broken tent with one corner is a
# zero-cost extremal between equal endpoints.
[system]
n = 1
r = 1
states = [x]
controls = [z]
psi = ["z"]
lagrangian = "(z^2 - 1)^2"

[curve]
t_start = 0
t_end = 1
q0 = [0]
corner_times = [0.5]
controls = ["1", "-1"]

[solve]
t_start = 0
t_end = 1
q_start = [0]
q_end = [0]
corners = 1
p_seed = [0.1]
corner_time_seeds = [0.4]
z_seeds = [[1], [-1]]
)ini"},
      {"timecost", R"ini(# Unit-speed steering with an inert time cost, posed both intrinsically
# and extrinsically; the solver reaches the straight eastward path.
[system]
n = 2
r = 1
states = [x, y]
controls = [z1]
psi = ["v*cos(z1)", "v*sin(z1)"]
lagrangian = "1"

[params]
v = 1
pi = 3.141592653589793

[extrinsic]
free_lagrangian = "1"
constraints = ["xdot^2 + ydot^2 - v^2"]

[curve]
t_start = 0
t_end = 1
q0 = [0, 0]
controls = ["0"]

[solve]
t_start = 0
t_end = 1
q_start = [0, 0]
q_end = [1, 0]
p_seed = [1, 0.1]
z_seeds = [[0]]
)ini"},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, text] : builtin_table()) out.push_back(name);
    return out;
  }();
  return names;
}

const std::string& builtin_problem_text(const std::string& name) {
  const auto& table = builtin_table();
  auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const std::string& candidate : builtin_names()) {
      if (!known.empty()) known += ", ";
      known += candidate;
    }
    throw InvalidInputError("unknown builtin problem " + name + " (known: " + known + ")");
  }
  return it->second;
}

ProblemFile builtin_problem(const std::string& name) {
  return parse_problem_text(builtin_problem_text(name));
}

}  // namespace varcalc

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "valfun/error.hpp"
#include "valfun/problem.hpp"

namespace valfun {

namespace {

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c); };
  while (!s.empty() && issp(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(s[i])) ++i;
  return s.substr(i);
}

std::string unquote(const std::string& v, int line) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (!v.empty() && (v.front() == '"' || v.back() == '"'))
    throw FormatError("line " + std::to_string(line) + ": unbalanced quotes");
  return v;
}

double parse_real(const std::string& text, const std::string& where) {
  std::string t = trim(text);
  if (t == "inf" || t == "+inf") return HUGE_VAL;
  if (t == "-inf") return -HUGE_VAL;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw FormatError(where + ": '" + text + "' is not a number");
  return v;
}

int parse_int(const std::string& text, const std::string& where) {
  double v = parse_real(text, where);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw FormatError(where + ": expected an integer");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw FormatError(where + ": expected true or false");
}

Interval parse_interval(const std::string& text, const std::string& where) {
  auto comma = text.find(',');
  if (comma == std::string::npos) throw FormatError(where + ": expected \"lo,hi\"");
  return {parse_real(text.substr(0, comma), where), parse_real(text.substr(comma + 1), where)};
}

bool reserved_name(const std::string& s) {
  static const std::regex xy("[xy][0-9]+");
  return std::regex_match(s, xy) || s == "exp" || s == "log" || s == "sqrt" || s == "neg";
}

using Section = std::vector<std::pair<std::string, std::pair<std::string, int>>>;

}  // namespace

ParametricProblem load_problem(std::string_view document, const std::map<std::string, double>& overrides) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in{std::string(document)};
  std::string raw;
  int line = 0;
  static const std::regex key_re("[a-z][a-z0-9_]*");
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw FormatError("line " + std::to_string(line) + ": malformed section header");
      current = trim(s.substr(1, s.size() - 2));
      static const std::set<std::string> known{"meta", "dims", "params", "objective", "constraints",
                                               "x_domain", "y_search_box", "flags", "solver"};
      if (!known.count(current)) throw FormatError("line " + std::to_string(line) + ": unknown section [" + current + "]");
      sections[current];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw FormatError("line " + std::to_string(line) + ": expected key = value");
    if (current.empty()) throw FormatError("line " + std::to_string(line) + ": entry outside of a section");
    std::string key = trim(s.substr(0, eq));
    std::string value = unquote(trim(s.substr(eq + 1)), line);
    if (!std::regex_match(key, key_re)) throw FormatError("line " + std::to_string(line) + ": bad key '" + key + "'");
    for (const auto& kv : sections[current])
      if (kv.first == key) throw FormatError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    sections[current].push_back({key, {value, line}});
  }

  auto where = [](const std::string& sec, const std::string& key, int ln) {
    return "line " + std::to_string(ln) + " [" + sec + "] " + key;
  };
  auto lookup = [&](const std::string& sec, const std::string& key) -> const std::pair<std::string, int>* {
    auto it = sections.find(sec);
    if (it == sections.end()) return nullptr;
    for (const auto& kv : it->second)
      if (kv.first == key) return &kv.second;
    return nullptr;
  };

  std::string id = "unnamed";
  if (auto v = lookup("meta", "id")) id = v->first;

  if (!sections.count("dims")) throw FormatError("missing [dims] section");
  auto dim = [&](const char* key, bool required) {
    auto v = lookup("dims", key);
    if (!v) {
      if (required) throw FormatError(std::string("[dims] missing ") + key);
      return 0;
    }
    return parse_int(v->first, where("dims", key, v->second));
  };
  const int n = dim("n", true), m = dim("m", true), q = dim("q", false);
  if (n < 1 || m < 1 || q < 0) throw DimensionMismatch("dims must satisfy n, m >= 1 and q >= 0");
  if (n > 64 || m > 64 || q > 256) throw DimensionMismatch("dims exceed desk-scale limits");
  for (const auto& kv : sections["dims"])
    if (kv.first != "n" && kv.first != "m" && kv.first != "q")
      throw FormatError(where("dims", kv.first, kv.second.second) + ": unknown key");

  std::map<std::string, double> params;
  for (const auto& [key, val] : sections["params"]) {
    if (reserved_name(key)) throw FormatError(where("params", key, val.second) + ": reserved name");
    params[key] = parse_real(val.first, where("params", key, val.second));
    if (!std::isfinite(params[key])) throw FormatError(where("params", key, val.second) + ": must be finite");
  }
  for (const auto& [key, value] : overrides) {
    if (!params.count(key)) throw FormatError("--param names undeclared parameter '" + key + "'");
    if (!std::isfinite(value)) throw FormatError("parameter '" + key + "' must be finite");
    params[key] = value;
  }

  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  for (int j = 1; j <= m; ++j) names.push_back("y" + std::to_string(j));
  for (const auto& kv : params) names.push_back(kv.first);
  expr::VariableTable table(names);

  auto parse_expr = [&](const std::string& sec, const std::string& key) {
    auto v = lookup(sec, key);
    if (!v) throw FormatError("[" + sec + "] missing " + key);
    try {
      return expr::substitute(expr::parse(v->first, table), params);
    } catch (const SyntaxError& e) {
      throw FormatError(where(sec, key, v->second) + ": " + e.what());
    }
  };

  expr::Expression f = parse_expr("objective", "f");
  for (const auto& kv : sections["objective"])
    if (kv.first != "f") throw FormatError(where("objective", kv.first, kv.second.second) + ": unknown key");

  std::vector<expr::Expression> g;
  for (int k = 1; k <= q; ++k) g.push_back(parse_expr("constraints", "g" + std::to_string(k)));
  if (static_cast<int>(sections["constraints"].size()) != q)
    throw DimensionMismatch("[constraints] must list exactly g1..g" + std::to_string(q));

  Box x_domain(n), y_box(m);
  for (const auto& [key, val] : sections["x_domain"]) {
    auto slot = table.find(key);
    if (!slot || *slot >= static_cast<std::size_t>(n))
      throw FormatError(where("x_domain", key, val.second) + ": not an x variable");
    x_domain[*slot] = parse_interval(val.first, where("x_domain", key, val.second));
  }
  std::vector<bool> seen(m, false);
  for (const auto& [key, val] : sections["y_search_box"]) {
    auto slot = table.find(key);
    if (!slot || *slot < static_cast<std::size_t>(n) || *slot >= static_cast<std::size_t>(n + m))
      throw FormatError(where("y_search_box", key, val.second) + ": not a y variable");
    y_box[*slot - n] = parse_interval(val.first, where("y_search_box", key, val.second));
    seen[*slot - n] = true;
  }
  for (int j = 0; j < m; ++j)
    if (!seen[j]) throw FormatError("[y_search_box] missing y" + std::to_string(j + 1));

  Flags flags;
  for (const auto& [key, val] : sections["flags"]) {
    bool b = parse_bool(val.first, where("flags", key, val.second));
    if (key == "concave_in_y") flags.concave_in_y = b;
    else if (key == "separable_xy") flags.separable_xy = b;
    else if (key == "restricted_sup_compactness_assumed") flags.restricted_sup_compactness_assumed = b;
    else throw FormatError(where("flags", key, val.second) + ": unknown flag");
  }

  SolverConfig solver;
  for (const auto& [key, val] : sections["solver"]) {
    std::string w = where("solver", key, val.second);
    if (key == "n_starts") solver.n_starts = parse_int(val.first, w);
    else if (key == "grid_density") solver.grid_density = parse_int(val.first, w);
    else if (key == "max_iter") solver.max_iter = parse_int(val.first, w);
    else if (key == "seed") solver.seed = static_cast<std::uint64_t>(parse_int(val.first, w));
    else if (key == "cluster_tol") solver.cluster_tol = parse_real(val.first, w);
    else if (key == "max_clusters") solver.max_clusters = parse_int(val.first, w);
    else if (key == "value_tol") solver.value_tol = parse_real(val.first, w);
    else if (key == "activity_tol") solver.activity_tol = parse_real(val.first, w);
    else throw FormatError(w + ": unknown solver key");
  }
  if (solver.n_starts < 0 || solver.grid_density < 1 || solver.max_iter < 1 || solver.max_clusters < 1 ||
      !(solver.cluster_tol > 0) || !(solver.value_tol > 0) || !(solver.activity_tol > 0))
    throw FormatError("[solver] values out of range");

  return ParametricProblem(id, n, m, f, g, x_domain, y_box, params, flags, solver);
}

// ------------------------------------------------------------------ builtins

namespace {

struct Builtin {
  const char* name;
  const char* document;
};

const Builtin kBuiltins[] = {
    {"kink", R"doc([meta]
id = kink
[dims]
n = 1
m = 1
q = 2
[objective]
f = "y1*(x1+1)"
[constraints]
g1 = "x1 + y1"
g2 = "-x1 - y1 - 5"
[y_search_box]
y1 = "-10,10"
[flags]
concave_in_y = true
[solver]
grid_density = 21
)doc"},
    {"quad", R"doc([meta]
id = quad
[dims]
n = 2
m = 2
q = 0
[objective]
f = "x1*y1 + x2*y2 - (y1^2 + y2^2)/2"
[y_search_box]
y1 = "-10,10"
y2 = "-10,10"
[flags]
concave_in_y = true
)doc"},
    {"sqdist", R"doc([meta]
id = sqdist
[dims]
n = 2
m = 2
q = 0
[objective]
f = "-((y1 - x1)^2 + (y2 - x2)^2)/2"
[y_search_box]
y1 = "-10,10"
y2 = "-10,10"
[flags]
concave_in_y = true
)doc"},
    {"gan2", R"doc([meta]
id = gan2
[dims]
n = 2
m = 2
q = 0
[params]
s1 = 0.5
s2 = 1.5
z1 = 0.2
z2 = -0.3
sbar1 = 0.5
sbar2 = 0.5
[objective]
f = "y1*(x1 + z1 - sbar1) + y2*(x2 + z2 - sbar2) - log(1 + exp(y1*(s1 - sbar1) + y2*(s2 - sbar2))) - log(1 + exp(y1*(x1 + z1 - sbar1) + y2*(x2 + z2 - sbar2)))"
[y_search_box]
y1 = "-2,2"
y2 = "-2,2"
[flags]
concave_in_y = true
)doc"},
    {"gan2c", R"doc([meta]
id = gan2c
[dims]
n = 2
m = 2
q = 2
[params]
s1 = 0.5
s2 = 1.5
z1 = 0.2
z2 = -0.3
sbar1 = 0.5
sbar2 = 0.5
[objective]
f = "y1*(x1 + z1 - sbar1) + y2*(x2 + z2 - sbar2) - log(1 + exp(y1*(s1 - sbar1) + y2*(s2 - sbar2))) - log(1 + exp(y1*(x1 + z1 - sbar1) + y2*(x2 + z2 - sbar2)))"
[constraints]
g1 = "(y1^2 + y2^2)/2 - 1/2"
g2 = "y1 - 1"
[y_search_box]
y1 = "-2,2"
y2 = "-2,2"
[flags]
concave_in_y = true
)doc"},
    {"budget", R"doc([meta]
id = budget
[dims]
n = 1
m = 1
q = 1
[objective]
f = "-(y1 - 2)^2/2"
[constraints]
g1 = "y1 - x1"
[y_search_box]
y1 = "-10,10"
[flags]
concave_in_y = true
separable_xy = true
)doc"},
};

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& b : kBuiltins) out.emplace_back(b.name);
  return out;
}

std::string builtin_document(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (name == b.name) return b.document;
  throw FormatError("unknown builtin problem '" + std::string(name) + "'");
}

ParametricProblem load_builtin(std::string_view name, const std::map<std::string, double>& overrides) {
  return load_problem(builtin_document(name), overrides);
}

ParametricProblem load_problem_spec(const std::string& name_or_path, const std::map<std::string, double>& overrides) {
  for (const auto& b : kBuiltins)
    if (name_or_path == b.name) return load_problem(b.document, overrides);
  std::ifstream file(name_or_path);
  if (!file) throw FormatError("'" + name_or_path + "' is neither a builtin nor a readable file");
  std::stringstream buf;
  buf << file.rdbuf();
  return load_problem(buf.str(), overrides);
}

}  // namespace valfun

#include "nlhjb/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace nlhjb {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("'" + s + "' is not a finite number");
  }
  return v;
}

long to_long(const std::string& s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("'" + s + "' is not an integer");
  }
  return v;
}

// Accepts 1/k or a decimal.
double to_eps(const std::string& s) {
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    if (trim(s.substr(0, slash)) != "1") throw std::invalid_argument("eps fractions must read 1/k");
    const long k = to_long(trim(s.substr(slash + 1)));
    if (k < 1) throw std::invalid_argument("eps denominator must be positive");
    return 1.0 / static_cast<double>(k);
  }
  return to_double(s);
}

void check_eps(double e) {
  if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  const double inv = 1.0 / e;
  if (std::abs(inv - std::round(inv)) > 1e-9 * inv) {
    throw std::invalid_argument("eps must be the reciprocal of an integer");
  }
}

void check_sigma(double s) {
  if (!(s > 1.0 && s < 2.0)) throw std::invalid_argument("sigma must lie in (1, 2)");
}

void check_ladder(const std::vector<double>& ladder) {
  if (ladder.size() < 3) throw std::invalid_argument("ladder needs at least three discounts");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw std::invalid_argument("discounts must be positive");
    if (i > 0 && !(ladder[i] < ladder[i - 1])) {
      throw std::invalid_argument("ladder must be strictly decreasing");
    }
  }
}

void check_eps_list(const std::vector<double>& eps) {
  if (eps.size() < 3) throw std::invalid_argument("eps_list needs at least three entries");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    check_eps(eps[i]);
    if (i > 0 && !(eps[i] < eps[i - 1])) throw std::invalid_argument("eps_list must be strictly decreasing");
  }
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
}

void check_grid(long n, const char* name) {
  if (n < 8) throw std::invalid_argument(std::string(name) + " must be at least 8");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"preset", [](RunConfig& c, const std::string& v) {
         if (v.empty()) throw std::invalid_argument("preset name is empty");
         c.preset = v;
       }},
      {"dim", [](RunConfig& c, const std::string& v) {
         const long d = to_long(v);
         if (d != 1) throw std::invalid_argument("only dim = 1 grids are supported");
         c.dim = static_cast<int>(d);
       }},
      {"sigma", [](RunConfig& c, const std::string& v) {
         c.sigma = to_double(v);
         check_sigma(c.sigma);
       }},
      {"grid_n", [](RunConfig& c, const std::string& v) {
         const long n = to_long(v);
         check_grid(n, "grid_n");
         c.grid_n = static_cast<int>(n);
       }},
      {"cell_n", [](RunConfig& c, const std::string& v) {
         const long n = to_long(v);
         check_grid(n, "cell_n");
         c.cell_n = static_cast<int>(n);
       }},
      {"controls", [](RunConfig& c, const std::string& v) {
         const long n = to_long(v);
         if (n < 0) throw std::invalid_argument("controls must be nonnegative");
         c.controls = static_cast<int>(n);
       }},
      {"ladder", [](RunConfig& c, const std::string& v) {
         std::vector<double> out;
         for (const auto& item : split_list(v)) out.push_back(to_double(item));
         check_ladder(out);
         c.ladder = std::move(out);
       }},
      {"eps_list", [](RunConfig& c, const std::string& v) {
         std::vector<double> out;
         for (const auto& item : split_list(v)) out.push_back(to_eps(item));
         check_eps_list(out);
         c.eps_list = std::move(out);
       }},
      {"eps", [](RunConfig& c, const std::string& v) {
         c.eps = to_eps(v);
         check_eps(c.eps);
       }},
      {"tol", [](RunConfig& c, const std::string& v) {
         c.tol = to_double(v);
         check_positive(c.tol, "tol");
       }},
      {"effective_tol", [](RunConfig& c, const std::string& v) {
         c.effective_tol = to_double(v);
         check_positive(c.effective_tol, "effective_tol");
       }},
      {"output_dir", [](RunConfig& c, const std::string& v) {
         if (v.empty()) throw std::invalid_argument("output_dir is empty");
         c.output_dir = v;
       }},
      {"schedule_exponent", [](RunConfig& c, const std::string& v) {
         c.schedule_exponent = to_double(v);
         if (!(c.schedule_exponent > 0.0 && c.schedule_exponent < 1.0)) {
           throw std::invalid_argument("schedule_exponent must lie in (0, 1)");
         }
       }},
      {"seed", [](RunConfig& c, const std::string& v) {
         std::uint64_t s = 0;
         const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
         if (ec != std::errc() || ptr != v.data() + v.size()) {
           throw std::invalid_argument("seed must be a nonnegative integer");
         }
         c.seed = s;
       }},
      {"delta_ratio", [](RunConfig& c, const std::string& v) {
         c.delta_ratio = to_double(v);
         if (!(c.delta_ratio >= 1.0)) throw std::invalid_argument("delta_ratio must be at least 1");
       }},
      {"x", [](RunConfig& c, const std::string& v) {
         c.x = to_double(v);
         if (!(c.x >= 0.0 && c.x < 1.0)) throw std::invalid_argument("x must lie in [0, 1)");
       }},
      {"p", [](RunConfig& c, const std::string& v) { c.p = to_double(v); }},
      {"points_per_cell", [](RunConfig& c, const std::string& v) {
         const long n = to_long(v);
         check_grid(n, "points_per_cell");
         c.points_per_cell = static_cast<int>(n);
       }},
      {"anisotropy_table", [](RunConfig& c, const std::string& v) { c.anisotropy_table = v; }},
      {"data_table", [](RunConfig& c, const std::string& v) { c.data_table = v; }},
      {"timing", [](RunConfig& c, const std::string& v) {
         if (v == "on") c.timing = true;
         else if (v == "off") c.timing = false;
         else throw std::invalid_argument("timing must be on or off");
       }},
  };
  return table;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string eps_text(double e) {
  const double k = std::round(1.0 / e);
  if (k >= 1.0 && 1.0 / k == e) return "1/" + std::to_string(static_cast<long>(k));
  return num(e);
}

}  // namespace

void validate_config(const RunConfig& c) {
  try {
    if (c.dim != 1) throw std::invalid_argument("only dim = 1 grids are supported");
    check_sigma(c.sigma);
    check_grid(c.grid_n, "grid_n");
    check_grid(c.cell_n, "cell_n");
    check_grid(c.points_per_cell, "points_per_cell");
    if (c.controls < 0) throw std::invalid_argument("controls must be nonnegative");
    check_ladder(c.ladder);
    check_eps_list(c.eps_list);
    check_eps(c.eps);
    check_positive(c.tol, "tol");
    check_positive(c.effective_tol, "effective_tol");
    if (!(c.schedule_exponent > 0.0 && c.schedule_exponent < 1.0)) {
      throw std::invalid_argument("schedule_exponent must lie in (0, 1)");
    }
    if (!(c.delta_ratio >= 1.0)) throw std::invalid_argument("delta_ratio must be at least 1");
    if (!(c.x >= 0.0 && c.x < 1.0)) throw std::invalid_argument("x must lie in [0, 1)");
    if (!std::isfinite(c.p)) throw std::invalid_argument("p must be finite");
    if (c.output_dir.empty()) throw std::invalid_argument("output_dir is empty");
    if (c.preset == "custom" && (c.anisotropy_table.empty() || c.data_table.empty())) {
      throw std::invalid_argument("custom preset needs anisotropy_table and data_table");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "missing key");
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(lineno, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(lineno, "duplicate key '" + key + "'");
    try {
      it->second(c, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(lineno, key + ": " + e.what());
    }
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file " + path);
  return parse_config(in);
}

void serialize_config(const RunConfig& c, std::ostream& out) {
  out << "preset = " << c.preset << '\n';
  out << "dim = " << c.dim << '\n';
  out << "sigma = " << num(c.sigma) << '\n';
  out << "grid_n = " << c.grid_n << '\n';
  out << "cell_n = " << c.cell_n << '\n';
  out << "controls = " << c.controls << '\n';
  out << "ladder = ";
  for (std::size_t i = 0; i < c.ladder.size(); ++i) out << (i ? "," : "") << num(c.ladder[i]);
  out << "\neps_list = ";
  for (std::size_t i = 0; i < c.eps_list.size(); ++i) out << (i ? "," : "") << eps_text(c.eps_list[i]);
  out << "\neps = " << eps_text(c.eps) << '\n';
  out << "tol = " << num(c.tol) << '\n';
  out << "effective_tol = " << num(c.effective_tol) << '\n';
  out << "output_dir = " << c.output_dir << '\n';
  out << "schedule_exponent = " << num(c.schedule_exponent) << '\n';
  out << "seed = " << c.seed << '\n';
  out << "delta_ratio = " << num(c.delta_ratio) << '\n';
  out << "x = " << num(c.x) << '\n';
  out << "p = " << num(c.p) << '\n';
  out << "points_per_cell = " << c.points_per_cell << '\n';
  if (!c.anisotropy_table.empty()) out << "anisotropy_table = " << c.anisotropy_table << '\n';
  if (!c.data_table.empty()) out << "data_table = " << c.data_table << '\n';
  out << "timing = " << (c.timing ? "on" : "off") << '\n';
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  serialize_config(c, out);
  return out.str();
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nlhjb

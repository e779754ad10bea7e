#pragma once

#include "analysis.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tiga {

struct RunConfig {
  std::string section;
  std::string case_name = "poisson2d";
  int p = 2;
  int r = -1;  // -1: same as p
  int h_t_divisions = 1;
  std::vector<int> mesh_levels = {8, 16, 32};
  int quad_boost = 0;
  double geo_precision = 0.0;
  std::uint64_t seed = 0;
  std::string output_path = "results.csv";
  int threads = 1;

  int degree_r() const { return r < 0 ? p : r; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

inline long long parse_integer(const std::string& v, const std::string& origin, int line) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    // accept 1e7 style counts
    const double d = std::stod(v, &pos);
    if (pos != v.size() || d != std::floor(d) || std::abs(d) > 9e15) throw std::invalid_argument(v);
    out = static_cast<long long>(d);
  } catch (const std::exception&) {
    config_fail(origin, line, "expected an integer, got '" + v + "'");
  }
  return out;
}

inline double parse_real(const std::string& v, const std::string& origin, int line) {
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    config_fail(origin, line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) config_fail(origin, line, "expected a number, got '" + v + "'");
  return out;
}

}  // namespace detail

inline bool known_case(const std::string& name) {
  return name == "poisson2d" || name == "poisson2d_distorted" || name == "plate" || name == "poisson3d";
}

inline void validate(const RunConfig& c, const std::string& origin, int line) {
  if (!known_case(c.case_name)) detail::config_fail(origin, line, "unknown case '" + c.case_name + "'");
  if (c.p < 1 || c.p > 6) detail::config_fail(origin, line, "p must lie in [1, 6]");
  if (c.degree_r() < 1 || c.degree_r() > c.p) detail::config_fail(origin, line, "r must lie in [1, p]");
  if (c.h_t_divisions < 1) detail::config_fail(origin, line, "h_t_divisions must be positive");
  if (c.mesh_levels.empty() || c.mesh_levels.size() > 8)
    detail::config_fail(origin, line, "mesh_levels needs between 1 and 8 entries");
  for (int n : c.mesh_levels)
    if (n < 1 || n > 1024) detail::config_fail(origin, line, "mesh level out of range: " + std::to_string(n));
  if (c.quad_boost < 0 || c.quad_boost > 8) detail::config_fail(origin, line, "quad_boost must lie in [0, 8]");
  if (c.geo_precision < 0.0) detail::config_fail(origin, line, "geo_precision must be nonnegative");
  if (c.threads < 1) detail::config_fail(origin, line, "threads must be positive");
}

// key = value lines; keys before the first [section] are defaults for every section;
// without sections the defaults form the single run
inline std::vector<RunConfig> parse_config(std::istream& in, const std::string& origin = "config") {
  RunConfig defaults;
  std::vector<RunConfig> runs;
  std::vector<int> run_lines;
  RunConfig* cur = &defaults;
  std::string raw;
  int line = 0;
  auto set = [&](RunConfig& c, const std::string& key, const std::string& v) {
    if (key == "case_name") {
      c.case_name = v;
    } else if (key == "p") {
      c.p = static_cast<int>(detail::parse_integer(v, origin, line));
    } else if (key == "r") {
      c.r = static_cast<int>(detail::parse_integer(v, origin, line));
    } else if (key == "h_t_divisions") {
      c.h_t_divisions = static_cast<int>(detail::parse_integer(v, origin, line));
    } else if (key == "mesh_levels") {
      c.mesh_levels.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) detail::config_fail(origin, line, "empty entry in mesh_levels");
        c.mesh_levels.push_back(static_cast<int>(detail::parse_integer(item, origin, line)));
      }
    } else if (key == "quad_boost") {
      c.quad_boost = static_cast<int>(detail::parse_integer(v, origin, line));
    } else if (key == "geo_precision") {
      c.geo_precision = detail::parse_real(v, origin, line);
    } else if (key == "seed") {
      const long long s = detail::parse_integer(v, origin, line);
      if (s < 0) detail::config_fail(origin, line, "seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output_path") {
      c.output_path = v;
    } else if (key == "threads") {
      c.threads = static_cast<int>(detail::parse_integer(v, origin, line));
    } else {
      detail::config_fail(origin, line, "unknown key '" + key + "'");
    }
  };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) detail::config_fail(origin, line, "malformed section header");
      runs.push_back(defaults);
      runs.back().section = detail::trim(s.substr(1, s.size() - 2));
      run_lines.push_back(line);
      cur = &runs.back();
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) detail::config_fail(origin, line, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq)), value = detail::trim(s.substr(eq + 1));
    if (key.empty()) detail::config_fail(origin, line, "missing key");
    if (value.empty()) detail::config_fail(origin, line, "missing value for '" + key + "'");
    set(*cur, key, value);
  }
  if (runs.empty()) {
    runs.push_back(defaults);
    run_lines.push_back(line);
  }
  for (size_t i = 0; i < runs.size(); ++i) validate(runs[i], origin, run_lines[i]);
  return runs;
}

inline std::vector<RunConfig> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return parse_config(in, path);
}

inline const char* csv_header() {
  return "case,p,r,ht,h,l2,h1,h1_cut,h1_int,area_err,bnd_err,cond_raw,cond_scaled,iters,secs";
}

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<RunRow>& rows) {
  os << csv_header() << '\n';
  for (const auto& r : rows) {
    os << r.case_name << ',' << r.p << ',' << r.r << ',' << r.ht << ',' << format_real(r.h) << ',' << format_real(r.l2)
       << ',' << format_real(r.h1) << ',' << format_real(r.h1_cut) << ',' << format_real(r.h1_int) << ','
       << format_real(r.area_err) << ',' << format_real(r.bnd_err) << ',' << format_real(r.cond_raw) << ','
       << format_real(r.cond_scaled) << ',' << r.iters << ',' << format_real(r.secs) << '\n';
  }
}

inline void write_rates(std::ostream& os, const ConvergenceRecord& rec) {
  char buf[256];
  os << "# least-squares log-log slopes over the finest 3 levels\n";
  std::snprintf(buf, sizeof buf, "%-20s %2s %2s %3s %8s %8s %8s %8s %8s %8s %9s %11s %8s\n", "case", "p", "r", "ht",
                "l2", "h1", "h1_cut", "h1_int", "area", "bnd", "cond_raw", "cond_scaled", "iters");
  os << buf;
  for (const auto& [key, s] : rec.slopes) {
    std::snprintf(buf, sizeof buf, "%-20s %2d %2d %3d %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f %9.3f %11.3f %8.3f\n",
                  std::get<0>(key).c_str(), std::get<1>(key), std::get<2>(key), std::get<3>(key), s.l2, s.h1, s.h1_cut,
                  s.h1_int, s.area_err, s.bnd_err, s.cond_raw, s.cond_scaled, s.iters);
    os << buf;
  }
  for (const auto& r : rec.rows)
    if (!r.failure.empty()) os << "# failed: " << r.case_name << " p=" << r.p << " r=" << r.r << " ht=" << r.ht
                               << " n=" << r.n << ": " << r.failure << '\n';
}

inline std::string rates_path(const std::string& csv_path) {
  std::string base = csv_path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") base.resize(base.size() - 4);
  return base + ".rates.txt";
}

}  // namespace tiga

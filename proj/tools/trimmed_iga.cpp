#include <CLI11.hpp>
#include <tiga/tiga.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace tiga;

namespace {

struct Job {
  const RunConfig* cfg;
  int n;
};

template <class T>
struct case_dim;
template <int Dim>
struct case_dim<ManufacturedCase<Dim>> {
  static constexpr int value = Dim;
};

// calls f(case) with the 2D or 3D manufactured case of that name
template <class F>
auto with_case(const std::string& name, double geo, F&& f) {
  if (name == "poisson2d") return f(case_poisson_2d(false, geo));
  if (name == "poisson2d_distorted") return f(case_poisson_2d(true, geo));
  if (name == "plate") {
    auto mc = case_plate_with_hole();
    mc.geo_precision = geo;
    return f(mc);
  }
  if (name == "poisson3d") {
    auto mc = case_poisson_3d();
    mc.geo_precision = geo;
    return f(mc);
  }
  throw ConfigError("unknown case '" + name + "'");
}

std::vector<RunRow> run_jobs(const std::vector<Job>& jobs, int threads, bool conditioning, bool timing) {
  std::vector<RunRow> rows(jobs.size());
  const auto one = [&](size_t i, int inner) {
    const RunConfig& c = *jobs[i].cfg;
    RunOptions opt;
    opt.quad_boost = c.quad_boost;
    opt.threads = inner;
    opt.seed = c.seed;
    opt.conditioning = conditioning;
    opt.timing = timing;
    rows[i] = with_case(c.case_name, c.geo_precision, [&](const auto& mc) {
      return run_case(mc, c.p, c.degree_r(), c.h_t_divisions, jobs[i].n, opt);
    });
  };
  // rows in parallel when there are several, otherwise element-parallel assembly inside the row
  const int n = static_cast<int>(jobs.size());
  if (threads > 1 && n > 1) {
    parallel_chunks(n, threads, [&](int b, int e, int) {
      for (int i = b; i < e; ++i) one(i, 1);
    });
  } else {
    for (int i = 0; i < n; ++i) one(i, threads);
  }
  return rows;
}

std::vector<Job> expand(const std::vector<RunConfig>& cfgs) {
  std::vector<Job> jobs;
  for (const auto& c : cfgs)
    for (int n : c.mesh_levels) jobs.push_back({&c, n});
  return jobs;
}

void apply_overrides(std::vector<RunConfig>& cfgs, int threads, long long seed) {
  for (auto& c : cfgs) {
    if (threads > 0) c.threads = threads;
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
  }
}

// rates are fitted per section so runs that differ only in geo_precision are not pooled
void write_outputs(const std::string& path, const std::vector<Job>& jobs, const std::vector<RunRow>& rows,
                   const std::vector<RunConfig>& group) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error(path + ": cannot write");
  write_csv(csv, rows);
  std::ofstream rates(rates_path(path));
  for (const auto& c : group) {
    ConvergenceRecord rec;
    for (size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].cfg == &c) rec.rows.push_back(rows[i]);
    fit_record(rec, c.geo_precision);
    if (group.size() > 1) rates << "[" << c.section << "]\n";
    write_rates(rates, rec);
  }
  std::cout << "wrote " << path << " (" << rows.size() << " rows) and " << rates_path(path) << '\n';
}

int cmd_run(const std::string& cfg_path, int threads, long long seed, const std::string& out, bool no_timing) {
  auto cfgs = load_config(cfg_path);
  apply_overrides(cfgs, threads, seed);
  int failed = 0;
  // sections sharing an output path are collected into one file, in config order
  std::vector<std::string> paths;
  std::map<std::string, std::vector<RunConfig>> groups;
  for (const auto& c : cfgs) {
    const std::string p = out.empty() ? c.output_path : out;
    if (!groups.count(p)) paths.push_back(p);
    groups[p].push_back(c);
  }
  for (const auto& p : paths) {
    const auto& group = groups[p];
    const auto jobs = expand(group);
    const auto rows = run_jobs(jobs, group.front().threads, true, !no_timing);
    for (const auto& r : rows)
      if (!r.failure.empty()) {
        ++failed;
        std::cerr << "row failed: " << r.case_name << " p=" << r.p << " r=" << r.r << " n=" << r.n << ": " << r.failure
                  << '\n';
      }
    write_outputs(p, jobs, rows, group);
  }
  return failed == 0 ? 0 : 2;
}

int cmd_condition(const std::string& cfg_path, int threads, long long seed) {
  auto cfgs = load_config(cfg_path);
  apply_overrides(cfgs, threads, seed);
  const auto jobs = expand(cfgs);
  const auto rows = run_jobs(jobs, cfgs.front().threads, true, false);
  std::printf("%-20s %2s %2s %3s %5s %8s %12s %12s %10s\n", "case", "p", "r", "ht", "n", "dofs", "cond_raw",
              "cond_scaled", "ratio");
  for (const auto& r : rows) {
    if (!r.failure.empty()) {
      std::printf("%-20s %2d %2d %3d %5d  failed: %s\n", r.case_name.c_str(), r.p, r.r, r.ht, r.n, r.failure.c_str());
      continue;
    }
    std::printf("%-20s %2d %2d %3d %5d %8d %12.4e %12.4e %10.3e\n", r.case_name.c_str(), r.p, r.r, r.ht, r.n, r.dofs,
                r.cond_raw, r.cond_scaled, r.cond_raw / r.cond_scaled);
  }
  return 0;
}

int cmd_verify(long long seed) {
  bool ok = true;
  for (const auto& c : run_verify(seed < 0 ? 0 : static_cast<std::uint64_t>(seed))) {
    std::printf("%s  %-24s %6.2fs  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.seconds, c.detail.c_str());
    ok = ok && c.passed;
  }
  std::printf("%s\n", ok ? "all checks passed" : "some checks failed");
  return ok ? 0 : 1;
}

int cmd_oracle(const std::string& name, double samples, long long seed) {
  const auto n = static_cast<long long>(samples);
  const std::uint64_t s = seed < 0 ? 1 : static_cast<std::uint64_t>(seed);
  with_case(name, 0.0, [&](const auto& mc) {
    constexpr int Dim = case_dim<std::decay_t<decltype(mc)>>::value;
    const MeasureEstimate est = oracle_measure(mc.boundary, mc.map, Box<Dim>{}, n, s);
    std::printf("%.12f +- %.3e  (exact %.12f, %lld samples)\n", est.value, est.stderr_, mc.exact_measure, n);
    return 0;
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trimmed-domain isogeometric analysis driver"};
  app.require_subcommand(1);
  int threads = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "run the convergence sweeps of a config file");
  std::string cfg, out;
  bool no_timing = false;
  run->add_option("config", cfg, "config file")->required();
  run->add_option("--out", out, "CSV path (overrides output_path of every section)");
  run->add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "seed (overrides the config)")->check(CLI::NonNegativeNumber);
  run->add_flag("--no-timing", no_timing, "write 0 in the secs column so reruns are byte-identical");

  auto* cond = app.add_subcommand("condition", "condition numbers of A and DAD for every row of a config");
  cond->add_option("config", cfg, "config file")->required();
  cond->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  cond->add_option("--seed", seed, "seed")->check(CLI::NonNegativeNumber);

  auto* ver = app.add_subcommand("verify", "property-based invariant suite");
  ver->add_option("--seed", seed, "seed")->check(CLI::NonNegativeNumber);

  auto* orc = app.add_subcommand("oracle", "Monte Carlo measure of a case domain");
  std::string case_name = "poisson2d";
  double samples = 1e7;
  orc->add_option("--case", case_name, "case name");
  orc->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);
  orc->add_option("--seed", seed, "seed")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(cfg, threads, seed, out, no_timing);
    if (*cond) return cmd_condition(cfg, threads, seed);
    if (*ver) return cmd_verify(seed);
    if (*orc) return cmd_oracle(case_name, samples, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

#include <gtest/gtest.h>

#include <tiga/config.hpp>

using namespace tiga;

namespace {

std::vector<RunConfig> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "t.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsWithoutSections) {
  const auto runs = parse("# empty\n\n");
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].case_name, "poisson2d");
  EXPECT_EQ(runs[0].p, 2);
  EXPECT_EQ(runs[0].degree_r(), 2);
  EXPECT_EQ(runs[0].h_t_divisions, 1);
  EXPECT_EQ(runs[0].mesh_levels, (std::vector<int>{8, 16, 32}));
  EXPECT_EQ(runs[0].threads, 1);
}

TEST(Config, SectionsInheritLeadingDefaults) {
  const auto runs = parse(
      "p = 3\n"
      "mesh_levels = 4, 8 ,16\n"
      "[a]\n"
      "r = 1   # comment\n"
      "[b]\n"
      "case_name = plate\n"
      "geo_precision = 1e-8\n"
      "seed = 1e3\n"
      "output_path = out/b.csv\n");
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].section, "a");
  EXPECT_EQ(runs[0].p, 3);
  EXPECT_EQ(runs[0].degree_r(), 1);
  EXPECT_EQ(runs[0].mesh_levels, (std::vector<int>{4, 8, 16}));
  EXPECT_EQ(runs[1].case_name, "plate");
  EXPECT_EQ(runs[1].degree_r(), 3);
  EXPECT_DOUBLE_EQ(runs[1].geo_precision, 1e-8);
  EXPECT_EQ(runs[1].seed, 1000u);
  EXPECT_EQ(runs[1].output_path, "out/b.csv");
}

TEST(Config, ErrorsCarryOriginAndLine) {
  EXPECT_EQ(error_of("p = 2\nmesh_level = 8\n"), "t.cfg:2: unknown key 'mesh_level'");
  EXPECT_EQ(error_of("p = two\n"), "t.cfg:1: expected an integer, got 'two'");
  EXPECT_EQ(error_of("\n\np 3\n"), "t.cfg:3: expected 'key = value'");
  EXPECT_EQ(error_of("[open\n"), "t.cfg:1: malformed section header");
  EXPECT_EQ(error_of("mesh_levels = 8,,16\n"), "t.cfg:1: empty entry in mesh_levels");
  EXPECT_EQ(error_of("p = 2.5\n"), "t.cfg:1: expected an integer, got '2.5'");
  EXPECT_EQ(error_of("geo_precision = 1e-8x\n"), "t.cfg:1: expected a number, got '1e-8x'");
  EXPECT_EQ(error_of("seed =\n"), "t.cfg:1: missing value for 'seed'");
}

TEST(Config, RangeValidationReportsTheSection) {
  EXPECT_EQ(error_of("[x]\np = 7\n"), "t.cfg:1: p must lie in [1, 6]");
  EXPECT_EQ(error_of("p = 2\n\n[y]\nr = 3\n"), "t.cfg:3: r must lie in [1, p]");
  EXPECT_EQ(error_of("case_name = sphere\n"), "t.cfg:1: unknown case 'sphere'");
  EXPECT_EQ(error_of("mesh_levels = 8, 2048\n"), "t.cfg:1: mesh level out of range: 2048");
  EXPECT_EQ(error_of("h_t_divisions = 0\n"), "t.cfg:1: h_t_divisions must be positive");
  EXPECT_EQ(error_of("threads = 0\n"), "t.cfg:1: threads must be positive");
  EXPECT_EQ(error_of("seed = -1\n"), "t.cfg:1: seed must be nonnegative");
  EXPECT_THROW(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST(Csv, HeaderAndRealFormat) {
  EXPECT_STREQ(csv_header(), "case,p,r,ht,h,l2,h1,h1_cut,h1_int,area_err,bnd_err,cond_raw,cond_scaled,iters,secs");
  EXPECT_EQ(format_real(0.1), "1.00000000000000006e-01");
  EXPECT_EQ(format_real(-2.0), "-2.00000000000000000e+00");
  EXPECT_EQ(format_real(NAN), "nan");
  EXPECT_EQ(format_real(INFINITY), "inf");
  EXPECT_EQ(format_real(-INFINITY), "-inf");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, RowsAndRatesFile) {
  RunRow r;
  r.case_name = "poisson2d";
  r.p = 2;
  r.r = 2;
  r.n = 8;
  r.h = 0.5;
  r.l2 = 1e-3;
  r.iters = 12;
  std::ostringstream os;
  write_csv(os, {r});
  std::istringstream in(os.str());
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, csv_header());
  EXPECT_EQ(line.rfind("poisson2d,2,2,1,5.00000000000000000e-01,1.00000000000000002e-03,nan,", 0), 0u);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 14);
  EXPECT_EQ(rates_path("out/run.csv"), "out/run.rates.txt");
  EXPECT_EQ(rates_path("run"), "run.rates.txt");
  ConvergenceRecord rec;
  rec.rows = {r};
  r.failure = "boom";
  rec.rows.push_back(r);
  fit_record(rec, 0.0);
  std::ostringstream rates;
  write_rates(rates, rec);
  EXPECT_NE(rates.str().find("# failed: poisson2d p=2 r=2 ht=1 n=8: boom"), std::string::npos);
}

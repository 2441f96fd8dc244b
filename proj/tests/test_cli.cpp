#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "pspin/cli.hpp"

using namespace pspin;
using namespace pspin::cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pspin");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path, std::ios::binary) << body;
  return path;
}

}  // namespace

TEST(Parsers, Schedules) {
  EXPECT_TRUE(std::holds_alternative<schedule::Homogeneous>(parse_schedule("homogeneous")));
  EXPECT_TRUE(std::holds_alternative<schedule::StepIdeal>(parse_schedule("step")));
  EXPECT_EQ(std::get<schedule::StepDiagonal>(parse_schedule("step-diagonal", 12)).sites, 12);
  EXPECT_EQ(std::get<schedule::StepDiagonal>(parse_schedule("step-diagonal:30")).sites, 30);
  EXPECT_DOUBLE_EQ(std::get<schedule::ResidualStep>(parse_schedule("residual:0.25")).gamma, 0.25);
  EXPECT_DOUBLE_EQ(std::get<schedule::FiniteSlope>(parse_schedule("slope:3")).a, 3.0);
  EXPECT_THROW(parse_schedule("slope"), config_error);
  EXPECT_THROW(parse_schedule("residual:abc"), config_error);
  EXPECT_THROW(parse_schedule("ramp:0.2"), config_error);
}

TEST(Parsers, Paths) {
  EXPECT_TRUE(std::holds_alternative<path::TauEqualsS>(parse_path("tau-eq-s")));
  EXPECT_DOUBLE_EQ(std::get<path::TauPower>(parse_path("tau-power:2.366")).c, 2.366);
  EXPECT_NEAR(std::get<path::TauPower>(parse_path("touching")).c, 2.3659226408, 1e-9);
  EXPECT_DOUBLE_EQ(std::get<path::Ramp>(parse_path("ramp:0.4")).a, 0.4);
  EXPECT_TRUE(std::holds_alternative<path::HomogeneousAxis>(parse_path("homogeneous")));
  EXPECT_THROW(parse_path("ramp:1.5"), domain_error);
  EXPECT_THROW(parse_path("zigzag"), config_error);
}

TEST(Parsers, Disorder) {
  EXPECT_TRUE(parse_disorder("none").none());
  EXPECT_DOUBLE_EQ(std::get<disorder::Bimodal>(parse_disorder("bimodal:0.5").kind).h0, 0.5);
  EXPECT_DOUBLE_EQ(std::get<disorder::Gaussian>(parse_disorder("gaussian:1").kind).sigma, 1.0);
  EXPECT_THROW(parse_disorder("gaussian:-1"), domain_error);
  EXPECT_THROW(parse_disorder("uniform:1"), config_error);
}

TEST(Config, RoundTrip) {
  RunConfig c;
  c.command = "gap-scaling";
  c.p = 5;
  c.s = 0.125;
  c.temperature = 0.01;
  c.schedule = "residual:0.1";
  c.path = "ramp:0.7";
  c.disorder = "gaussian:0.3";
  c.n_list = {8, 16, 24};
  c.strict = true;
  c.out = "x.csv";
  EXPECT_EQ(parse_config(to_json(c).dump()), c);
  EXPECT_EQ(parse_config(to_json(c).dump(2)), c);
}

TEST(Config, UnknownKeyReportsItsLine) {
  try {
    parse_config("{\n  \"p\": 3,\n  \"tempreature\": 0.1\n}");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("tempreature"), std::string::npos);
  }
}

TEST(Config, WrongTypeReportsItsLine) {
  try {
    parse_config("{\n  \"p\": 3,\n\n  \"grid\": \"big\"\n}");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Config, MalformedJsonReportsItsLine) {
  try {
    parse_config("{\n  \"p\": 3,\n  \"s\": ,\n}");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Config, Validation) {
  RunConfig c;
  c.command = "landscape";
  EXPECT_NO_THROW(validate(c));
  c.grid = 50;
  EXPECT_THROW(validate(c), config_error);
  c.grid = 2001;
  c.command = "plot";
  EXPECT_THROW(validate(c), config_error);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto path = temp_file("override.json", R"({"command": "landscape", "s": 0.2, "grid": 201})");
  const auto base = invoke({"run", "--config", path});
  ASSERT_EQ(base.code, ok) << base.err;
  EXPECT_NE(base.out.find("\"s\":0.2"), std::string::npos);
  const auto over = invoke({"run", "--config", path, "--s", "0.9"});
  ASSERT_EQ(over.code, ok) << over.err;
  EXPECT_NE(over.out.find("\"s\":0.9"), std::string::npos);
  EXPECT_NE(over.out.find("\"grid\":201"), std::string::npos);
}

TEST(Cli, BadConfigGivesLinePreciseError) {
  const auto path = temp_file("bad.json", "{\n  \"command\": \"landscape\",\n  \"colour\": 1\n}");
  const auto r = invoke({"run", "--config", path});
  EXPECT_EQ(r.code, invalid);
  EXPECT_NE(r.err.find(path + ":3:"), std::string::npos) << r.err;
}

TEST(Cli, ValidationErrorsExitNonzero) {
  EXPECT_NE(invoke({"landscape", "--grid", "10"}).code, ok);
  EXPECT_NE(invoke({"phase-diagram", "--points", "1"}).code, ok);
  EXPECT_NE(invoke({"gap", "--path", "ramp:2"}).code, ok);
  EXPECT_NE(invoke({"run"}).code, ok);
  EXPECT_NE(invoke({"bogus"}).code, ok);
}

TEST(Cli, CsvLayout) {
  const auto r = invoke({"landscape", "--s", "0.77", "--grid", "201"});
  ASSERT_EQ(r.code, ok) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# pspin landscape");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# config: {", 0), 0u);
  while (std::getline(in, line) && line.rfind("#", 0) == 0) {
  }
  EXPECT_EQ(line, "m,f");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 201);
}

TEST(Cli, JsonIsParseable) {
  const auto r = invoke({"gap", "--path", "touching", "--points", "21", "--format", "json"});
  ASSERT_EQ(r.code, ok) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["config"]["path"], "touching");
  EXPECT_EQ(j["rows"].size(), 21u);
}

TEST(Cli, OutputIsIndependentOfThreadCount) {
  const std::vector<std::string> base = {"phase-diagram", "--points", "21", "--grid", "401"};
  auto one = base, four = base;
  one.insert(one.end(), {"--threads", "1"});
  four.insert(four.end(), {"--threads", "4"});
  const auto a = invoke(one), b = invoke(four);
  ASSERT_EQ(a.code, ok) << a.err;
  ASSERT_EQ(b.code, ok) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(invoke(one).out, a.out);
}

TEST(Cli, StrictPromotesWarnings) {
  const std::vector<std::string> args = {"delta-m", "--disorder", "bimodal:1", "--points", "11", "--grid", "401"};
  const auto lax = invoke(args);
  EXPECT_EQ(lax.code, ok);
  EXPECT_NE(lax.out.find("# warning: no first-order line found"), std::string::npos);
  auto strict_args = args;
  strict_args.push_back("--strict");
  EXPECT_EQ(invoke(strict_args).code, warned);
}

TEST(Cli, WritesToFile) {
  const std::string path = ::testing::TempDir() + "landscape.csv";
  std::remove(path.c_str());
  const auto r = invoke({"landscape", "--grid", "101", "--out", path});
  ASSERT_EQ(r.code, ok) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::string first;
  std::getline(f, first);
  EXPECT_EQ(first, "# pspin landscape");
}

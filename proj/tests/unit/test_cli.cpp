#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

using namespace gylab;
using namespace gylab::cli;

namespace {

const char* kHarmonic = R"([problem]
hamiltonian = harmonic
mass = 1
omega = 1
horizon = pi/2
f1_a = 0
f2_a = 0
b1 = 1
b2 = 0

[numerics]
N = 51
which = gy-an
)";

}  // namespace

TEST(Config, ParsesSectionsAndExpressions) {
  const auto cfg = parse_config(kHarmonic);
  EXPECT_EQ(cfg.problem.hamiltonian, "harmonic");
  EXPECT_DOUBLE_EQ(cfg.problem.horizon, std::numbers::pi / 2);
  EXPECT_EQ(cfg.numerics.points, 51);
  EXPECT_EQ(cfg.numerics.which, "gy-an");
  EXPECT_EQ(cfg.raw.at("problem").at("horizon"), "pi/2");
  EXPECT_DOUBLE_EQ(parse_real("3*pi/4"), 3 * std::numbers::pi / 4);
  EXPECT_DOUBLE_EQ(parse_real("2e-3"), 2e-3);
  EXPECT_THROW(parse_real("two"), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndSections) {
  EXPECT_THROW(parse_config("[problem]\ncolour = red\n"), ConfigError);
  EXPECT_THROW(parse_config("[extra]\nN = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("N = 3\n"), ConfigError);
  // Keys that belong to another Hamiltonian kind are rejected too.
  EXPECT_THROW(parse_config("[problem]\nhamiltonian = free\nomega = 2\n"), ConfigError);
}

TEST(Config, ValidatesNumerics) {
  EXPECT_THROW(parse_config("[numerics]\nN = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[numerics]\nN_list =\n"), ConfigError);
  EXPECT_THROW(parse_config("[numerics]\nN_list = 101, 201, 401\n"), ConfigError);
  EXPECT_THROW(parse_config("[numerics]\nN_list = 101, 200, 401, 801\n"), ConfigError);
  EXPECT_THROW(parse_config("[numerics]\nh_ode = 0.001\node_steps = 100\n"), ConfigError);
  EXPECT_THROW(parse_config("[numerics]\nwhich = nonsense\n"), ConfigError);
  const auto ok = parse_config("[numerics]\nN_list = 11, 21, 41, 81\n");
  EXPECT_EQ(ok.numerics.n_list, (std::vector<Index>{11, 21, 41, 81}));
}

TEST(Config, BuildProblemValidatesPhysics) {
  auto cfg = parse_config(kHarmonic);
  EXPECT_NO_THROW(build_problem(cfg.problem));
  cfg.problem.mass = -1.0;
  EXPECT_THROW(build_problem(cfg.problem), ConfigError);
  const auto bad = parse_config("[problem]\nhamiltonian = quadratic\ndimension = 2\n"
                                "stiffness = 1, 2, 3, 4\n");
  EXPECT_THROW(build_problem(bad.problem), ConfigError);
}

TEST(Output, NumberFormatting) {
  EXPECT_EQ(format_number(3.0), "3");
  EXPECT_EQ(format_number(-2.0), "-2");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.33333333333333331");
  EXPECT_EQ(std::stod(format_number(std::numbers::pi)), std::numbers::pi);
}

TEST(Output, JsonRoundTripAndNulls) {
  Json j;
  j["a"] = 0.1;
  j["b"] = std::numeric_limits<double>::quiet_NaN();
  j["c"] = Json::array({1.0, 2.5});
  j["d"] = 3;
  const std::string text = dump_json(j);
  const auto back = Json::parse(text);
  EXPECT_EQ(back["a"].get<double>(), 0.1);
  EXPECT_TRUE(back["b"].is_null());
  EXPECT_TRUE(back["c"][0].is_number_float());
  EXPECT_TRUE(back["d"].is_number_integer());
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
}

TEST(Output, CsvIsRfc4180) {
  CsvTable t({"name", "value"});
  t.cell(std::string("a,b")).cell(1.5).end_row();
  t.cell(std::string("say \"hi\"")).cell(std::numeric_limits<double>::quiet_NaN()).end_row();
  EXPECT_EQ(t.str(), "name,value\n\"a,b\",1.5\n\"say \"\"hi\"\"\",\n");
  CsvTable short_row({"x", "y"});
  short_row.cell(1.0);
  EXPECT_THROW(short_row.end_row(), std::logic_error);
  EXPECT_EQ(csv_escape("line\nbreak"), "\"line\nbreak\"");
}

TEST(Commands, SolveReportsResidual) {
  const auto out = cmd_solve(parse_config(kHarmonic));
  EXPECT_EQ(out.exit_code, kPass);
  EXPECT_LT(out.report["residual_norm"].get<double>(), 1e-10);
  ASSERT_TRUE(out.csv.has_value());
  std::size_t lines = 0;
  for (char c : *out.csv) lines += c == '\n';
  EXPECT_EQ(lines, 52u);
}

TEST(Commands, VerifyIdentities) {
  const auto cfg = parse_config(kHarmonic);
  for (const char* which : {"gy-discrete", "gy-an", "thm23", "lemma22", "gy-zeta"}) {
    const auto out = cmd_verify(cfg, which);
    EXPECT_EQ(out.exit_code, kPass) << which;
    EXPECT_TRUE(out.report["pass"].get<bool>()) << which;
  }
}

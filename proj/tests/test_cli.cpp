#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "supershift/runner.hpp"

using namespace supershift;
namespace fs = std::filesystem;
using runner::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("supershift_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& body) {
  fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run(const fs::path& cfg, const fs::path& out, std::string sub = "", std::optional<unsigned> threads = {},
        bool exact = false) {
  runner::Options o;
  o.subcommand = std::move(sub);
  o.config = cfg;
  o.out = out;
  o.threads = threads;
  o.exact = exact;
  std::ostringstream log;
  return runner::run(o, log);
}

json summary(const fs::path& out, const std::string& stem) { return json::parse(slurp(out / (stem + ".summary.json"))); }

const fs::path kConfigs{SUPERSHIFT_CONFIG_DIR};

}  // namespace

TEST(ParseRational, Forms) {
  EXPECT_EQ(runner::parse_rational(std::string("1/3")), Rational(1, 3));
  EXPECT_EQ(runner::parse_rational(std::string("6/4")), Rational(3, 2));
  EXPECT_EQ(runner::parse_rational(std::string("-2.5")), Rational(-5, 2));
  EXPECT_EQ(runner::parse_rational(std::string("1e-3")), Rational(1, 1000));
  EXPECT_EQ(runner::parse_rational(std::string("+12")), Rational(12));
  EXPECT_EQ(runner::parse_rational(json(0.7)), Rational(7, 10));
  EXPECT_EQ(runner::parse_rational(json(-3)), Rational(-3));
  EXPECT_THROW(runner::parse_rational(std::string("abc")), config_error);
  EXPECT_THROW(runner::parse_rational(std::string("1/0")), config_error);
  EXPECT_THROW(runner::parse_rational(json::array()), config_error);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(runner::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(runner::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(runner::hex64(0xabcULL), "0000000000000abc");
}

TEST(Section, RejectsUnknownAndMalformedKeys) {
  const json j = json::parse(R"({"N_list": [4, 2], "x": "q", "grid": {"lo": 0, "hi": 1, "step": "1/2"}})");
  EXPECT_THROW(runner::Section(j, "t", {"N_list"}), config_error);
  runner::Section s(j, "t", {"N_list", "x", "grid"});
  EXPECT_THROW(s.n_list("N_list"), config_error);
  EXPECT_THROW(s.rational("x"), config_error);
  EXPECT_THROW(s.integer("missing"), config_error);
  const auto g = s.grid("grid");
  ASSERT_EQ(g.size(), 3U);
  EXPECT_EQ(g[1], Rational(1, 2));
}

TEST(Cli, ExtrapolateCosConverges) {
  const auto out = scratch("extrapolate");
  ASSERT_EQ(run(kConfigs / "extrapolate_cos.json", out), runner::kOk);
  const auto s = summary(out, "extrapolate_cos");
  EXPECT_EQ(s["verdicts"]["tcsp"], "Converging");
  const std::string csv = slurp(out / "extrapolate_cos.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rule,iota,N,a,a_prime,abs_error");
}

TEST(Cli, DivergenceIsExpected) {
  const auto out = scratch("divergence");
  ASSERT_EQ(run(kConfigs / "divergence_abs.json", out), runner::kOk);
  EXPECT_EQ(summary(out, "divergence_abs")["verdicts"]["divergence"], "Diverging");
}

TEST(Cli, SummaryCarriesRequiredFields) {
  const auto out = scratch("summary");
  ASSERT_EQ(run(kConfigs / "kantorovich_linear.json", out), runner::kOk);
  const auto s = summary(out, "kantorovich_linear");
  for (const char* key : {"config_hash", "precision_bits", "wall_time_s", "assertions", "verdicts", "residuals"}) {
    EXPECT_TRUE(s.contains(key)) << key;
  }
  EXPECT_EQ(s["precision_bits"], 256);
  EXPECT_EQ(s["config_hash"], "fnv1a64:" + runner::hex64(runner::fnv1a(slurp(kConfigs / "kantorovich_linear.json"))));
  for (const auto& a : s["assertions"]) EXPECT_TRUE(a["pass"].get<bool>()) << a["name"];
}

TEST(Cli, EmptyConfigIsConfigError) {
  const auto dir = scratch("empty");
  EXPECT_EQ(run(write(dir, "empty.json", ""), dir), runner::kConfigError);
  EXPECT_EQ(run(write(dir, "blank.json", "  \n"), dir), runner::kConfigError);
  EXPECT_FALSE(fs::exists(dir / "empty.summary.json"));
}

TEST(Cli, InvalidConfigsAreRejected) {
  const auto dir = scratch("invalid");
  EXPECT_EQ(run(write(dir, "a.json", R"({"subcommand": "divergence", "N_list": [5], "extra": 1})"), dir),
            runner::kConfigError);
  EXPECT_EQ(run(write(dir, "b.json", R"({"N_list": [5]})"), dir), runner::kConfigError);
  EXPECT_EQ(run(write(dir, "c.json", R"({"subcommand": "nope"})"), dir), runner::kConfigError);
  EXPECT_EQ(run(write(dir, "d.json", "{not json"), dir), runner::kConfigError);
  EXPECT_EQ(run(write(dir, "e.json", R"({"subcommand": "divergence", "N_list": [5], "expect": {"x": 1}})"), dir),
            runner::kConfigError);
  EXPECT_EQ(run(kConfigs / "divergence_abs.json", dir, "taylor"), runner::kConfigError);
  EXPECT_EQ(run(kConfigs / "extrapolate_cos.json", dir, "", {}, true), runner::kConfigError);
  // Precision guard: N = 512 at a = 3 needs more than 256 bits.
  EXPECT_EQ(run(write(dir, "f.json", R"({"subcommand": "extrapolate", "target": "cos", "N_list": [512],
                                        "a_grid": [3], "a_prime_grid": [0]})"),
                dir),
            runner::kConfigError);
}

TEST(Cli, IoErrors) {
  const auto dir = scratch("io");
  EXPECT_EQ(run(dir / "missing.json", dir), runner::kIoError);
  write(dir, "blocker", "x");
  EXPECT_EQ(run(kConfigs / "divergence_abs.json", dir / "blocker" / "out"), runner::kIoError);
}

TEST(Cli, FailedAssertionIsStatusOne) {
  const auto dir = scratch("assert");
  const auto cfg = write(dir, "conv.json", R"({"subcommand": "divergence", "N_list": [5, 11, 21],
                                              "expect": {"verdict": "Diverging"}})");
  EXPECT_EQ(run(cfg, dir), runner::kAssertionFailed);
  const auto s = summary(dir, "conv");
  EXPECT_FALSE(s["assertions"][0]["pass"].get<bool>());
  EXPECT_EQ(s["status"], 1);
}

TEST(Cli, ExactModeWhereSupported) {
  const auto out = scratch("exact");
  ASSERT_EQ(run(kConfigs / "legendre_exp.json", out, "", {}, true), runner::kOk);
  EXPECT_EQ(summary(out, "legendre_exp")["residuals"]["coefficient_identity"]["decimal"], "0");
  ASSERT_EQ(run(kConfigs / "taylor_exp.json", out, "", {}, true), runner::kOk);
  EXPECT_EQ(summary(out, "taylor_exp")["residuals"]["forward_difference_identity"]["decimal"], "0");
}

TEST(Cli, CsvIndependentOfThreadCount) {
  const auto one = scratch("t1");
  const auto eight = scratch("t8");
  for (const char* name : {"periodic_exp", "superosc_xi", "taylor_exp"}) {
    const auto cfg = kConfigs / (std::string(name) + ".json");
    ASSERT_EQ(run(cfg, one, "", 1U), runner::kOk);
    ASSERT_EQ(run(cfg, eight, "", 8U), runner::kOk);
    EXPECT_EQ(slurp(one / (std::string(name) + ".csv")), slurp(eight / (std::string(name) + ".csv"))) << name;
  }
}

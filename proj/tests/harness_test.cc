// Copyright 2026 The hsca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsca/harness.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "hsca/error.hpp"

namespace hsca {
namespace {

const char* kExamplePattern = "nu=1:1,2,3;2:1,2,4 hm=2,3,4";

template <typename Fn>
void expect_code(Errc code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << errc_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

RunConfig config(const std::string& text) { return parse_config(text); }

std::uint64_t choose(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
  return r;
}

TEST(Config, ParsesParamsAndGrid) {
  EXPECT_EQ(parse_params("2,4,3,1,7,2"), (SchemeParams{2, 4, 3, 1, 7, 2}));
  EXPECT_EQ(parse_params(" (3, 5, 4, 2, 11, 2) "), (SchemeParams{3, 5, 4, 2, 11, 2}));
  auto g = parse_grid("2,3,2,1,5,1; 2,4,3,1,7,2;");
  ASSERT_EQ(g.size(), 2U);
  EXPECT_EQ(g[1], (SchemeParams{2, 4, 3, 1, 7, 2}));
  expect_code(Errc::kParseError, [] { parse_params("2,4,3,1,7"); });
  expect_code(Errc::kParseError, [] { parse_params("2,4,x,1,7,2"); });
}

TEST(Config, FlatFileWithOverrides) {
  auto c = config(
      "# campaign\n"
      "mode = verify\n"
      "params = 2,4,3,1,7,2   # worked example\n"
      "\n"
      "dealer_seed = 9\n"
      "format = csv\n");
  EXPECT_EQ(c.mode, "verify");
  EXPECT_TRUE(c.params_set);
  EXPECT_EQ(c.dealer_seed, 9U);
  EXPECT_EQ(c.format, ReportFormat::kCsv);
  ASSERT_EQ(c.campaign_grid().size(), 1U);
  set_option(c, "dealer_seed", "4");
  EXPECT_EQ(c.dealer_seed, 4U);
  EXPECT_EQ(RunConfig{}.campaign_grid(), default_grid());

  expect_code(Errc::kParseError, [] { config("colour = blue\n"); });
  expect_code(Errc::kParseError, [] { config("mode verify\n"); });
  expect_code(Errc::kParseError, [] { config("mode = fly\n"); });
  try {
    config("mode = round\nbudget = lots\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, OnePatternSource) {
  auto c = config("pattern = nu=1:1,2,3;2:1,2,3,4\ndrop_prob = 0.1\n");
  expect_code(Errc::kBadParams, [&] { c.check(); });
  expect_code(Errc::kBadParams, [] { config("drop_prob = 1.5\n").check(); });
}

TEST(PadGradient, Examples) {
  const SchemeParams p{2, 4, 3, 1, 7, 4};
  std::vector<std::uint64_t> three = {1, 2, 3};
  auto a = pad_gradient(three, p);
  EXPECT_EQ(a.symbols.size(), 4U);
  EXPECT_EQ(a.original_length, 3U);
  EXPECT_EQ(payload_values(a.symbols), (std::vector<Symbol>{1, 2, 3, 0}));
  std::vector<std::uint64_t> four = {1, 2, 3, 4};
  EXPECT_EQ(pad_gradient(four, p).symbols.size(), 4U);
  std::vector<std::uint64_t> big = {9};
  EXPECT_EQ(payload_values(pad_gradient(big, p).symbols), (std::vector<Symbol>{2, 0}));
}

TEST(PadGradient, RoundTripThroughFile) {
  const std::string path = ::testing::TempDir() + "hsca_gradients.txt";
  {
    std::ofstream out(path);
    out << "1,2,3\n6,6,6\n";
  }
  auto c = config("params = 2,4,3,1,7,4\n");
  c.gradient_file = path;
  auto res = cmd_round(c);
  EXPECT_EQ(res.exit_code, kExitPass);
  const auto& t = res.report["transcript"];
  EXPECT_EQ(t["output"], Json::parse("[0, 1, 2]"));
  EXPECT_EQ(t["decoded"], Json::parse("[0, 1, 2, 0]"));

  c.params = SchemeParams{2, 4, 3, 1, 7, 2};
  expect_code(Errc::kShapeMismatch, [&] { cmd_round(c); });
  std::remove(path.c_str());
}

TEST(CmdRound, WorkedExample) {
  auto c = config(std::string("params = 2,4,3,1,7,2\npattern = ") + kExamplePattern + "\n");
  auto res = cmd_round(c);
  EXPECT_EQ(res.exit_code, kExitPass);
  EXPECT_EQ(res.report["exact_decodes"], 1);
  const auto& t = res.report["transcript"];
  std::vector<std::string> keys;
  for (const auto& [k, v] : t.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"params", "pattern", "uploads", "dealer",
                                            "inter_helper", "recovered", "responses",
                                            "decoded", "expected", "output", "exact"}));
  EXPECT_EQ(t["decoded"], t["expected"]);
  EXPECT_EQ(t["pattern"]["literal"], kExamplePattern);
  EXPECT_EQ(t["uploads"].size(), 8U);
  EXPECT_EQ(t["uploads"][0]["k"], 1);
  EXPECT_EQ(t["uploads"][1]["n"], 2);
  EXPECT_EQ(t["inter_helper"].size(), 6U);
  EXPECT_EQ(t["responses"].size(), 4U);
  for (const auto& u : t["uploads"]) {
    for (const auto& v : u["payload"]) EXPECT_LT(v.get<int>(), 7);
  }
  // X_{1,4} and X_{2,3} were dropped.
  EXPECT_FALSE(t["uploads"][3]["delivered"]);
  EXPECT_FALSE(t["uploads"][6]["delivered"]);
  EXPECT_TRUE(t["uploads"][2]["delivered"]);
  EXPECT_EQ(t["recovered"].size(), 2U);

  const std::string csv = res.render(ReportFormat::kCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "kind,a,b,c,flag,payload");
}

TEST(CmdRound, NoDropsAndManyRounds) {
  auto full = cmd_round(config("params = 2,4,3,1,7,2\ndrop_prob = 0\n"));
  EXPECT_EQ(full.report["transcript"]["pattern"]["literal"], "nu=1:1,2,3,4;2:1,2,3,4 hm=1,2,3,4");
  EXPECT_TRUE(full.report["transcript"]["exact"]);
  EXPECT_EQ(full.report["transcript"]["inter_helper"].size(), 0U);

  auto many = cmd_round(config("params = 3,5,4,2,11,2\ndrop_prob = 0.3\nrounds = 1000\n"));
  EXPECT_EQ(many.report["exact_decodes"], 1000);
  EXPECT_EQ(many.exit_code, kExitPass);
}

TEST(CmdRound, RejectsInfeasibleConfig) {
  expect_code(Errc::kInfeasible, [] { cmd_round(config("params = 2,4,2,2,7,2\n")); });
  expect_code(Errc::kTooFewReceivers,
              [] { cmd_round(config("params = 2,4,3,1,7,2\npattern = nu=1:1,2;2:1,2,3\n")); });
}

TEST(CmdVerify, WorkedParameters) {
  auto res = cmd_verify(config("params = 2,4,3,1,7,2\n"));
  EXPECT_EQ(res.exit_code, kExitPass);
  EXPECT_TRUE(res.report["pass"]);
  const auto& pt = res.report["points"][0];
  EXPECT_EQ(pt["status"], "pass");
  EXPECT_EQ(pt["patterns"], 25);
  // Survivor sets: every Nr+ subset of each pattern's active helpers.
  std::uint64_t expected = 0;
  for (const auto& nu : enumerate_patterns(SchemeParams{2, 4, 3, 1, 7, 2})) {
    const int u = static_cast<int>(nu.active_helpers().size());
    for (int s = 3; s <= u; ++s) expected += choose(u, s);
  }
  EXPECT_EQ(pt["survivor_sets"], expected);
  EXPECT_GE(expected, 25U * 2U);
  EXPECT_EQ(pt["decode_checks"], expected * 20U);
  EXPECT_EQ(pt["rates"]["R_X"]["exact"], "1/2");
  EXPECT_TRUE(pt["failures"].empty());
}

TEST(CmdVerify, InfeasibleIsReportedNotFailed) {
  auto res = cmd_verify(config("grid = 2,3,2,1,5,1; 2,4,2,2,7,2\n"));
  EXPECT_EQ(res.exit_code, kExitPass);
  EXPECT_EQ(res.report["points"][0]["status"], "pass");
  const auto& bad = res.report["points"][1];
  EXPECT_EQ(bad["status"], "infeasible");
  EXPECT_TRUE(bad["witness"]["contradiction"]);
  EXPECT_EQ(bad["witness"]["decoded_information"]["exact"], "2");
}

TEST(CmdVerify, InvalidPointAndBudget) {
  auto res = cmd_verify(config("grid = 2,4,3,1,5,2\n"));
  EXPECT_EQ(res.exit_code, kExitInvalid);
  EXPECT_EQ(res.report["points"][0]["status"], "invalid");
  expect_code(Errc::kBudgetExceeded, [] { cmd_verify(config("grid = 2,4,3,1,7,2\nbudget = 10\n")); });
  EXPECT_EQ(exit_code_for(Errc::kBudgetExceeded), kExitBudget);
  EXPECT_EQ(exit_code_for(Errc::kInfeasible), kExitInvalid);
}

TEST(CmdVerify, Deterministic) {
  auto c = config("grid = 2,3,2,1,5,1\ndraws = 5\n");
  EXPECT_EQ(cmd_verify(c).render(ReportFormat::kJson), cmd_verify(c).render(ReportFormat::kJson));
  EXPECT_EQ(cmd_verify(c).render(ReportFormat::kCsv), cmd_verify(c).render(ReportFormat::kCsv));
  auto r = cmd_round(config("params = 3,5,4,2,11,2\ndrop_prob = 0.2\nseed = 4\n"));
  auto s = cmd_round(config("params = 3,5,4,2,11,2\ndrop_prob = 0.2\nseed = 4\n"));
  EXPECT_EQ(r.render(ReportFormat::kJson), s.render(ReportFormat::kJson));
}

TEST(CmdRates, Examples) {
  auto res = cmd_rates(config("grid = 2,4,3,1,7,2; 2,5,4,1,11,3; 2,5,4,3,11,1; 2,4,2,2,7,2\n"));
  EXPECT_EQ(res.exit_code, kExitPass);
  const auto& pts = res.report["points"];
  EXPECT_EQ(pts[0]["R_X"]["exact"], "1/2");
  EXPECT_EQ(pts[0]["R_Y"]["decimal"], "0.500000");
  EXPECT_EQ(pts[1]["R_X"]["exact"], "1/3");
  EXPECT_EQ(pts[1]["R_Y"]["exact"], "1/3");
  EXPECT_EQ(pts[2]["R_X"]["exact"], "1");
  EXPECT_EQ(pts[2]["R_Y"]["exact"], "1");
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(pts[i]["equal"]);
  EXPECT_EQ(pts[3]["status"], "infeasible");
  EXPECT_EQ(res.csv_rows[1][7], "1/3");
}

TEST(CmdLeakage, ExhaustiveWorkedParameters) {
  auto res = cmd_leakage(config("mode = leakage\nparams = 2,4,3,1,7,2\n"));
  EXPECT_EQ(res.exit_code, kExitPass);
  // 25 patterns, 5 collusion sets, 4 user sets, two checks each plus the share check.
  EXPECT_EQ(res.report["queries"], 25U * 5U * (4U * 2U + 1U));
  for (const auto& r : res.report["records"]) EXPECT_EQ(r["value"]["exact"], "0");
}

TEST(CmdLeakage, SingleQuery) {
  auto c = config(std::string("params = 2,4,3,1,7,2\nusers = none\nhelpers = 3\npattern = ") +
                  kExamplePattern + "\n");
  auto res = cmd_leakage(c);
  ASSERT_EQ(res.report["records"].size(), 3U);
  const auto& h = res.report["records"][0];
  EXPECT_EQ(h["check"], "helpers");
  EXPECT_EQ(h["helpers"], Json::parse("[3]"));
  EXPECT_EQ(h["value"]["exact"], "0");
  EXPECT_EQ(h["ranks"]["AC"].get<int>() + h["ranks"]["BC"].get<int>(),
            h["ranks"]["ABC"].get<int>() + h["ranks"]["C"].get<int>());
  EXPECT_FALSE(h["exploratory"]);
}

TEST(CmdLeakage, ExploratoryOverThreshold) {
  auto c = config("params = 2,4,3,1,7,2\nusers = none\nhelpers = 1,2\npattern = all\n");
  auto res = cmd_leakage(c);
  EXPECT_EQ(res.exit_code, kExitPass);
  EXPECT_EQ(res.report["exploratory"], res.report["queries"]);
  bool nonzero = false;
  for (const auto& r : res.report["records"]) {
    EXPECT_TRUE(r["exploratory"]);
    nonzero = nonzero || r["value"]["exact"] != "0";
  }
  EXPECT_TRUE(nonzero);
}

TEST(Report, CsvQuoting) {
  CommandResult r;
  r.csv_header = {"a", "b"};
  r.csv_rows = {{"x,y", "say \"hi\""}};
  EXPECT_EQ(r.render(ReportFormat::kCsv), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
}

}  // namespace
}  // namespace hsca

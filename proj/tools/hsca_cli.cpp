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

// hsca: run rounds, verification campaigns, rate tables and leakage queries.
//
//   hsca round   --params 2,4,3,1,7,2 --pattern "nu=1:1,2,3;2:1,2,4 hm=2,3,4"
//   hsca verify  --grid "2,3,2,1,5,1;2,4,3,1,7,2" --format csv
//   hsca rates   --params 2,5,4,1,11,3
//   hsca leakage --params 2,4,3,1,7,2 --users none --helpers 3
//
// Exit status: 0 pass, 1 verification failure, 2 infeasible or invalid
// config, 3 budget exceeded.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "hsca/error.hpp"
#include "hsca/harness.hpp"

namespace {

struct Override {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr Override kOverrides[] = {
    {"--params", "params", "K,N,Nr,T,q,L"},
    {"--grid", "grid", "parameter tuples separated by ';' (verify, rates)"},
    {"--pattern", "pattern", "pattern literal, e.g. \"nu=1:1,2,3;2:1,2,4 hm=2,3,4\""},
    {"--drop-prob", "drop_prob", "per-link drop probability for sampled patterns"},
    {"--seed", "seed", "pattern sampling seed"},
    {"--dealer-seed", "dealer_seed", "dealer key seed"},
    {"--gradient-seed", "gradient_seed", "gradient and mask seed"},
    {"--gradient-file", "gradient_file", "one comma-separated line of symbols per user"},
    {"--rounds", "rounds", "number of rounds (round)"},
    {"--draws", "draws", "gradient draws per pattern (verify)"},
    {"--users", "users", "user set U: all, none or a list (leakage)"},
    {"--helpers", "helpers", "colluding set T: all, none or a list (leakage)"},
    {"--out", "out", "report path; stdout when empty"},
    {"--format", "format", "json or csv"},
    {"--budget", "budget", "verify work budget"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical secure coded gradient aggregation toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value config file");

  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& o : kOverrides) {
    app.add_option_function<std::string>(
           o.flag, [&overrides, key = o.key](const std::string& v) { overrides.emplace_back(key, v); },
           o.help)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  for (const char* mode : {"round", "verify", "rates", "leakage"}) {
    app.add_subcommand(mode)->fallthrough();
  }
  app.get_subcommand("round")->description("simulate rounds and check the decoded sum");
  app.get_subcommand("verify")->description("exhaustive correctness, rate and leakage campaign");
  app.get_subcommand("rates")->description("measured upload and response rates");
  app.get_subcommand("leakage")->description("rank-based mutual information queries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? hsca::kExitPass : hsca::kExitInvalid;
  }

  try {
    hsca::RunConfig config;
    if (!config_path.empty()) config = hsca::load_config(config_path);
    for (const auto& [key, value] : overrides) hsca::set_option(config, key, value);
    config.mode = app.get_subcommands().front()->get_name();

    const auto start = std::chrono::steady_clock::now();
    const auto result = hsca::run_command(config);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    const std::string text = result.render(config.format);
    if (config.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(config.out);
      if (!out) {
        std::cerr << "cannot write " << config.out << "\n";
        return hsca::kExitInvalid;
      }
      out << text;
    }
    std::cerr << config.mode << ": exit " << result.exit_code << ", " << elapsed.count()
              << " s\n";
    return result.exit_code;
  } catch (const hsca::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hsca::exit_code_for(e.code());
  }
}

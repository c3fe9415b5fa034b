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

// Configuration, campaigns and report serialization behind the CLI.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hsca/error.hpp"
#include "hsca/gfield.hpp"
#include "hsca/leakage.hpp"
#include "hsca/params.hpp"
#include "hsca/patterns.hpp"
#include "hsca/protocol.hpp"
#include "hsca/random.hpp"
#include "hsca/rational.hpp"
#include "json.hpp"

namespace hsca {

using Json = nlohmann::ordered_json;

enum class ReportFormat { kJson, kCsv };

inline std::vector<SchemeParams> default_grid() {
  return {{2, 3, 2, 1, 5, 1}, {2, 4, 3, 1, 7, 2}, {3, 4, 3, 2, 11, 1}, {2, 5, 4, 2, 11, 2}};
}

struct RunConfig {
  std::string mode = "round";
  SchemeParams params{2, 4, 3, 1, 7, 2};
  bool params_set = false;
  std::vector<SchemeParams> grid;  // verify / rates; empty means params or default

  // Pattern source: a literal, or sampling with drop_prob and pattern_seed.
  // For leakage the literal "all" walks every pattern.
  std::optional<std::string> pattern;
  std::optional<double> drop_prob;
  std::uint64_t pattern_seed = 1;

  std::uint64_t dealer_seed = 1;
  std::uint64_t gradient_seed = 1;
  std::optional<std::string> gradient_file;  // one line of integers per user

  int rounds = 1;
  int draws = 20;  // verify: gradient draws per pattern
  std::string users = "all";
  std::string helpers = "all";

  std::string out;
  ReportFormat format = ReportFormat::kJson;
  std::uint64_t budget = 100'000'000;

  void check() const {
    if (pattern && drop_prob) {
      throw Error(Errc::kBadParams, "give either pattern or drop_prob, not both");
    }
    if (drop_prob && (*drop_prob < 0 || *drop_prob >= 1)) {
      throw Error(Errc::kBadParams, "drop_prob must lie in [0, 1)");
    }
    if (rounds < 1 || draws < 1) throw Error(Errc::kBadParams, "rounds and draws must be >= 1");
  }

  std::vector<SchemeParams> campaign_grid() const {
    if (!grid.empty()) return grid;
    if (params_set) return {params};
    return default_grid();
  }
};

namespace detail {

inline std::uint64_t parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  if (s.empty()) throw Error(Errc::kParseError, "empty number");
  for (char c : s) {
    if (c < '0' || c > '9') throw Error(Errc::kParseError, "bad number '" + std::string(s) + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

inline double parse_double(std::string_view s) {
  std::string t(trim(s));
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) throw Error(Errc::kParseError, "bad number '" + t + "'");
  return v;
}

}  // namespace detail

// "K,N,Nr,T,q,L", optionally wrapped in parentheses.
inline SchemeParams parse_params(std::string_view s) {
  s = detail::trim(s);
  if (!s.empty() && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  auto f = detail::split(s, ',');
  if (f.size() != 6) throw Error(Errc::kParseError, "params need K,N,Nr,T,q,L");
  SchemeParams p;
  p.K = detail::parse_int(f[0]);
  p.N = detail::parse_int(f[1]);
  p.Nr = detail::parse_int(f[2]);
  p.T = detail::parse_int(f[3]);
  p.q = static_cast<std::uint32_t>(detail::parse_u64(f[4]));
  p.L = detail::parse_int(f[5]);
  return p;
}

// Grid points separated by ';'.
inline std::vector<SchemeParams> parse_grid(std::string_view s) {
  std::vector<SchemeParams> out;
  for (auto part : detail::split(s, ';')) {
    if (!detail::trim(part).empty()) out.push_back(parse_params(part));
  }
  return out;
}

inline void set_option(RunConfig& c, std::string_view key, std::string_view value) {
  const std::string k(detail::trim(key));
  const std::string v(detail::trim(value));
  if (k == "mode") {
    if (v != "round" && v != "verify" && v != "rates" && v != "leakage") {
      throw Error(Errc::kParseError, "unknown mode '" + v + "'");
    }
    c.mode = v;
  } else if (k == "params") {
    c.params = parse_params(v);
    c.params_set = true;
  } else if (k == "grid") {
    c.grid = parse_grid(v);
  } else if (k == "pattern") {
    c.pattern = v;
  } else if (k == "drop_prob") {
    c.drop_prob = detail::parse_double(v);
  } else if (k == "seed") {
    c.pattern_seed = detail::parse_u64(v);
  } else if (k == "dealer_seed") {
    c.dealer_seed = detail::parse_u64(v);
  } else if (k == "gradient_seed") {
    c.gradient_seed = detail::parse_u64(v);
  } else if (k == "gradient_file") {
    c.gradient_file = v;
  } else if (k == "rounds") {
    c.rounds = detail::parse_int(v);
  } else if (k == "draws") {
    c.draws = detail::parse_int(v);
  } else if (k == "users") {
    c.users = v;
  } else if (k == "helpers") {
    c.helpers = v;
  } else if (k == "out") {
    c.out = v;
  } else if (k == "format") {
    if (v == "json") {
      c.format = ReportFormat::kJson;
    } else if (v == "csv") {
      c.format = ReportFormat::kCsv;
    } else {
      throw Error(Errc::kParseError, "format must be json or csv");
    }
  } else if (k == "budget") {
    c.budget = detail::parse_u64(v);
  } else {
    throw Error(Errc::kParseError, "unknown key '" + k + "'");
  }
}

// key = value lines; '#' starts a comment.
inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (detail::trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::kParseError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_option(base, std::string_view(line).substr(0, eq),
                 std::string_view(line).substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kParseError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

// --- gradient preprocessing ------------------------------------------------

struct PaddedGradient {
  Payload symbols;
  std::size_t original_length = 0;
};

// Zero-pads to the next multiple of Nr - T. Raw values are reduced mod q.
inline PaddedGradient pad_gradient(std::span<const std::uint64_t> raw, const SchemeParams& p) {
  FieldModulus mod(p.q);
  PaddedGradient out;
  out.original_length = raw.size();
  for (auto v : raw) out.symbols.emplace_back(v % p.q, mod);
  const auto parts = static_cast<std::size_t>(p.Nr - p.T);
  while (out.symbols.size() % parts != 0) out.symbols.push_back(FieldElement::zero(mod));
  return out;
}

inline Payload truncate_payload(const Payload& p, std::size_t length) {
  return Payload(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(std::min(length, p.size())));
}

inline std::vector<std::vector<std::uint64_t>> read_gradient_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kParseError, "cannot read " + path);
  std::vector<std::vector<std::uint64_t>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::vector<std::uint64_t> row;
    for (auto f : detail::split(line, ',')) row.push_back(detail::parse_u64(f));
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- JSON helpers -----------------------------------------------------------

inline Json to_json(const SchemeParams& p) {
  return Json{{"K", p.K}, {"N", p.N}, {"Nr", p.Nr}, {"T", p.T}, {"q", p.q}, {"L", p.L}};
}

inline Json to_json(const Payload& p) {
  Json a = Json::array();
  for (const auto& e : p) a.push_back(e.value());
  return a;
}

inline Json one_based(const IndexSet& s) {
  Json a = Json::array();
  for (int v : s) a.push_back(v + 1);
  return a;
}

inline Json pattern_json(const CommPattern& nu) {
  Json receivers = Json::array();
  for (const auto& r : nu.receivers) receivers.push_back(one_based(r));
  return Json{{"literal", format_pattern(nu)},
              {"receivers", receivers},
              {"survivors", one_based(nu.survivors)}};
}

inline Json rational_json(const Rational& r) {
  return Json{{"exact", rational_string(r)}, {"decimal", rational_decimal(r)}};
}

// Inter-helper message components ordered by (from, to, user).
inline std::vector<std::tuple<int, int, int, const Payload*>> sorted_shares(
    const RoundTranscript& tr) {
  std::vector<std::tuple<int, int, int, const Payload*>> msgs;
  for (const auto& m : tr.shares) {
    for (const auto& [k, payload] : m.per_user) msgs.emplace_back(m.from, m.to, k, &payload);
  }
  std::sort(msgs.begin(), msgs.end());
  return msgs;
}

// Full transcript in canonical order: params, pattern, uploads (k,n),
// dealer keys, inter-helper messages (n,i,k), recoveries (k,n),
// responses (n), decoded output.
inline Json transcript_json(const RoundTranscript& tr) {
  Json j;
  j["params"] = to_json(tr.params);
  j["pattern"] = pattern_json(tr.pattern);
  Json up = Json::array();
  for (const auto& m : tr.uploads) {
    up.push_back({{"k", m.user + 1}, {"n", m.helper + 1}, {"delivered", m.delivered},
                  {"payload", to_json(m.payload)}});
  }
  j["uploads"] = up;
  const auto& p = tr.params;
  Json q = Json::array(), z = Json::array();
  for (int n = 0; n < p.N; ++n) {
    for (int jj = 0; jj < p.Nr - 1; ++jj) {
      for (int k = 0; k < p.K; ++k) {
        q.push_back({{"n", n + 1}, {"j", jj + 1}, {"k", k + 1},
                     {"payload", to_json(tr.keys.q(n, jj, k))}});
      }
    }
  }
  for (int i = 0; i < p.N; ++i) {
    for (int n = 0; n < p.N; ++n) {
      for (int k = 0; k < p.K; ++k) {
        z.push_back({{"i", i + 1}, {"n", n + 1}, {"k", k + 1},
                     {"payload", to_json(tr.keys.z(i, n, k))}});
      }
    }
  }
  j["dealer"] = Json{{"Q", q}, {"Z", z}};
  Json ih = Json::array();
  for (const auto& [n, i, k, payload] : sorted_shares(tr)) {
    ih.push_back({{"n", n + 1}, {"i", i + 1}, {"k", k + 1}, {"payload", to_json(*payload)}});
  }
  j["inter_helper"] = ih;
  Json rec = Json::array();
  for (const auto& [kn, payload] : tr.recovered) {
    rec.push_back({{"k", kn.first + 1}, {"n", kn.second + 1}, {"payload", to_json(payload)}});
  }
  j["recovered"] = rec;
  Json resp = Json::array();
  for (const auto& r : tr.responses) {
    resp.push_back({{"n", r.helper + 1}, {"payload", to_json(r.payload)}});
  }
  j["responses"] = resp;
  j["decoded"] = tr.decoded ? to_json(*tr.decoded) : Json();
  return j;
}

// --- command results --------------------------------------------------------

enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitInvalid = 2, kExitBudget = 3 };

inline int exit_code_for(Errc code) {
  return code == Errc::kBudgetExceeded ? kExitBudget : kExitInvalid;
}

struct CommandResult {
  Json report;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  int exit_code = kExitPass;

  std::string render(ReportFormat f) const {
    if (f == ReportFormat::kJson) return report.dump(2) + "\n";
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        const bool quote = cells[i].find_first_of(",\"") != std::string::npos;
        if (!quote) {
          out += cells[i];
          continue;
        }
        out += '"';
        for (char c : cells[i]) {
          if (c == '"') out += '"';
          out += c;
        }
        out += '"';
      }
      out += '\n';
    };
    line(csv_header);
    for (const auto& r : csv_rows) line(r);
    return out;
  }
};

namespace detail {

inline std::string payload_cell(const Payload& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(p[i].value());
  }
  return s;
}

inline CommPattern config_pattern(const RunConfig& c, const SchemeParams& p, int round) {
  if (c.pattern) {
    auto nu = parse_pattern(*c.pattern, p.K);
    validate(nu, p);
    return nu;
  }
  return sample_pattern(p, c.drop_prob.value_or(0.0),
                        derive_seed(c.pattern_seed, static_cast<std::uint64_t>(round)));
}

}  // namespace detail

struct RoundInputs {
  std::vector<Gradient> gradients;
  std::vector<UserRandomness> randomness;
  std::size_t original_length = 0;
};

inline RoundInputs round_inputs(const SchemeContext& ctx, const RunConfig& c, int round) {
  RoundInputs in;
  Rng rng(derive_seed(c.gradient_seed, static_cast<std::uint64_t>(round)));
  in.original_length = static_cast<std::size_t>(ctx.params.L);
  if (c.gradient_file) {
    auto rows = read_gradient_file(*c.gradient_file);
    if (static_cast<int>(rows.size()) != ctx.K()) {
      throw Error(Errc::kShapeMismatch, "gradient file needs one line per user");
    }
    for (int k = 0; k < ctx.K(); ++k) {
      auto padded = pad_gradient(rows[static_cast<std::size_t>(k)], ctx.params);
      if (static_cast<int>(padded.symbols.size()) != ctx.params.L) {
        throw Error(Errc::kShapeMismatch,
                    "user " + std::to_string(k + 1) + " gradient pads to " +
                        std::to_string(padded.symbols.size()) + " symbols, L = " +
                        std::to_string(ctx.params.L));
      }
      in.original_length = padded.original_length;
      in.gradients.push_back(make_gradient(ctx, k, padded.symbols));
    }
  } else {
    for (int k = 0; k < ctx.K(); ++k) in.gradients.push_back(random_gradient(ctx, k, rng));
  }
  for (int k = 0; k < ctx.K(); ++k) in.randomness.push_back(random_randomness(ctx, k, rng));
  return in;
}

// Runs `rounds` independent rounds; the report carries round 0's full
// transcript and a decode tally over all rounds.
inline CommandResult cmd_round(const RunConfig& c) {
  c.check();
  const auto ctx = setup(c.params);
  CommandResult res;
  int exact = 0;
  Json first;
  for (int r = 0; r < c.rounds; ++r) {
    const auto nu = detail::config_pattern(c, ctx.params, r);
    const auto in = round_inputs(ctx, c, r);
    auto keys = dealer_generate(ctx, derive_seed(c.dealer_seed, static_cast<std::uint64_t>(r)));
    const auto tr = run_round(ctx, nu, in.gradients, in.randomness, std::move(keys));
    const Payload expected = gradient_sum(ctx, in.gradients);
    const bool ok = tr.decoded && *tr.decoded == expected;
    exact += ok ? 1 : 0;
    if (r == 0) {
      first = transcript_json(tr);
      first["expected"] = to_json(expected);
      first["output"] = to_json(truncate_payload(*tr.decoded, in.original_length));
      first["exact"] = ok;
      for (const auto& m : tr.uploads) {
        res.csv_rows.push_back({"upload", std::to_string(m.user + 1), std::to_string(m.helper + 1),
                                "", m.delivered ? "1" : "0", detail::payload_cell(m.payload)});
      }
      for (const auto& [n, i, k, payload] : sorted_shares(tr)) {
        res.csv_rows.push_back({"inter_helper", std::to_string(n + 1), std::to_string(i + 1),
                                std::to_string(k + 1), "", detail::payload_cell(*payload)});
      }
      for (const auto& resp : tr.responses) {
        res.csv_rows.push_back({"response", std::to_string(resp.helper + 1), "", "", "",
                                detail::payload_cell(resp.payload)});
      }
      res.csv_rows.push_back({"decoded", "", "", "", ok ? "1" : "0",
                              detail::payload_cell(*tr.decoded)});
    }
  }
  res.csv_header = {"kind", "a", "b", "c", "flag", "payload"};
  res.report["mode"] = "round";
  res.report["rounds"] = c.rounds;
  res.report["exact_decodes"] = exact;
  res.report["transcript"] = std::move(first);
  res.exit_code = exact == c.rounds ? kExitPass : kExitFailure;
  return res;
}

// --- verification campaign ---------------------------------------------------

struct PointReport {
  SchemeParams params;
  std::string status;  // pass | fail | infeasible | invalid
  std::string detail;
  std::uint64_t patterns = 0;
  std::uint64_t survivor_sets = 0;
  std::uint64_t decode_checks = 0;
  std::uint64_t security_queries = 0;
  std::uint64_t lemma_checks = 0;
  std::optional<Rates> rates;
  Rational bound;
  std::vector<std::string> failures;
  std::optional<InfeasibilityWitness> witness;
};

namespace detail {

inline std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace detail

// Upper bound on verify work items for one point: rounds, decodes and
// leakage queries.
inline std::uint64_t verify_work(const SchemeParams& p, int draws) {
  const std::uint64_t patterns = pattern_count(p);
  std::uint64_t survivors = 0, colluders = 0;
  for (int s = p.Nr; s <= p.N; ++s) survivors += detail::binomial(p.N, s);
  for (int t = 0; t <= p.T; ++t) colluders += detail::binomial(p.N, t);
  const std::uint64_t users = std::uint64_t{1} << p.K;
  return patterns * static_cast<std::uint64_t>(draws) * (1 + survivors) +
         patterns * colluders * (2 * users + 2);
}

inline PointReport verify_point(const SchemeParams& p, const RunConfig& c) {
  PointReport rep{p, "pass", "", 0, 0, 0, 0, 0, std::nullopt, Rational(0), {}, std::nullopt};
  check_param_ranges(p);
  if (!p.feasible()) {
    rep.status = "infeasible";
    rep.detail = "Nr <= T";
    if (p.Nr > 1) {
      rep.witness = infeasibility_witness(p);
      if (!rep.witness->contradiction()) rep.failures.push_back("infeasibility witness missing");
    }
    return rep;
  }
  const auto work = verify_work(p, c.draws);
  if (work > c.budget) {
    throw Error(Errc::kBudgetExceeded, p.to_string() + " needs " + std::to_string(work) +
                                           " work items, budget " + std::to_string(c.budget));
  }
  SchemeContext ctx = setup(p);
  rep.bound = optimal_rate(p);
  auto fail = [&](std::string what) {
    if (rep.failures.size() < 50) rep.failures.push_back(std::move(what));
  };
  const auto users = subsets_of(range_set(p.K), 0);
  const auto colluders = subsets_of(range_set(p.N), 0, static_cast<std::size_t>(p.T));
  const auto full_sets = subsets_of(range_set(p.N), static_cast<std::size_t>(p.T),
                                    static_cast<std::size_t>(p.T));

  std::uint64_t index = 0;
  for (const auto& nu : enumerate_patterns(p)) {
    ++rep.patterns;
    const std::string lit = format_pattern(nu);
    const auto survivor_sets = enumerate_survivors(nu, p);
    rep.survivor_sets += survivor_sets.size();
    for (int d = 0; d < c.draws; ++d, ++index) {
      Rng rng(derive_seed(c.gradient_seed, index));
      std::vector<Gradient> w;
      std::vector<UserRandomness> f;
      for (int k = 0; k < p.K; ++k) w.push_back(random_gradient(ctx, k, rng));
      for (int k = 0; k < p.K; ++k) f.push_back(random_randomness(ctx, k, rng));
      const auto tr = run_round(ctx, nu, w, f, dealer_generate(ctx, derive_seed(c.dealer_seed, index)));
      const Payload expected = gradient_sum(ctx, w);
      for (const auto& hm : survivor_sets) {
        std::vector<HelperResponse> arrived;
        for (const auto& r : tr.responses) {
          if (contains(hm, r.helper)) arrived.push_back(r);
        }
        ++rep.decode_checks;
        if (master_decode(ctx, arrived) != expected) {
          fail("decode " + lit + " hm=" + detail::format_index_list(hm));
        }
      }
      const auto rates = measure_rates(tr);
      if (!rep.rates) rep.rates = rates;
      if (rates.rx != rep.bound || rates.ry != rep.bound) fail("rate " + lit);
    }

    const auto lt = build_linear_transcript(ctx, nu);
    for (const auto& t : colluders) {
      for (const auto& u : users) {
        rep.security_queries += 2;
        if (check_security_helpers(lt, u, t).value != Rational(0)) {
          fail("helpers " + lit + " U={" + detail::format_index_list(u) + "} T={" +
               detail::format_index_list(t) + "}");
        }
        if (check_security_master(lt, u, t).value != Rational(0)) {
          fail("master " + lit + " U={" + detail::format_index_list(u) + "} T={" +
               detail::format_index_list(t) + "}");
        }
      }
      ++rep.lemma_checks;
      if (check_lemma2(lt, t).value != Rational(0)) {
        fail("lemma2 " + lit + " T={" + detail::format_index_list(t) + "}");
      }
    }
    for (const auto& t : full_sets) {
      ++rep.security_queries;
      if (response_residual_entropy(lt, t) != Rational(0)) {
        fail("residual " + lit + " T0={" + detail::format_index_list(t) + "}");
      }
    }
  }

  const auto l1 = check_lemma1(ctx);
  rep.lemma_checks += l1.entropy_checks + l1.family_checks;
  for (const auto& v : l1.violations) fail("lemma1 " + v);
  const auto lt = build_linear_transcript(ctx, full_pattern(p));
  for (int k = 0; k < p.K; ++k) {
    for (const auto& s : subsets_of(range_set(p.N), static_cast<std::size_t>(p.Nr))) {
      ++rep.lemma_checks;
      if (upload_information(lt, k, s).value != Rational(p.L)) {
        fail("lemma3 k=" + std::to_string(k + 1) + " S={" + detail::format_index_list(s) + "}");
      }
    }
  }
  if (!rep.failures.empty()) rep.status = "fail";
  return rep;
}

inline Json point_json(const PointReport& r) {
  Json j;
  j["params"] = to_json(r.params);
  j["status"] = r.status;
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (r.witness) {
    j["witness"] = Json{{"forced_T", r.witness->forced.T},
                        {"view_leakage", rational_json(r.witness->view_leakage)},
                        {"decoded_information", rational_json(r.witness->decoded_info)},
                        {"L", r.witness->gradient_length.numerator()},
                        {"contradiction", r.witness->contradiction()}};
  }
  if (r.status == "pass" || r.status == "fail") {
    j["patterns"] = r.patterns;
    j["survivor_sets"] = r.survivor_sets;
    j["decode_checks"] = r.decode_checks;
    j["security_queries"] = r.security_queries;
    j["lemma_checks"] = r.lemma_checks;
    if (r.rates) {
      j["rates"] = Json{{"R_X", rational_json(r.rates->rx)},
                        {"R_Y", rational_json(r.rates->ry)},
                        {"bound", rational_json(r.bound)}};
    }
  }
  j["failures"] = r.failures;
  return j;
}

// Exhaustive campaign over the grid. Wall-clock time is left out so that
// identical configs give identical bytes.
inline CommandResult cmd_verify(const RunConfig& c) {
  c.check();
  CommandResult res;
  res.report["mode"] = "verify";
  res.report["draws"] = c.draws;
  res.report["gradient_seed"] = c.gradient_seed;
  res.report["dealer_seed"] = c.dealer_seed;
  Json points = Json::array();
  bool failed = false, invalid = false;
  res.csv_header = {"K", "N", "Nr", "T", "q", "L", "status", "patterns", "survivor_sets",
                    "decode_checks", "security_queries", "lemma_checks", "R_X", "R_Y",
                    "failures"};
  for (const auto& p : c.campaign_grid()) {
    PointReport rep;
    try {
      rep = verify_point(p, c);
    } catch (const Error& e) {
      if (e.code() == Errc::kBudgetExceeded) throw;
      rep = PointReport{p, "invalid", e.what(), 0, 0, 0, 0, 0, std::nullopt, Rational(0), {},
                        std::nullopt};
    }
    failed = failed || !rep.failures.empty();
    invalid = invalid || rep.status == "invalid";
    points.push_back(point_json(rep));
    res.csv_rows.push_back(
        {std::to_string(p.K), std::to_string(p.N), std::to_string(p.Nr), std::to_string(p.T),
         std::to_string(p.q), std::to_string(p.L), rep.status, std::to_string(rep.patterns),
         std::to_string(rep.survivor_sets), std::to_string(rep.decode_checks),
         std::to_string(rep.security_queries), std::to_string(rep.lemma_checks),
         rep.rates ? rational_string(rep.rates->rx) : "",
         rep.rates ? rational_string(rep.rates->ry) : "", std::to_string(rep.failures.size())});
  }
  res.report["points"] = points;
  res.report["pass"] = !failed && !invalid;
  res.exit_code = failed ? kExitFailure : invalid ? kExitInvalid : kExitPass;
  return res;
}

// Measured rates against the 1/(Nr-T) bound, one row per grid point.
inline CommandResult cmd_rates(const RunConfig& c) {
  c.check();
  CommandResult res;
  res.report["mode"] = "rates";
  Json rows = Json::array();
  res.csv_header = {"K", "N", "Nr", "T", "q", "L", "status", "R_X", "R_Y", "bound", "equal"};
  bool all_equal = true, invalid = false;
  for (const auto& p : c.campaign_grid()) {
    Json row{{"params", to_json(p)}};
    std::vector<std::string> cells = {std::to_string(p.K), std::to_string(p.N),
                                      std::to_string(p.Nr), std::to_string(p.T),
                                      std::to_string(p.q), std::to_string(p.L)};
    try {
      const auto ctx = setup(p);
      RunConfig random_inputs = c;
      random_inputs.gradient_file.reset();
      const auto in = round_inputs(ctx, random_inputs, 0);
      const auto tr = run_round(ctx, detail::config_pattern(c, p, 0), in.gradients,
                                in.randomness, dealer_generate(ctx, c.dealer_seed));
      const auto r = measure_rates(tr);
      const auto bound = optimal_rate(p);
      const bool equal = r.rx == bound && r.ry == bound;
      all_equal = all_equal && equal;
      row["status"] = "feasible";
      row["R_X"] = rational_json(r.rx);
      row["R_Y"] = rational_json(r.ry);
      row["bound"] = rational_json(bound);
      row["equal"] = equal;
      cells.insert(cells.end(), {"feasible", rational_string(r.rx), rational_string(r.ry),
                                 rational_string(bound), equal ? "true" : "false"});
    } catch (const Error& e) {
      const bool infeasible = e.code() == Errc::kInfeasible;
      invalid = invalid || !infeasible;
      row["status"] = infeasible ? "infeasible" : "invalid";
      row["detail"] = e.what();
      cells.insert(cells.end(), {infeasible ? "infeasible" : "invalid", "", "", "", ""});
    }
    rows.push_back(row);
    res.csv_rows.push_back(cells);
  }
  res.report["points"] = rows;
  res.exit_code = !all_equal ? kExitFailure : invalid ? kExitInvalid : kExitPass;
  return res;
}

// --- leakage queries ----------------------------------------------------------

struct LeakageRecord {
  std::string check;  // helpers | master | lemma2
  std::string pattern;
  IndexSet users;
  IndexSet helpers;
  MiResult mi;
  bool exploratory = false;
  bool pass = true;
};

inline Json record_json(const LeakageRecord& r) {
  return Json{{"check", r.check},
              {"pattern", r.pattern},
              {"users", one_based(r.users)},
              {"helpers", one_based(r.helpers)},
              {"ranks", Json{{"AC", r.mi.rank_ac}, {"BC", r.mi.rank_bc},
                             {"ABC", r.mi.rank_abc}, {"C", r.mi.rank_c}}},
              {"value", rational_json(r.mi.value)},
              {"exploratory", r.exploratory},
              {"pass", r.pass}};
}

namespace detail {

// "all", "none" or a 1-based list.
inline std::vector<IndexSet> selection(const std::string& spec, int limit,
                                       std::size_t max_size) {
  if (spec == "all") return subsets_of(range_set(limit), 0, max_size);
  if (spec == "none" || spec.empty()) return {IndexSet{}};
  auto s = parse_index_list(spec);
  check_index_set(s, limit, "index");
  return {s};
}

}  // namespace detail

// U and T come from config.users / config.helpers. With helpers = "all" the
// sets are bounded by T; an explicit helper list larger than T is evaluated
// and flagged exploratory.
inline CommandResult cmd_leakage(const RunConfig& c) {
  c.check();
  const auto ctx = setup(c.params);
  const auto& p = c.params;
  std::vector<CommPattern> patterns;
  if (!c.pattern || *c.pattern == "all") {
    if (c.drop_prob) {
      patterns.push_back(detail::config_pattern(c, p, 0));
    } else {
      patterns = enumerate_patterns(p);
    }
  } else {
    patterns.push_back(detail::config_pattern(c, p, 0));
  }
  const auto user_sets = detail::selection(c.users, p.K, SIZE_MAX);
  const auto helper_sets = detail::selection(c.helpers, p.N, static_cast<std::size_t>(p.T));

  std::vector<LeakageRecord> records;
  for (const auto& nu : patterns) {
    const auto lt = build_linear_transcript(ctx, nu);
    const std::string lit = format_pattern(nu);
    for (const auto& t : helper_sets) {
      const bool exploratory = static_cast<int>(t.size()) > p.T;
      for (const auto& u : user_sets) {
        auto h = exploratory ? helper_leakage(lt, u, t) : check_security_helpers(lt, u, t);
        records.push_back({"helpers", lit, u, t, h, exploratory,
                           exploratory || h.value == Rational(0)});
        auto m = exploratory ? master_leakage(lt, u, t) : check_security_master(lt, u, t);
        records.push_back({"master", lit, u, t, m, exploratory,
                           exploratory || m.value == Rational(0)});
      }
      if (!exploratory) {
        auto l2 = check_lemma2(lt, t);
        records.push_back({"lemma2", lit, {}, t, l2, false, l2.value == Rational(0)});
      }
    }
  }

  CommandResult res;
  res.report["mode"] = "leakage";
  res.report["params"] = to_json(p);
  Json arr = Json::array();
  bool pass = true;
  std::size_t exploratory = 0;
  res.csv_header = {"check", "pattern", "users", "helpers", "rank_AC", "rank_BC",
                    "rank_ABC", "rank_C", "value", "decimal", "exploratory", "pass"};
  for (const auto& r : records) {
    pass = pass && r.pass;
    exploratory += r.exploratory ? 1 : 0;
    arr.push_back(record_json(r));
    res.csv_rows.push_back({r.check, r.pattern, detail::format_index_list(r.users),
                            detail::format_index_list(r.helpers), std::to_string(r.mi.rank_ac),
                            std::to_string(r.mi.rank_bc), std::to_string(r.mi.rank_abc),
                            std::to_string(r.mi.rank_c), rational_string(r.mi.value),
                            rational_decimal(r.mi.value), r.exploratory ? "true" : "false",
                            r.pass ? "true" : "false"});
  }
  res.report["queries"] = records.size();
  res.report["exploratory"] = exploratory;
  res.report["pass"] = pass;
  res.report["records"] = arr;
  res.exit_code = pass ? kExitPass : kExitFailure;
  return res;
}

inline CommandResult run_command(const RunConfig& c) {
  if (c.mode == "round") return cmd_round(c);
  if (c.mode == "verify") return cmd_verify(c);
  if (c.mode == "rates") return cmd_rates(c);
  if (c.mode == "leakage") return cmd_leakage(c);
  throw Error(Errc::kParseError, "unknown mode '" + c.mode + "'");
}

}  // namespace hsca

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

// The four protocol roles: user encoder, trusted dealer, helper and master.
//
// With l = L / (Nr - T), user k splits W_k into Nr-T parts and draws T parts
// of randomness F_k, then sends row n of V * (W_k parts; F_k parts) to helper
// n. The dealer draws Q_{n,j}^{(k)} and gives helper i the keys
// Z_{i,n}^{(k)} = row i of S_n * G~ * Q_n^{(k)}, S_n = V * G_n^{-1}. A helper
// n that missed user k gets X_{k,i} + Z_{i,n}^{(k)} from the helpers i in N_k
// and strips the keys with the inverse of Nr rows of S_n. Every surviving
// helper then forwards the sum of all K uploads it holds.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsca/error.hpp"
#include "hsca/gfield.hpp"
#include "hsca/gfmatrix.hpp"
#include "hsca/params.hpp"
#include "hsca/patterns.hpp"
#include "hsca/random.hpp"
#include "hsca/rational.hpp"

namespace hsca {

// Immutable after setup(); safe to share across concurrent rounds.
struct SchemeContext {
  SchemeParams params;
  FieldModulus mod;
  EvaluationPoints points;
  GfMatrix V;                    // N x Nr
  std::vector<GfMatrix> G;       // G_n, Nr x Nr
  GfMatrix Gt;                   // G~, Nr x (Nr-1)
  std::vector<GfMatrix> S;       // S_n = V G_n^{-1}, N x Nr
  std::vector<GfMatrix> key_map; // S_n G~, N x (Nr-1): Z_{., n} from Q_n
  int l;                         // part length

  int K() const noexcept { return params.K; }
  int N() const noexcept { return params.N; }
  int Nr() const noexcept { return params.Nr; }
  int T() const noexcept { return params.T; }
  int gradient_parts() const noexcept { return params.Nr - params.T; }
};

inline SchemeContext setup(const SchemeParams& p) {
  check_param_ranges(p);
  if (!p.feasible()) {
    throw Error(Errc::kInfeasible,
                p.to_string() + ": Nr <= T, the security and correctness "
                                "constraints cannot both hold");
  }
  FieldModulus mod(p.q);
  if (p.q < static_cast<std::uint32_t>(p.N + p.Nr)) {
    throw Error(Errc::kFieldTooSmall,
                p.to_string() + ": q < N + Nr");
  }
  if (p.L % (p.Nr - p.T) != 0) {
    throw Error(Errc::kBadBlockLength,
                p.to_string() + ": Nr - T does not divide L");
  }
  EvaluationPoints points = make_points(mod, static_cast<std::size_t>(p.N),
                                        static_cast<std::size_t>(p.Nr));
  GfMatrix V = vandermonde(points.helper_points(), static_cast<std::size_t>(p.Nr));
  GfMatrix Gt = extended_g_tilde(points);
  std::vector<GfMatrix> G, S, key_map;
  for (int n = 0; n < p.N; ++n) {
    G.push_back(helper_generator(points, static_cast<std::size_t>(n)));
    S.push_back(mat_mul(V, invert(G.back())));
    key_map.push_back(mat_mul(S.back(), Gt));
  }
  return SchemeContext{p,
                       mod,
                       std::move(points),
                       std::move(V),
                       std::move(G),
                       std::move(Gt),
                       std::move(S),
                       std::move(key_map),
                       p.part_length()};
}

// W_k split into Nr-T parts of l symbols.
struct Gradient {
  int owner = 0;
  std::vector<Payload> parts;

  Payload flatten() const {
    Payload out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  }
};

// F_k split into T parts of l symbols.
struct UserRandomness {
  int owner = 0;
  std::vector<Payload> parts;
};

namespace detail {

inline std::vector<Payload> split_parts(const Payload& flat, int parts, int l) {
  if (static_cast<int>(flat.size()) != parts * l) {
    throw Error(Errc::kShapeMismatch,
                "expected " + std::to_string(parts * l) + " symbols, got " +
                    std::to_string(flat.size()));
  }
  std::vector<Payload> out;
  for (int i = 0; i < parts; ++i) {
    out.emplace_back(flat.begin() + i * l, flat.begin() + (i + 1) * l);
  }
  return out;
}

}  // namespace detail

inline Gradient make_gradient(const SchemeContext& ctx, int k,
                              const Payload& symbols) {
  return {k, detail::split_parts(symbols, ctx.gradient_parts(), ctx.l)};
}

inline UserRandomness make_randomness(const SchemeContext& ctx, int k,
                                      const Payload& symbols) {
  return {k, detail::split_parts(symbols, ctx.T(), ctx.l)};
}

inline Gradient random_gradient(const SchemeContext& ctx, int k, Rng& rng) {
  return make_gradient(
      ctx, k, uniform_payload(rng, static_cast<std::size_t>(ctx.params.L), ctx.mod));
}

inline UserRandomness random_randomness(const SchemeContext& ctx, int k,
                                        Rng& rng) {
  return make_randomness(
      ctx, k,
      uniform_payload(rng, static_cast<std::size_t>(ctx.T() * ctx.l), ctx.mod));
}

// Q and Z tables. Q is indexed (n, j, k), Z is indexed (i, n, k); all
// indices 0-based.
class DealerKeys {
 public:
  DealerKeys(int K, int N, int Nr) : K_(K), N_(N), Nr_(Nr) {
    q_.resize(static_cast<std::size_t>(N * (Nr - 1) * K));
    z_.resize(static_cast<std::size_t>(N * N * K));
  }

  const Payload& q(int n, int j, int k) const { return q_.at(q_index(n, j, k)); }
  Payload& q(int n, int j, int k) { return q_.at(q_index(n, j, k)); }
  const Payload& z(int i, int n, int k) const { return z_.at(z_index(i, n, k)); }
  Payload& z(int i, int n, int k) { return z_.at(z_index(i, n, k)); }

  int users() const noexcept { return K_; }
  int helpers() const noexcept { return N_; }
  int q_per_pair() const noexcept { return Nr_ - 1; }

  std::size_t q_index(int n, int j, int k) const {
    return static_cast<std::size_t>((n * (Nr_ - 1) + j) * K_ + k);
  }
  std::size_t z_index(int i, int n, int k) const {
    return static_cast<std::size_t>((i * N_ + n) * K_ + k);
  }

 private:
  int K_;
  int N_;
  int Nr_;
  std::vector<Payload> q_;
  std::vector<Payload> z_;
};

// Computes every Z from given Q symbols. `q_table` is ordered like
// DealerKeys::q_index.
inline DealerKeys dealer_from_q(const SchemeContext& ctx,
                                const std::vector<Payload>& q_table) {
  const int K = ctx.K(), N = ctx.N(), Nr = ctx.Nr();
  DealerKeys keys(K, N, Nr);
  if (q_table.size() != static_cast<std::size_t>(N * (Nr - 1) * K)) {
    throw Error(Errc::kShapeMismatch, "wrong number of Q symbols");
  }
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      std::vector<Payload> stack;
      for (int j = 0; j < Nr - 1; ++j) {
        keys.q(n, j, k) = q_table[keys.q_index(n, j, k)];
        if (keys.q(n, j, k).size() != static_cast<std::size_t>(ctx.l)) {
          throw Error(Errc::kShapeMismatch, "Q symbol length != l");
        }
        stack.push_back(keys.q(n, j, k));
      }
      GfMatrix block(static_cast<std::size_t>(N), static_cast<std::size_t>(ctx.l), ctx.mod);
      if (Nr > 1) {
        block = mat_mul(ctx.key_map[static_cast<std::size_t>(n)],
                        GfMatrix::from_payloads(ctx.mod, stack));
      }
      for (int i = 0; i < N; ++i) keys.z(i, n, k) = block.row(static_cast<std::size_t>(i));
    }
  }
  return keys;
}

inline DealerKeys dealer_generate(const SchemeContext& ctx, std::uint64_t seed) {
  Rng rng(seed);
  const DealerKeys shape(ctx.K(), ctx.N(), ctx.Nr());
  std::vector<Payload> q_table(
      static_cast<std::size_t>(ctx.N() * (ctx.Nr() - 1) * ctx.K()));
  for (int n = 0; n < ctx.N(); ++n) {
    for (int j = 0; j < ctx.Nr() - 1; ++j) {
      for (int k = 0; k < ctx.K(); ++k) {
        q_table[shape.q_index(n, j, k)] =
            uniform_payload(rng, static_cast<std::size_t>(ctx.l), ctx.mod);
      }
    }
  }
  return dealer_from_q(ctx, q_table);
}

struct UploadMessage {
  int user = 0;
  int helper = 0;
  Payload payload;
  bool delivered = true;
};

struct InterHelperMessage {
  int from = 0;
  int to = 0;
  std::map<int, Payload> per_user;  // k -> M_{from,to}^{(k)}
};

struct HelperResponse {
  int helper = 0;
  Payload payload;
};

inline std::vector<UploadMessage> encode_uploads(const SchemeContext& ctx, int k,
                                                 const Gradient& w,
                                                 const UserRandomness& f) {
  if (static_cast<int>(w.parts.size()) != ctx.gradient_parts() ||
      static_cast<int>(f.parts.size()) != ctx.T()) {
    throw Error(Errc::kShapeMismatch, "gradient/randomness part count");
  }
  std::vector<Payload> stack = w.parts;
  stack.insert(stack.end(), f.parts.begin(), f.parts.end());
  for (const auto& part : stack) {
    if (part.size() != static_cast<std::size_t>(ctx.l)) {
      throw Error(Errc::kShapeMismatch, "part length != l");
    }
  }
  GfMatrix x = mat_mul(ctx.V, GfMatrix::from_payloads(ctx.mod, stack));
  std::vector<UploadMessage> out;
  for (int n = 0; n < ctx.N(); ++n) {
    out.push_back({k, n, x.row(static_cast<std::size_t>(n)), true});
  }
  return out;
}

// Messages helper n sends: to every i != n, the masked uploads of the users
// that n heard from and i did not. Empty messages are not emitted.
inline std::vector<InterHelperMessage> helper_share(
    const SchemeContext& ctx, const DealerKeys& keys, const CommPattern& nu,
    int n, const std::map<int, Payload>& own_uploads) {
  if (!contains(nu.active_helpers(), n)) {
    throw Error(Errc::kStragglerHelper,
                "helper " + std::to_string(n + 1) + " is not in N_UH");
  }
  const IndexSet kn = nu.users_at(n);
  for (int k : kn) {
    if (!own_uploads.contains(k)) {
      throw Error(Errc::kShapeMismatch, "helper is missing a received upload");
    }
  }
  std::vector<InterHelperMessage> out;
  for (int i = 0; i < ctx.N(); ++i) {
    if (i == n) continue;
    InterHelperMessage msg{n, i, {}};
    for (int k : kn) {
      if (nu.delivered(k, i)) continue;
      msg.per_user.emplace(k, add_payload(own_uploads.at(k), keys.z(n, i, k)));
    }
    if (!msg.per_user.empty()) out.push_back(std::move(msg));
  }
  return out;
}

// The Nr senders used to recover user k at a helper: smallest available
// members of N_k.
inline IndexSet recovery_senders(const CommPattern& nu, int k, int Nr,
                                 const std::map<int, Payload>& received) {
  IndexSet chosen;
  for (int i : nu.receivers.at(static_cast<std::size_t>(k))) {
    if (static_cast<int>(chosen.size()) == Nr) break;
    if (received.contains(i)) chosen.push_back(i);
  }
  return chosen;
}

// X^_{k,n} from the payloads M_{i,n}^{(k)} keyed by sender i.
inline Payload helper_recover(const SchemeContext& ctx, const CommPattern& nu,
                              int n, int k,
                              const std::map<int, Payload>& received) {
  if (nu.delivered(k, n)) {
    throw Error(Errc::kBadParams, "helper already holds this upload");
  }
  const IndexSet senders = recovery_senders(nu, k, ctx.Nr(), received);
  if (static_cast<int>(senders.size()) < ctx.Nr()) {
    throw Error(Errc::kNotEnoughShares,
                "helper " + std::to_string(n + 1) + " has " +
                    std::to_string(senders.size()) + " shares of user " +
                    std::to_string(k + 1));
  }
  std::vector<std::size_t> rows(senders.begin(), senders.end());
  GfMatrix decoder = invert(select_rows(ctx.S[static_cast<std::size_t>(n)], rows));
  std::vector<Payload> stack;
  for (int i : senders) stack.push_back(received.at(i));
  GfMatrix shares = GfMatrix::from_payloads(ctx.mod, stack);
  return mat_mul(select_rows(decoder, {0}), shares).row(0);
}

inline HelperResponse helper_respond(const SchemeContext& ctx,
                                     const CommPattern& nu, int n,
                                     const std::map<int, Payload>& own_uploads,
                                     const std::map<int, Payload>& recovered) {
  if (!contains(nu.active_helpers(), n)) {
    throw Error(Errc::kStragglerHelper,
                "helper " + std::to_string(n + 1) + " is not in N_UH");
  }
  Payload y = zero_payload(static_cast<std::size_t>(ctx.l), ctx.mod);
  for (int k = 0; k < ctx.K(); ++k) {
    const auto& source = nu.delivered(k, n) ? own_uploads : recovered;
    auto it = source.find(k);
    if (it == source.end()) {
      throw Error(Errc::kMissingRecovery,
                  "helper " + std::to_string(n + 1) + " lacks user " +
                      std::to_string(k + 1));
    }
    y = add_payload(y, it->second);
  }
  return {n, std::move(y)};
}

// Decodes sum_k W_k from the responses of an explicit responder set D
// (|D| = Nr, sorted).
inline Payload master_decode_from(const SchemeContext& ctx,
                                  const std::vector<HelperResponse>& responses,
                                  const IndexSet& chosen) {
  if (static_cast<int>(chosen.size()) != ctx.Nr()) {
    throw Error(Errc::kNotEnoughResponses, "need exactly Nr responders");
  }
  std::vector<Payload> stack;
  for (int n : chosen) {
    auto it = std::find_if(responses.begin(), responses.end(),
                           [n](const HelperResponse& r) { return r.helper == n; });
    if (it == responses.end()) {
      throw Error(Errc::kNotEnoughResponses,
                  "no response from helper " + std::to_string(n + 1));
    }
    stack.push_back(it->payload);
  }
  std::vector<std::size_t> rows(chosen.begin(), chosen.end());
  GfMatrix u = mat_mul(invert(select_rows(ctx.V, rows)),
                       GfMatrix::from_payloads(ctx.mod, stack));
  Payload out;
  for (int i = 0; i < ctx.gradient_parts(); ++i) {
    auto part = u.row(static_cast<std::size_t>(i));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

inline Payload master_decode(const SchemeContext& ctx,
                             const std::vector<HelperResponse>& responses) {
  IndexSet responders;
  for (const auto& r : responses) responders.push_back(r.helper);
  std::sort(responders.begin(), responders.end());
  responders.erase(std::unique(responders.begin(), responders.end()),
                   responders.end());
  if (static_cast<int>(responders.size()) < ctx.Nr()) {
    throw Error(Errc::kNotEnoughResponses,
                std::to_string(responders.size()) + " responses < Nr=" +
                    std::to_string(ctx.Nr()));
  }
  responders.resize(static_cast<std::size_t>(ctx.Nr()));
  return master_decode_from(ctx, responses, responders);
}

struct RoundTranscript {
  SchemeParams params;
  CommPattern pattern;
  std::vector<UploadMessage> uploads;  // all K*N; `delivered` follows nu
  DealerKeys keys;
  std::vector<InterHelperMessage> shares;
  std::map<std::pair<int, int>, Payload> recovered;  // (k, n) -> X^_{k,n}
  std::vector<HelperResponse> responses;             // n in N_UH
  std::optional<Payload> decoded;

  const Payload& upload(int k, int n) const {
    return uploads.at(static_cast<std::size_t>(k * params.N + n)).payload;
  }
  const HelperResponse* response(int n) const {
    for (const auto& r : responses) {
      if (r.helper == n) return &r;
    }
    return nullptr;
  }
};

// One full round: upload, share and compute, reconstruct from nu.survivors.
inline RoundTranscript run_round(const SchemeContext& ctx, const CommPattern& nu,
                                 const std::vector<Gradient>& gradients,
                                 const std::vector<UserRandomness>& randomness,
                                 DealerKeys keys) {
  validate(nu, ctx.params);
  if (static_cast<int>(gradients.size()) != ctx.K() ||
      static_cast<int>(randomness.size()) != ctx.K()) {
    throw Error(Errc::kShapeMismatch, "need one gradient and randomness per user");
  }
  RoundTranscript tr{ctx.params, nu, {}, std::move(keys), {}, {}, {}, std::nullopt};
  for (int k = 0; k < ctx.K(); ++k) {
    auto msgs = encode_uploads(ctx, k, gradients[static_cast<std::size_t>(k)],
                               randomness[static_cast<std::size_t>(k)]);
    for (auto& m : msgs) {
      m.delivered = nu.delivered(k, m.helper);
      tr.uploads.push_back(std::move(m));
    }
  }
  const IndexSet uh = nu.active_helpers();
  std::vector<std::map<int, Payload>> held(static_cast<std::size_t>(ctx.N()));
  for (const auto& m : tr.uploads) {
    if (m.delivered) held[static_cast<std::size_t>(m.helper)].emplace(m.user, m.payload);
  }
  // inbox[n][k][i] = M_{i,n}^{(k)}
  std::vector<std::map<int, std::map<int, Payload>>> inbox(
      static_cast<std::size_t>(ctx.N()));
  for (int n : uh) {
    for (auto& msg : helper_share(ctx, tr.keys, nu, n, held[static_cast<std::size_t>(n)])) {
      for (const auto& [k, p] : msg.per_user) {
        inbox[static_cast<std::size_t>(msg.to)][k].emplace(msg.from, p);
      }
      tr.shares.push_back(std::move(msg));
    }
  }
  for (int n : uh) {
    std::map<int, Payload> recovered;
    for (int k = 0; k < ctx.K(); ++k) {
      if (nu.delivered(k, n)) continue;
      recovered.emplace(k, helper_recover(ctx, nu, n, k,
                                          inbox[static_cast<std::size_t>(n)][k]));
      tr.recovered.emplace(std::pair{k, n}, recovered.at(k));
    }
    tr.responses.push_back(
        helper_respond(ctx, nu, n, held[static_cast<std::size_t>(n)], recovered));
  }
  std::vector<HelperResponse> arrived;
  for (const auto& r : tr.responses) {
    if (contains(nu.survivors, r.helper)) arrived.push_back(r);
  }
  tr.decoded = master_decode(ctx, arrived);
  return tr;
}

inline Payload gradient_sum(const SchemeContext& ctx,
                            const std::vector<Gradient>& gradients) {
  Payload sum = zero_payload(static_cast<std::size_t>(ctx.params.L), ctx.mod);
  for (const auto& g : gradients) sum = add_payload(sum, g.flatten());
  return sum;
}

struct Rates {
  Rational rx;
  Rational ry;
};

// R_X = max |X| / L and R_Y = max |Y| / L over the transcript.
inline Rates measure_rates(const RoundTranscript& tr) {
  std::size_t lx = 0, ly = 0;
  for (const auto& m : tr.uploads) lx = std::max(lx, m.payload.size());
  for (const auto& r : tr.responses) ly = std::max(ly, r.payload.size());
  return {Rational(static_cast<std::int64_t>(lx), tr.params.L),
          Rational(static_cast<std::int64_t>(ly), tr.params.L)};
}

inline Rational optimal_rate(const SchemeParams& p) {
  return Rational(1, p.Nr - p.T);
}

}  // namespace hsca

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

// Exact leakage verification in the linear-uniform model.
//
// Every protocol variable is a fixed linear map of the source vector
// (W parts, F parts, Q symbols), and every source symbol is i.i.d. uniform
// over GF(q). A linear map of rank r applied to such a vector is uniform over
// a subspace of size q^r, so its q-ary entropy is exactly r. Each of the l
// symbol columns goes through the same coefficient matrix independently,
// which multiplies every entropy by l:
//
//   H(A)       = rank(A) * l
//   I(A;B | C) = [rank(A,C) + rank(B,C) - rank(A,B,C) - rank(C)] * l
//
// BruteForceOracle checks this against a full enumeration of source
// assignments pushed through the concrete protocol code.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
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
#include "hsca/protocol.hpp"
#include "hsca/random.hpp"
#include "hsca/rational.hpp"

namespace hsca {

// Column layout of the source vector: W block, F block, then Q block.
struct SourceLayout {
  int K = 0, N = 0, Nr = 0, T = 0;

  explicit SourceLayout(const SchemeParams& p) : K(p.K), N(p.N), Nr(p.Nr), T(p.T) {}

  int w_slot(int k, int i) const { return k * (Nr - T) + i; }
  int f_slot(int k, int j) const { return K * (Nr - T) + k * T + j; }
  int q_slot(int n, int j, int k) const {
    return K * Nr + (n * (Nr - 1) + j) * K + k;
  }
  // m = K(Nr-T) + KT + NK(Nr-1)
  int dimension() const { return K * Nr + N * K * (Nr - 1); }

  friend bool operator==(const SourceLayout&, const SourceLayout&) = default;
};

struct LinearVar {
  std::string name;
  GfMatrix coeffs;  // rows: scalar slots per column; cols: layout dimension
};

enum class VarKind { kGradient, kRandomness, kSum, kUpload, kKey, kShare, kResponse };

// Names one protocol variable. Indices are 0-based:
//   W_k: (k)   F_k: (k)   W: ()   X_{k,n}: (k, n)   Z_{i,n}^{(k)}: (i, n, k)
//   M_{n,i}^{(k)}: (n, i, k)   Y_n: (n)
struct VarRef {
  VarKind kind;
  int a = 0, b = 0, c = 0;

  static VarRef gradient(int k) { return {VarKind::kGradient, k}; }
  static VarRef randomness(int k) { return {VarKind::kRandomness, k}; }
  static VarRef sum() { return {VarKind::kSum}; }
  static VarRef upload(int k, int n) { return {VarKind::kUpload, k, n}; }
  static VarRef key(int i, int n, int k) { return {VarKind::kKey, i, n, k}; }
  static VarRef share(int n, int i, int k) { return {VarKind::kShare, n, i, k}; }
  static VarRef response(int n) { return {VarKind::kResponse, n}; }

  std::string name() const {
    auto s = [](int v) { return std::to_string(v + 1); };
    switch (kind) {
      case VarKind::kGradient: return "W" + s(a);
      case VarKind::kRandomness: return "F" + s(a);
      case VarKind::kSum: return "W";
      case VarKind::kUpload: return "X" + s(a) + "," + s(b);
      case VarKind::kKey: return "Z" + s(a) + "," + s(b) + "^" + s(c);
      case VarKind::kShare: return "M" + s(a) + "," + s(b) + "^" + s(c);
      case VarKind::kResponse: return "Y" + s(a);
    }
    return "?";
  }

  friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

using VarSet = std::vector<VarRef>;

inline VarSet join(std::initializer_list<VarSet> parts) {
  VarSet out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Coefficient-level version of one protocol round under a fixed pattern.
class LinearTranscript {
 public:
  LinearTranscript(const SchemeContext& ctx, CommPattern nu)
      : params_(ctx.params), layout_(ctx.params), mod_(ctx.mod), l_(ctx.l),
        pattern_(std::move(nu)) {}

  const SchemeParams& params() const noexcept { return params_; }
  const SourceLayout& layout() const noexcept { return layout_; }
  const CommPattern& pattern() const noexcept { return pattern_; }
  FieldModulus modulus() const noexcept { return mod_; }
  int part_length() const noexcept { return l_; }

  bool has(const VarRef& v) const { return vars_.contains(v); }

  const GfMatrix& coeffs(const VarRef& v) const {
    auto it = vars_.find(v);
    if (it == vars_.end()) {
      throw Error(Errc::kIndexOutOfRange, "no variable " + v.name() + " in transcript");
    }
    return it->second;
  }

  LinearVar var(const VarRef& v) const { return {v.name(), coeffs(v)}; }

  void put(const VarRef& v, GfMatrix m) { vars_.insert_or_assign(v, std::move(m)); }

  const std::map<VarRef, GfMatrix>& all() const noexcept { return vars_; }

  // Stacked coefficient rows of a set of variables.
  GfMatrix stack(const VarSet& set) const {
    std::vector<GfMatrix> parts;
    parts.reserve(set.size());
    for (const auto& v : set) parts.push_back(coeffs(v));
    return vstack(parts, static_cast<std::size_t>(layout_.dimension()), mod_);
  }

  // --- named groups -------------------------------------------------------

  // W_U (all of W_{[K]} for U = [K]).
  VarSet gradients(const IndexSet& users) const {
    VarSet out;
    for (int k : users) out.push_back(VarRef::gradient(k));
    return out;
  }
  VarSet all_gradients() const { return gradients(range_set(params_.K)); }

  VarSet randomness(const IndexSet& users) const {
    VarSet out;
    for (int k : users) out.push_back(VarRef::randomness(k));
    return out;
  }

  // X_{[K], helpers}
  VarSet uploads_at(const IndexSet& helpers) const {
    VarSet out;
    for (int n : helpers) {
      for (int k = 0; k < params_.K; ++k) out.push_back(VarRef::upload(k, n));
    }
    return out;
  }

  // X_{k, helpers}
  VarSet uploads_of(int k, const IndexSet& helpers) const {
    VarSet out;
    for (int n : helpers) out.push_back(VarRef::upload(k, n));
    return out;
  }

  // Z_T: the keys held by each helper i in T, Z_{i,n}^{(k)} for n != i.
  VarSet keys_held(const IndexSet& helpers) const {
    VarSet out;
    for (int i : helpers) {
      for (int n = 0; n < params_.N; ++n) {
        if (n == i) continue;
        for (int k = 0; k < params_.K; ++k) out.push_back(VarRef::key(i, n, k));
      }
    }
    return out;
  }

  // Z_{S, n}^{(k)}
  VarSet key_column(const IndexSet& holders, int n, int k) const {
    VarSet out;
    for (int i : holders) out.push_back(VarRef::key(i, n, k));
    return out;
  }

  // M_T: every message component received by a helper in T.
  VarSet shares_received(const IndexSet& helpers) const {
    VarSet out;
    for (const auto& [v, m] : vars_) {
      if (v.kind == VarKind::kShare && contains(helpers, v.b)) out.push_back(v);
    }
    return out;
  }

  // Y_n for the requested helpers that respond under the pattern.
  VarSet responses(const IndexSet& helpers) const {
    VarSet out;
    for (int n : helpers) {
      if (has(VarRef::response(n))) out.push_back(VarRef::response(n));
    }
    return out;
  }

 private:
  SchemeParams params_;
  SourceLayout layout_;
  FieldModulus mod_;
  int l_;
  CommPattern pattern_;
  std::map<VarRef, GfMatrix> vars_;
};

inline LinearTranscript build_linear_transcript(const SchemeContext& ctx,
                                                const CommPattern& nu) {
  validate(nu, ctx.params);
  const SchemeParams& p = ctx.params;
  const SourceLayout lay(p);
  const auto m = static_cast<std::size_t>(lay.dimension());
  const int parts = p.Nr - p.T;
  LinearTranscript lt(ctx, nu);

  GfMatrix sum(static_cast<std::size_t>(parts), m, ctx.mod);
  for (int k = 0; k < p.K; ++k) {
    GfMatrix w(static_cast<std::size_t>(parts), m, ctx.mod);
    for (int i = 0; i < parts; ++i) {
      w.set(static_cast<std::size_t>(i), static_cast<std::size_t>(lay.w_slot(k, i)), 1);
    }
    sum = mat_add(sum, w);
    lt.put(VarRef::gradient(k), std::move(w));
    GfMatrix f(static_cast<std::size_t>(p.T), m, ctx.mod);
    for (int j = 0; j < p.T; ++j) {
      f.set(static_cast<std::size_t>(j), static_cast<std::size_t>(lay.f_slot(k, j)), 1);
    }
    lt.put(VarRef::randomness(k), std::move(f));
  }
  lt.put(VarRef::sum(), std::move(sum));

  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      GfMatrix x(1, m, ctx.mod);
      for (int j = 0; j < p.Nr; ++j) {
        int slot = j < parts ? lay.w_slot(k, j) : lay.f_slot(k, j - parts);
        x.set(0, static_cast<std::size_t>(slot),
              ctx.V.raw(static_cast<std::size_t>(n), static_cast<std::size_t>(j)));
      }
      lt.put(VarRef::upload(k, n), std::move(x));
    }
  }

  for (int n = 0; n < p.N; ++n) {
    for (int i = 0; i < p.N; ++i) {
      for (int k = 0; k < p.K; ++k) {
        GfMatrix z(1, m, ctx.mod);
        for (int j = 0; j < p.Nr - 1; ++j) {
          z.set(0, static_cast<std::size_t>(lay.q_slot(n, j, k)),
                ctx.key_map[static_cast<std::size_t>(n)].raw(static_cast<std::size_t>(i),
                                                             static_cast<std::size_t>(j)));
        }
        lt.put(VarRef::key(i, n, k), std::move(z));
      }
    }
  }

  const IndexSet uh = nu.active_helpers();
  for (int n : uh) {
    for (int i = 0; i < p.N; ++i) {
      if (i == n) continue;
      for (int k : nu.users_at(n)) {
        if (nu.delivered(k, i)) continue;
        lt.put(VarRef::share(n, i, k),
               mat_add(lt.coeffs(VarRef::upload(k, n)), lt.coeffs(VarRef::key(n, i, k))));
      }
    }
  }

  // Y_n, with the missing uploads obtained through the same recovery map the
  // helper applies to real payloads.
  for (int n : uh) {
    GfMatrix y(1, m, ctx.mod);
    for (int k = 0; k < p.K; ++k) {
      if (nu.delivered(k, n)) {
        y = mat_add(y, lt.coeffs(VarRef::upload(k, n)));
        continue;
      }
      const auto& nk = nu.receivers[static_cast<std::size_t>(k)];
      std::vector<std::size_t> rows(nk.begin(), nk.begin() + p.Nr);
      GfMatrix decoder = invert(select_rows(ctx.S[static_cast<std::size_t>(n)], rows));
      VarSet shares;
      for (auto i : rows) shares.push_back(VarRef::share(static_cast<int>(i), n, k));
      y = mat_add(y, mat_mul(select_rows(decoder, {0}), lt.stack(shares)));
    }
    lt.put(VarRef::response(n), std::move(y));
  }
  return lt;
}

// Pushes a concrete source assignment (m rows, l columns) through a variable.
inline Payload instantiate(const LinearTranscript& lt, const VarRef& v,
                           const GfMatrix& source) {
  GfMatrix out = mat_mul(lt.coeffs(v), source);
  Payload flat;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return flat;
}

namespace detail {

inline std::size_t stacked_rank(std::span<const LinearVar> vars) {
  if (vars.empty()) return 0;
  const auto cols = vars.front().coeffs.cols();
  const auto mod = vars.front().coeffs.modulus();
  std::vector<GfMatrix> parts;
  for (const auto& v : vars) {
    if (v.coeffs.cols() != cols || v.coeffs.modulus() != mod) {
      throw Error(Errc::kLayoutMismatch, "variable " + v.name + " uses another layout");
    }
    parts.push_back(v.coeffs);
  }
  return rank(vstack(parts, cols, mod));
}

}  // namespace detail

// H(vars) in q-ary units.
inline Rational entropy_rank(std::span<const LinearVar> vars, int l) {
  return Rational(static_cast<std::int64_t>(detail::stacked_rank(vars)) * l);
}

inline Rational entropy_rank(const LinearTranscript& lt, const VarSet& vars) {
  return Rational(static_cast<std::int64_t>(rank(lt.stack(vars))) * lt.part_length());
}

struct MiQuery {
  VarSet target;       // A
  VarSet observed;     // B
  VarSet conditioned;  // C
};

struct MiResult {
  std::size_t rank_ac = 0;
  std::size_t rank_bc = 0;
  std::size_t rank_abc = 0;
  std::size_t rank_c = 0;
  Rational value;  // q-ary units
};

inline MiResult mi_from_ranks(std::size_t ac, std::size_t bc, std::size_t abc,
                              std::size_t c, int l) {
  auto v = static_cast<std::int64_t>(ac + bc) - static_cast<std::int64_t>(abc + c);
  return {ac, bc, abc, c, Rational(v * l)};
}

inline MiResult cond_mutual_info(std::span<const LinearVar> a,
                                 std::span<const LinearVar> b,
                                 std::span<const LinearVar> c, int l) {
  auto cat = [](std::initializer_list<std::span<const LinearVar>> parts) {
    std::vector<LinearVar> out;
    for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  auto ac = cat({a, c}), bc = cat({b, c}), abc = cat({a, b, c});
  std::vector<LinearVar> all = abc;
  detail::stacked_rank(all);  // layout check across every input
  return mi_from_ranks(detail::stacked_rank(ac), detail::stacked_rank(bc),
                       detail::stacked_rank(abc), detail::stacked_rank(c), l);
}

inline MiResult cond_mutual_info(const LinearTranscript& lt, const MiQuery& q) {
  auto r = [&](std::initializer_list<VarSet> parts) { return rank(lt.stack(join(parts))); };
  return mi_from_ranks(r({q.target, q.conditioned}), r({q.observed, q.conditioned}),
                       r({q.target, q.observed, q.conditioned}), r({q.conditioned}),
                       lt.part_length());
}

// H(A | C) = rank(A,C) - rank(C), times l.
inline Rational cond_entropy(const LinearTranscript& lt, const VarSet& a,
                             const VarSet& c) {
  auto v = static_cast<std::int64_t>(rank(lt.stack(join({a, c})))) -
           static_cast<std::int64_t>(rank(lt.stack(c)));
  return Rational(v * lt.part_length());
}

// --- the security and lemma statements ------------------------------------

namespace detail {

inline void check_collusion(const SchemeParams& p, const IndexSet& users,
                            const IndexSet& helpers) {
  check_index_set(users, p.K, "user");
  check_index_set(helpers, p.N, "helper");
  if (static_cast<int>(helpers.size()) > p.T) {
    throw Error(Errc::kBadSubset, "|T| = " + std::to_string(helpers.size()) +
                                      " exceeds the collusion bound " +
                                      std::to_string(p.T));
  }
}

}  // namespace detail

// Colluding helpers' view: X_{[K],T}, Z_T, M_T.
inline VarSet helper_view(const LinearTranscript& lt, const IndexSet& helpers) {
  return join({lt.uploads_at(helpers), lt.keys_held(helpers), lt.shares_received(helpers)});
}

// I(W_[K]; X_{[K],T}, Z_T, M_T | W_U, F_U). No bound on |T|.
inline MiResult helper_leakage(const LinearTranscript& lt, const IndexSet& users,
                               const IndexSet& helpers) {
  return cond_mutual_info(lt, {lt.all_gradients(), helper_view(lt, helpers),
                               join({lt.gradients(users), lt.randomness(users)})});
}

// I(W_[K]; Y_{N_UH}, X_{[K],T}, Z_T, M_T | W, W_U, F_U). No bound on |T|.
inline MiResult master_leakage(const LinearTranscript& lt, const IndexSet& users,
                               const IndexSet& helpers) {
  const IndexSet uh = lt.pattern().active_helpers();
  return cond_mutual_info(
      lt, {lt.all_gradients(), join({lt.responses(uh), helper_view(lt, helpers)}),
           join({{VarRef::sum()}, lt.gradients(users), lt.randomness(users)})});
}

inline MiResult check_security_helpers(const LinearTranscript& lt, const IndexSet& users,
                                       const IndexSet& helpers) {
  detail::check_collusion(lt.params(), users, helpers);
  return helper_leakage(lt, users, helpers);
}

inline MiResult check_security_helpers(const SchemeContext& ctx, const CommPattern& nu,
                                       const IndexSet& users, const IndexSet& helpers) {
  detail::check_collusion(ctx.params, users, helpers);
  return helper_leakage(build_linear_transcript(ctx, nu), users, helpers);
}

inline MiResult check_security_master(const LinearTranscript& lt, const IndexSet& users,
                                      const IndexSet& helpers) {
  detail::check_collusion(lt.params(), users, helpers);
  return master_leakage(lt, users, helpers);
}

inline MiResult check_security_master(const SchemeContext& ctx, const CommPattern& nu,
                                      const IndexSet& users, const IndexSet& helpers) {
  detail::check_collusion(ctx.params, users, helpers);
  return master_leakage(build_linear_transcript(ctx, nu), users, helpers);
}

// H(Y_{N_UH} | W, X_{[K],T0}); zero for |T0| = T.
inline Rational response_residual_entropy(const LinearTranscript& lt,
                                          const IndexSet& helpers) {
  return cond_entropy(lt, lt.responses(lt.pattern().active_helpers()),
                      join({{VarRef::sum()}, lt.uploads_at(helpers)}));
}

// I(X_{[K],[N]}; M_T | X_{[K],T}, Z_T).
inline MiResult check_lemma2(const LinearTranscript& lt, const IndexSet& helpers) {
  detail::check_collusion(lt.params(), {}, helpers);
  return cond_mutual_info(lt, {lt.uploads_at(range_set(lt.params().N)),
                               lt.shares_received(helpers),
                               join({lt.uploads_at(helpers), lt.keys_held(helpers)})});
}

inline MiResult check_lemma2(const SchemeContext& ctx, const CommPattern& nu,
                             const IndexSet& helpers) {
  return check_lemma2(build_linear_transcript(ctx, nu), helpers);
}

// I(W_k; X_{k, helpers}).
inline MiResult upload_information(const LinearTranscript& lt, int k,
                                   const IndexSet& helpers) {
  return cond_mutual_info(lt, {{VarRef::gradient(k)}, lt.uploads_of(k, helpers), {}});
}

struct Lemma1Report {
  std::size_t entropy_checks = 0;
  std::size_t family_checks = 0;
  bool families_exhaustive = true;
  std::vector<std::string> violations;
  // |S_n| > Nr-1 subsets whose entropy is below |S_n| l: outside the claim.
  std::vector<std::string> informational;

  bool pass() const { return violations.empty(); }
};

// For every n, k and S_n in [N]\{n}: H(Z_{S_n,n}^{(k)}) = |S_n| l when
// |S_n| <= Nr-1, and the joint entropy of a family (S_n)_n over all (n, k)
// is the sum of the individual entropies. Families are enumerated
// exhaustively while there are at most `family_budget` of them; beyond that,
// the all-maximal family and every family that differs from it in a single
// helper are checked.
inline Lemma1Report check_lemma1(const SchemeContext& ctx,
                                 std::size_t family_budget = 1U << 16) {
  const SchemeParams& p = ctx.params;
  const LinearTranscript lt = build_linear_transcript(ctx, full_pattern(p));
  Lemma1Report report;
  const int l = ctx.l;

  // subsets[n] lists the subsets of [N]\{n} in lexicographic order.
  std::vector<std::vector<IndexSet>> subsets(static_cast<std::size_t>(p.N));
  // entropy[n][s][k] = H(Z_{S,n}^{(k)}) for S = subsets[n][s]
  std::vector<std::vector<std::vector<std::int64_t>>> entropy(static_cast<std::size_t>(p.N));
  for (int n = 0; n < p.N; ++n) {
    auto& subs = subsets[static_cast<std::size_t>(n)];
    subs = subsets_of(set_difference(range_set(p.N), {n}), 0);
    for (const auto& s : subs) {
      std::vector<std::int64_t> per_user;
      for (int k = 0; k < p.K; ++k) {
        auto h = entropy_rank(lt, lt.key_column(s, n, k));
        per_user.push_back(h.numerator());
        ++report.entropy_checks;
        const Rational expected(static_cast<std::int64_t>(s.size()) * l);
        const std::string where = "n=" + std::to_string(n + 1) + " k=" + std::to_string(k + 1) +
                                  " S={" + detail::format_index_list(s) + "}";
        if (static_cast<int>(s.size()) <= p.Nr - 1) {
          if (h != expected) {
            report.violations.push_back(where + ": H=" + rational_string(h) +
                                        " != " + rational_string(expected));
          }
        } else if (h < expected) {
          report.informational.push_back(where + ": H=" + rational_string(h) + " < " +
                                         rational_string(expected));
        }
      }
      entropy[static_cast<std::size_t>(n)].push_back(std::move(per_user));
    }
  }

  auto check_family = [&](const std::vector<std::size_t>& choice) {
    VarSet joint;
    std::int64_t sum = 0;
    for (int n = 0; n < p.N; ++n) {
      const auto c = choice[static_cast<std::size_t>(n)];
      const auto& s = subsets[static_cast<std::size_t>(n)][c];
      for (int k = 0; k < p.K; ++k) {
        auto col = lt.key_column(s, n, k);
        joint.insert(joint.end(), col.begin(), col.end());
        sum += entropy[static_cast<std::size_t>(n)][c][static_cast<std::size_t>(k)];
      }
    }
    ++report.family_checks;
    auto h = entropy_rank(lt, joint);
    if (h != Rational(sum)) {
      std::string where = "family";
      for (int n = 0; n < p.N; ++n) {
        where += " S" + std::to_string(n + 1) + "={" +
                 detail::format_index_list(
                     subsets[static_cast<std::size_t>(n)][choice[static_cast<std::size_t>(n)]]) +
                 "}";
      }
      report.violations.push_back(where + ": joint " + rational_string(h) +
                                  " != sum " + std::to_string(sum));
    }
  };

  const std::size_t per_helper = subsets[0].size();
  std::size_t families = 1;
  bool overflow = false;
  for (int n = 0; n < p.N && !overflow; ++n) {
    families *= per_helper;
    overflow = families > family_budget;
  }
  std::vector<std::size_t> choice(static_cast<std::size_t>(p.N), 0);
  if (!overflow) {
    while (true) {
      check_family(choice);
      std::size_t i = 0;
      while (i < choice.size() && ++choice[i] == per_helper) choice[i++] = 0;
      if (i == choice.size()) break;
    }
  } else {
    report.families_exhaustive = false;
    const std::vector<std::size_t> maximal(static_cast<std::size_t>(p.N), per_helper - 1);
    check_family(maximal);
    for (int n = 0; n < p.N; ++n) {
      for (std::size_t c = 0; c + 1 < per_helper; ++c) {
        auto family = maximal;
        family[static_cast<std::size_t>(n)] = c;
        check_family(family);
      }
    }
  }
  return report;
}

// With Nr <= T no scheme exists. Build the scheme anyway at the largest
// collusion level it supports (T' = Nr-1) and let the helpers [Nr] collude,
// which the requested T allows. Correctness gives I(W; Y_[Nr]) = L, and that
// information is a function of the colluders' view, so their leakage is >= L.
struct InfeasibilityWitness {
  SchemeParams requested;
  SchemeParams forced;
  Rational view_leakage;   // I(W_[K]; X_{[K],[Nr]}, Z_[Nr], M_[Nr])
  Rational decoded_info;   // I(W; Y_[Nr])
  Rational gradient_length;

  bool contradiction() const {
    return decoded_info == gradient_length && view_leakage >= gradient_length;
  }
};

inline InfeasibilityWitness infeasibility_witness(const SchemeParams& p) {
  check_param_ranges(p);
  if (p.feasible()) throw Error(Errc::kBadParams, p.to_string() + " is feasible");
  SchemeParams forced = p;
  forced.T = p.Nr - 1;
  if (forced.T < 1) {
    throw Error(Errc::kBadParams, "Nr = 1 leaves no collusion level to force");
  }
  const auto ctx = setup(forced);
  const auto lt = build_linear_transcript(ctx, full_pattern(forced));
  const IndexSet colluders = range_set(p.Nr);
  InfeasibilityWitness w{p, forced, {}, {}, Rational(p.L)};
  w.view_leakage = helper_leakage(lt, {}, colluders).value;
  w.decoded_info = cond_mutual_info(lt, {{VarRef::sum()}, lt.responses(colluders), {}}).value;
  return w;
}

// --- brute-force oracle -----------------------------------------------------

struct BruteEntropy {
  double value = 0;           // Shannon entropy, base q
  std::uint64_t support = 0;  // distinct outcomes
  bool uniform = false;       // every outcome equally likely

  // Exact q-ary entropy when the distribution is uniform over q^r outcomes.
  std::optional<Rational> exact(Symbol q) const {
    if (!uniform) return std::nullopt;
    std::uint64_t s = support;
    std::int64_t r = 0;
    while (s > 1 && s % q == 0) {
      s /= q;
      ++r;
    }
    if (s != 1) return std::nullopt;
    return Rational(r);
  }
};

namespace detail {

// Concrete value of one variable in one protocol run.
inline Payload concrete_value(const RoundTranscript& tr, const std::vector<Gradient>& w,
                              const std::vector<UserRandomness>& f, const VarRef& v) {
  auto flat = [](const std::vector<Payload>& parts) {
    Payload out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  switch (v.kind) {
    case VarKind::kGradient: return w.at(static_cast<std::size_t>(v.a)).flatten();
    case VarKind::kRandomness: return flat(f.at(static_cast<std::size_t>(v.a)).parts);
    case VarKind::kSum: return *tr.decoded;
    case VarKind::kUpload: return tr.upload(v.a, v.b);
    case VarKind::kKey: return tr.keys.z(v.a, v.b, v.c);
    case VarKind::kShare:
      for (const auto& m : tr.shares) {
        if (m.from == v.a && m.to == v.b) {
          auto it = m.per_user.find(v.c);
          if (it != m.per_user.end()) return it->second;
        }
      }
      break;
    case VarKind::kResponse:
      if (const auto* r = tr.response(v.a)) return r->payload;
      break;
  }
  throw Error(Errc::kIndexOutOfRange, "no concrete value for " + v.name());
}

}  // namespace detail

// Enumerates every source assignment of a tiny instance, runs the concrete
// protocol on each, and records the values of a catalog of variable sets.
// Entropies of any union of catalog items then come from exact histograms.
class BruteForceOracle {
 public:
  static constexpr std::uint64_t kMaxAssignments = 1'000'000;

  BruteForceOracle(const SchemeContext& ctx, const CommPattern& nu,
                   std::vector<VarSet> catalog)
      : q_(ctx.mod.value()), catalog_(std::move(catalog)) {
    validate(nu, ctx.params);
    const SourceLayout lay(ctx.params);
    const int m = lay.dimension();
    const int l = ctx.l;
    const int symbols = m * l;
    std::uint64_t count = 1;
    for (int i = 0; i < symbols; ++i) {
      count *= q_;
      if (count > kMaxAssignments) {
        throw Error(Errc::kTooLargeToEnumerate,
                    std::to_string(q_) + "^" + std::to_string(symbols) +
                        " source assignments");
      }
    }
    assignments_ = count;
    codes_.assign(catalog_.size(), std::vector<std::uint64_t>(count, 0));
    multiplier_.assign(catalog_.size(), 1);

    const DealerKeys shape(ctx.K(), ctx.N(), ctx.Nr());
    std::vector<Symbol> digits(static_cast<std::size_t>(symbols), 0);
    for (std::uint64_t a = 0; a < count; ++a) {
      // Source symbol (slot, column) is digit slot * l + column of a in base q.
      std::uint64_t rest = a;
      for (auto& d : digits) {
        d = static_cast<Symbol>(rest % q_);
        rest /= q_;
      }
      auto block = [&](int slot) {
        Payload p;
        for (int c = 0; c < l; ++c) {
          p.emplace_back(digits[static_cast<std::size_t>(slot * l + c)], ctx.mod);
        }
        return p;
      };
      std::vector<Gradient> w;
      std::vector<UserRandomness> f;
      for (int k = 0; k < ctx.K(); ++k) {
        Gradient g{k, {}};
        for (int i = 0; i < ctx.gradient_parts(); ++i) g.parts.push_back(block(lay.w_slot(k, i)));
        w.push_back(std::move(g));
        UserRandomness r{k, {}};
        for (int j = 0; j < ctx.T(); ++j) r.parts.push_back(block(lay.f_slot(k, j)));
        f.push_back(std::move(r));
      }
      std::vector<Payload> q_table(static_cast<std::size_t>(ctx.N() * (ctx.Nr() - 1) * ctx.K()));
      for (int n = 0; n < ctx.N(); ++n) {
        for (int j = 0; j < ctx.Nr() - 1; ++j) {
          for (int k = 0; k < ctx.K(); ++k) {
            q_table[shape.q_index(n, j, k)] = block(lay.q_slot(n, j, k));
          }
        }
      }
      const RoundTranscript tr = run_round(ctx, nu, w, f, dealer_from_q(ctx, q_table));
      for (std::size_t item = 0; item < catalog_.size(); ++item) {
        std::uint64_t code = 0;
        std::uint64_t width = 1;
        for (const auto& v : catalog_[item]) {
          for (auto e : detail::concrete_value(tr, w, f, v)) {
            code += width * e.value();
            width *= q_;
          }
        }
        codes_[item][a] = code;
        if (a == 0) widths_.push_back(width);
      }
    }
    // Fixed, disjoint digit ranges for every item so codes can be summed.
    long double total = 1;
    for (std::size_t item = 0; item < catalog_.size(); ++item) {
      multiplier_[item] = static_cast<std::uint64_t>(total);
      total *= static_cast<long double>(widths_[item]);
      if (total > 1.8e19L) {
        throw Error(Errc::kTooLargeToEnumerate, "catalog values do not fit 64 bits");
      }
    }
  }

  std::size_t items() const noexcept { return catalog_.size(); }
  const std::vector<VarSet>& catalog() const noexcept { return catalog_; }
  std::uint64_t assignments() const noexcept { return assignments_; }

  // Joint entropy of the catalog items selected by `mask`.
  BruteEntropy entropy(std::uint64_t mask) const {
    std::vector<std::uint64_t> joint(assignments_, 0);
    for (std::size_t item = 0; item < catalog_.size(); ++item) {
      if (mask & (std::uint64_t{1} << item)) add_item(joint, item, true);
    }
    return histogram_entropy(joint);
  }

  // Entropies for all 2^items masks, walked in Gray-code order.
  std::vector<BruteEntropy> all_entropies() const {
    const std::uint64_t total = std::uint64_t{1} << catalog_.size();
    std::vector<BruteEntropy> out(total);
    std::vector<std::uint64_t> joint(assignments_, 0);
    std::uint64_t mask = 0;
    out[0] = histogram_entropy(joint);
    for (std::uint64_t step = 1; step < total; ++step) {
      const auto item = static_cast<std::size_t>(std::countr_zero(step));
      const bool adding = !(mask & (std::uint64_t{1} << item));
      add_item(joint, item, adding);
      mask ^= std::uint64_t{1} << item;
      out[mask] = histogram_entropy(joint);
    }
    return out;
  }

 private:
  void add_item(std::vector<std::uint64_t>& joint, std::size_t item, bool add) const {
    const auto mult = multiplier_[item];
    const auto& codes = codes_[item];
    if (add) {
      for (std::uint64_t a = 0; a < assignments_; ++a) joint[a] += codes[a] * mult;
    } else {
      for (std::uint64_t a = 0; a < assignments_; ++a) joint[a] -= codes[a] * mult;
    }
  }

  BruteEntropy histogram_entropy(const std::vector<std::uint64_t>& joint) const {
    // Open-addressing count table, reused across calls.
    std::size_t cap = 1;
    while (cap < 2 * joint.size()) cap <<= 1U;
    table_keys_.assign(cap, 0);
    table_counts_.assign(cap, 0);
    std::uint64_t support = 0;
    for (auto key : joint) {
      std::size_t h = static_cast<std::size_t>(splitmix64(key)) & (cap - 1);
      while (table_counts_[h] != 0 && table_keys_[h] != key) h = (h + 1) & (cap - 1);
      if (table_counts_[h] == 0) {
        table_keys_[h] = key;
        ++support;
      }
      ++table_counts_[h];
    }
    const double total = static_cast<double>(joint.size());
    const double log_q = std::log(static_cast<double>(q_));
    double h = 0;
    std::uint64_t first = 0;
    bool uniform = true;
    for (std::size_t i = 0; i < cap; ++i) {
      const auto c = table_counts_[i];
      if (c == 0) continue;
      if (first == 0) first = c;
      uniform = uniform && c == first;
      const double pr = static_cast<double>(c) / total;
      h -= pr * std::log(pr) / log_q;
    }
    return {h, support, uniform};
  }

  Symbol q_;
  std::vector<VarSet> catalog_;
  std::uint64_t assignments_ = 0;
  std::vector<std::vector<std::uint64_t>> codes_;
  std::vector<std::uint64_t> widths_;
  std::vector<std::uint64_t> multiplier_;
  mutable std::vector<std::uint64_t> table_keys_;
  mutable std::vector<std::uint32_t> table_counts_;
};

inline BruteEntropy brute_force_entropy(const SchemeContext& ctx, const CommPattern& nu,
                                        const VarSet& vars) {
  BruteForceOracle oracle(ctx, nu, {vars});
  return oracle.entropy(1);
}

// One catalog item per role-level view: W_k, F_k, W, X_{[K],n}, Z_n, the
// messages received by n (when any), and all responses.
inline std::vector<VarSet> view_catalog(const LinearTranscript& lt) {
  const SchemeParams& p = lt.params();
  std::vector<VarSet> out;
  for (int k = 0; k < p.K; ++k) out.push_back({VarRef::gradient(k)});
  for (int k = 0; k < p.K; ++k) out.push_back({VarRef::randomness(k)});
  out.push_back({VarRef::sum()});
  for (int n = 0; n < p.N; ++n) out.push_back(lt.uploads_at({n}));
  for (int n = 0; n < p.N; ++n) out.push_back(lt.keys_held({n}));
  for (int n = 0; n < p.N; ++n) {
    auto m = lt.shares_received({n});
    if (!m.empty()) out.push_back(std::move(m));
  }
  out.push_back(lt.responses(lt.pattern().active_helpers()));
  return out;
}

}  // namespace hsca

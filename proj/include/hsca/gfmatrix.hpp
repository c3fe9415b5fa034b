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

#pragma once

#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsca/error.hpp"
#include "hsca/gfield.hpp"

namespace hsca {

// Dense row-major matrix over GF(q).
class GfMatrix {
 public:
  GfMatrix(std::size_t rows, std::size_t cols, FieldModulus mod)
      : rows_(rows), cols_(cols), mod_(mod), data_(rows * cols, 0) {}

  static GfMatrix from_rows(
      FieldModulus mod,
      std::initializer_list<std::initializer_list<std::uint64_t>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.begin()->size();
    GfMatrix m(r, c, mod);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) {
        throw Error(Errc::kDimensionMismatch, "ragged row literal");
      }
      std::size_t j = 0;
      for (auto v : row) m.set(i, j++, static_cast<Symbol>(v % mod.value()));
      ++i;
    }
    return m;
  }

  // Stacks payloads as the rows of a matrix.
  static GfMatrix from_payloads(FieldModulus mod,
                                std::span<const Payload> rows) {
    std::size_t c = rows.empty() ? 0 : rows.front().size();
    GfMatrix m(rows.size(), c, mod);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != c) {
        throw Error(Errc::kShapeMismatch, "payloads of unequal length");
      }
      for (std::size_t j = 0; j < c; ++j) {
        require_same_modulus(mod, rows[i][j].modulus());
        m.set(i, j, rows[i][j].value());
      }
    }
    return m;
  }

  static GfMatrix identity(std::size_t n, FieldModulus mod) {
    GfMatrix m(n, n, mod);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  FieldModulus modulus() const noexcept { return mod_; }

  Symbol raw(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  FieldElement at(std::size_t r, std::size_t c) const {
    check_index(r, c);
    return {raw(r, c), mod_};
  }

  void set(std::size_t r, std::size_t c, Symbol v) {
    data_[r * cols_ + c] = v % mod_.value();
  }
  void set(std::size_t r, std::size_t c, FieldElement v) {
    require_same_modulus(mod_, v.modulus());
    data_[r * cols_ + c] = v.value();
  }

  Payload row(std::size_t r) const {
    if (r >= rows_) throw Error(Errc::kIndexOutOfRange, "row " + std::to_string(r));
    Payload out;
    out.reserve(cols_);
    for (std::size_t j = 0; j < cols_; ++j) out.emplace_back(raw(r, j), mod_);
    return out;
  }

  std::span<const Symbol> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<Symbol>& data() const noexcept { return data_; }

  friend bool operator==(const GfMatrix&, const GfMatrix&) = default;

  friend std::ostream& operator<<(std::ostream& os, const GfMatrix& m) {
    os << '[';
    for (std::size_t i = 0; i < m.rows_; ++i) {
      os << (i ? "; " : "");
      for (std::size_t j = 0; j < m.cols_; ++j) {
        os << (j ? " " : "") << m.raw(i, j);
      }
    }
    return os << ']';
  }

 private:
  void check_index(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) {
      throw Error(Errc::kIndexOutOfRange,
                  "(" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
  }

  std::size_t rows_;
  std::size_t cols_;
  FieldModulus mod_;
  std::vector<Symbol> data_;
};

inline GfMatrix mat_mul(const GfMatrix& a, const GfMatrix& b) {
  require_same_modulus(a.modulus(), b.modulus());
  if (a.cols() != b.rows()) {
    throw Error(Errc::kDimensionMismatch,
                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " times " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
  const Symbol q = a.modulus().value();
  GfMatrix out(a.rows(), b.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::uint64_t acc = 0;
      for (std::size_t t = 0; t < a.cols(); ++t) {
        acc = (acc + std::uint64_t{a.raw(i, t)} * b.raw(t, j)) % q;
      }
      out.set(i, j, static_cast<Symbol>(acc));
    }
  }
  return out;
}

inline GfMatrix mat_add(const GfMatrix& a, const GfMatrix& b) {
  require_same_modulus(a.modulus(), b.modulus());
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::kDimensionMismatch, "mat_add shape");
  }
  GfMatrix out(a.rows(), a.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out.set(i, j, detail::add_mod(a.raw(i, j), b.raw(i, j),
                                    a.modulus().value()));
    }
  }
  return out;
}

// Rows are taken in the given order; indices must be strictly increasing.
inline GfMatrix select_rows(const GfMatrix& m,
                            std::span<const std::size_t> idx) {
  GfMatrix out(idx.size(), m.cols(), m.modulus());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= m.rows()) {
      throw Error(Errc::kIndexOutOfRange,
                  "row " + std::to_string(idx[r]) + " of " +
                      std::to_string(m.rows()));
    }
    if (r > 0 && idx[r] <= idx[r - 1]) {
      throw Error(Errc::kIndexOutOfRange, "row indices not increasing");
    }
    for (std::size_t c = 0; c < m.cols(); ++c) out.set(r, c, m.raw(idx[r], c));
  }
  return out;
}

inline GfMatrix select_rows(const GfMatrix& m,
                            std::initializer_list<std::size_t> idx) {
  return select_rows(m, std::span<const std::size_t>(idx.begin(), idx.size()));
}

// Vertical concatenation. An empty list yields a 0 x cols matrix.
inline GfMatrix vstack(std::span<const GfMatrix> parts, std::size_t cols,
                       FieldModulus mod) {
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_same_modulus(mod, p.modulus());
    if (p.cols() != cols) {
      throw Error(Errc::kDimensionMismatch, "vstack column count");
    }
    rows += p.rows();
  }
  GfMatrix out(rows, cols, mod);
  std::size_t r = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.rows(); ++i, ++r) {
      for (std::size_t j = 0; j < cols; ++j) out.set(r, j, p.raw(i, j));
    }
  }
  return out;
}

inline GfMatrix hstack(const GfMatrix& a, const GfMatrix& b) {
  require_same_modulus(a.modulus(), b.modulus());
  if (a.rows() != b.rows()) {
    throw Error(Errc::kDimensionMismatch, "hstack row count");
  }
  GfMatrix out(a.rows(), a.cols() + b.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out.set(i, j, a.raw(i, j));
    for (std::size_t j = 0; j < b.cols(); ++j) {
      out.set(i, a.cols() + j, b.raw(i, j));
    }
  }
  return out;
}

namespace detail {

// In-place reduction to row echelon form; pivot = first nonzero entry in the
// column. Returns the rank. With `reduced`, also clears entries above pivots
// and scales them to 1.
inline std::size_t eliminate(std::vector<Symbol>& a, std::size_t rows,
                             std::size_t cols, Symbol q, bool reduced,
                             std::size_t pivot_cols) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < pivot_cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && a[piv * cols + c] == 0) ++piv;
    if (piv == rows) continue;
    if (piv != rank) {
      for (std::size_t j = 0; j < cols; ++j) {
        std::swap(a[piv * cols + j], a[rank * cols + j]);
      }
    }
    const Symbol inv = inv_mod(a[rank * cols + c], q);
    if (reduced) {
      for (std::size_t j = 0; j < cols; ++j) {
        a[rank * cols + j] = mul_mod(a[rank * cols + j], inv, q);
      }
    }
    for (std::size_t r = reduced ? 0 : rank + 1; r < rows; ++r) {
      if (r == rank || a[r * cols + c] == 0) continue;
      Symbol f = a[r * cols + c];
      if (!reduced) f = mul_mod(f, inv, q);
      for (std::size_t j = c; j < cols; ++j) {
        a[r * cols + j] =
            sub_mod(a[r * cols + j], mul_mod(f, a[rank * cols + j], q), q);
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

inline std::size_t rank(const GfMatrix& m) {
  std::vector<Symbol> work = m.data();
  return detail::eliminate(work, m.rows(), m.cols(), m.modulus().value(),
                           false, m.cols());
}

// Gauss-Jordan on [m | I].
inline GfMatrix invert(const GfMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(Errc::kDimensionMismatch, "invert of non-square matrix");
  }
  const std::size_t n = m.rows();
  const std::size_t w = 2 * n;
  std::vector<Symbol> work(n * w, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) work[i * w + j] = m.raw(i, j);
    work[i * w + n + i] = 1;
  }
  std::size_t r =
      detail::eliminate(work, n, w, m.modulus().value(), true, n);
  if (r < n) {
    throw Error(Errc::kSingular, "rank " + std::to_string(r) + " < " +
                                     std::to_string(n));
  }
  GfMatrix out(n, n, m.modulus());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.set(i, j, work[i * w + n + j]);
  }
  return out;
}

// Nonzero, pairwise distinct evaluation points alpha_1..alpha_{N+Nr-1}.
class EvaluationPoints {
 public:
  EvaluationPoints(std::vector<FieldElement> alphas, std::size_t n,
                   std::size_t nr)
      : alphas_(std::move(alphas)), n_(n), nr_(nr) {
    if (alphas_.size() != n + nr - 1) {
      throw Error(Errc::kBadParams, "need N+Nr-1 evaluation points");
    }
    for (std::size_t i = 0; i < alphas_.size(); ++i) {
      if (alphas_[i].is_zero()) {
        throw Error(Errc::kBadParams, "evaluation point is zero");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (alphas_[i] == alphas_[j]) {
          throw Error(Errc::kBadParams, "evaluation points not distinct");
        }
      }
    }
  }

  const std::vector<FieldElement>& alphas() const noexcept { return alphas_; }
  std::size_t helpers() const noexcept { return n_; }
  std::size_t threshold() const noexcept { return nr_; }
  std::size_t size() const noexcept { return alphas_.size(); }
  // 0-based: alpha(0) is alpha_1.
  FieldElement alpha(std::size_t i) const { return alphas_.at(i); }

  // The N points used for the helpers' rows of V.
  std::span<const FieldElement> helper_points() const {
    return {alphas_.data(), n_};
  }
  // The Nr-1 extra points used for the tail of every G_n.
  std::span<const FieldElement> extension_points() const {
    return {alphas_.data() + n_, nr_ - 1};
  }

 private:
  std::vector<FieldElement> alphas_;
  std::size_t n_;
  std::size_t nr_;
};

// alpha_i = i for i in [1, N+Nr-1].
inline EvaluationPoints make_points(FieldModulus q, std::size_t n,
                                    std::size_t nr) {
  if (q.value() < n + nr) {
    throw Error(Errc::kFieldTooSmall,
                "q=" + std::to_string(q.value()) + " < N+Nr=" +
                    std::to_string(n + nr));
  }
  std::vector<FieldElement> alphas;
  for (std::size_t i = 1; i < n + nr; ++i) alphas.emplace_back(i, q);
  return EvaluationPoints(std::move(alphas), n, nr);
}

// Row i is (1, p_i, p_i^2, ..., p_i^{cols-1}).
inline GfMatrix vandermonde(std::span<const FieldElement> points,
                            std::size_t cols) {
  if (points.empty()) throw Error(Errc::kBadParams, "no points");
  if (cols == 0) throw Error(Errc::kBadParams, "vandermonde with 0 columns");
  GfMatrix m(points.size(), cols, points.front().modulus());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m.set(i, j, fe_pow(points[i], j));
  }
  return m;
}

inline GfMatrix vandermonde(std::initializer_list<FieldElement> points,
                            std::size_t cols) {
  return vandermonde(std::span<const FieldElement>(points.begin(), points.size()),
                     cols);
}

// G_n: Vandermonde rows at alpha_n, alpha_{N+1}, ..., alpha_{N+Nr-1} with Nr
// columns. `n` is 0-based.
inline GfMatrix helper_generator(const EvaluationPoints& points, std::size_t n) {
  std::vector<FieldElement> rows;
  rows.push_back(points.helper_points()[n]);
  for (auto a : points.extension_points()) rows.push_back(a);
  return vandermonde(rows, points.threshold());
}

// Nr x (Nr-1): zero first row, then (1, alpha, ..., alpha^{Nr-2}) for each
// extension point.
inline GfMatrix extended_g_tilde(const EvaluationPoints& points) {
  const std::size_t nr = points.threshold();
  const FieldModulus mod = points.alpha(0).modulus();
  GfMatrix m(nr, nr - 1, mod);
  auto ext = points.extension_points();
  for (std::size_t i = 0; i < ext.size(); ++i) {
    for (std::size_t j = 0; j + 1 < nr; ++j) {
      m.set(i + 1, j, fe_pow(ext[i], j));
    }
  }
  return m;
}

}  // namespace hsca

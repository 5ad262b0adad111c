#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace circlemap {

using BigInt = boost::multiprecision::cpp_int;

template <class Int>
using IntMatrix = std::vector<std::vector<Int>>;

struct IntegerOverflow : std::overflow_error {
  IntegerOverflow() : std::overflow_error("integer overflow in exact arithmetic") {}
};

/// 64-bit integer that throws IntegerOverflow instead of wrapping.
class Checked64 {
 public:
  Checked64(long long v = 0) : v_(v) {}  // NOLINT(google-explicit-constructor)
  long long value() const { return v_; }

  friend Checked64 operator+(Checked64 a, Checked64 b) {
    long long r;
    if (__builtin_add_overflow(a.v_, b.v_, &r)) throw IntegerOverflow();
    return r;
  }
  friend Checked64 operator-(Checked64 a, Checked64 b) {
    long long r;
    if (__builtin_sub_overflow(a.v_, b.v_, &r)) throw IntegerOverflow();
    return r;
  }
  friend Checked64 operator*(Checked64 a, Checked64 b) {
    long long r;
    if (__builtin_mul_overflow(a.v_, b.v_, &r)) throw IntegerOverflow();
    return r;
  }
  friend Checked64 operator/(Checked64 a, Checked64 b) { return a.v_ / b.v_; }
  friend Checked64 operator%(Checked64 a, Checked64 b) { return a.v_ % b.v_; }
  Checked64 operator-() const {
    if (v_ == INT64_MIN) throw IntegerOverflow();
    return -v_;
  }
  friend bool operator==(Checked64 a, Checked64 b) { return a.v_ == b.v_; }
  friend bool operator!=(Checked64 a, Checked64 b) { return a.v_ != b.v_; }
  friend bool operator<(Checked64 a, Checked64 b) { return a.v_ < b.v_; }

 private:
  long long v_;
};

inline Checked64 abs_value(Checked64 x) { return x < Checked64(0) ? -x : x; }
inline BigInt abs_value(const BigInt& x) { return x < 0 ? BigInt(-x) : x; }
inline BigInt to_big(Checked64 x) { return BigInt(x.value()); }
inline BigInt to_big(const BigInt& x) { return x; }

/// P * A * Q = D with P, Q unimodular and D diagonal, d_i | d_{i+1}, d_i >= 0.
struct SmithForm {
  std::vector<BigInt> diagonal;  // min(rows, cols) entries
  int rank = 0;
  IntMatrix<BigInt> P, P_inv, Q, Q_inv;
  bool used_bigint = false;
};

namespace detail {

template <class Int>
IntMatrix<Int> identity(std::size_t n) {
  IntMatrix<Int> m(n, std::vector<Int>(n, Int(0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = Int(1);
  return m;
}

template <class Int>
IntMatrix<BigInt> to_big(const IntMatrix<Int>& m) {
  IntMatrix<BigInt> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const auto& x : m[i]) out[i].push_back(circlemap::to_big(x));
  return out;
}

template <class Int>
SmithForm smith_impl(IntMatrix<Int> A, std::size_t rows, std::size_t cols) {
  auto P = identity<Int>(rows), P_inv = identity<Int>(rows);
  auto Q = identity<Int>(cols), Q_inv = identity<Int>(cols);
  const Int zero(0);

  // Row i <- row i + q * row t, tracked in P and P^{-1}.
  auto row_add = [&](std::size_t i, std::size_t t, const Int& q) {
    for (std::size_t j = 0; j < cols; ++j) A[i][j] = A[i][j] + q * A[t][j];
    for (std::size_t j = 0; j < rows; ++j) P[i][j] = P[i][j] + q * P[t][j];
    for (std::size_t j = 0; j < rows; ++j) P_inv[j][t] = P_inv[j][t] - q * P_inv[j][i];
  };
  // Col j <- col j + q * col t.
  auto col_add = [&](std::size_t j, std::size_t t, const Int& q) {
    for (std::size_t i = 0; i < rows; ++i) A[i][j] = A[i][j] + q * A[i][t];
    for (std::size_t i = 0; i < cols; ++i) Q[i][j] = Q[i][j] + q * Q[i][t];
    for (std::size_t i = 0; i < cols; ++i) Q_inv[t][i] = Q_inv[t][i] - q * Q_inv[j][i];
  };
  auto row_swap = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap(A[a], A[b]);
    std::swap(P[a], P[b]);
    for (std::size_t j = 0; j < rows; ++j) std::swap(P_inv[j][a], P_inv[j][b]);
  };
  auto col_swap = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < rows; ++i) std::swap(A[i][a], A[i][b]);
    for (std::size_t i = 0; i < cols; ++i) std::swap(Q[i][a], Q[i][b]);
    std::swap(Q_inv[a], Q_inv[b]);
  };
  auto row_negate = [&](std::size_t t) {
    for (auto& x : A[t]) x = -x;
    for (auto& x : P[t]) x = -x;
    for (std::size_t j = 0; j < rows; ++j) P_inv[j][t] = -P_inv[j][t];
  };

  const std::size_t n = std::min(rows, cols);
  std::size_t t = 0;
  for (; t < n; ++t) {
    bool found_any = true;
    while (true) {
      // Smallest nonzero magnitude in the trailing block becomes the pivot.
      std::size_t pi = rows, pj = cols;
      Int best(0);
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (A[i][j] != zero && (pi == rows || abs_value(A[i][j]) < best)) {
            best = abs_value(A[i][j]);
            pi = i;
            pj = j;
          }
      if (pi == rows) {
        found_any = false;
        break;
      }
      row_swap(t, pi);
      col_swap(t, pj);

      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (A[i][t] == zero) continue;
        Int q = A[i][t] / A[t][t];
        row_add(i, t, -q);
        if (A[i][t] != zero) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (A[t][j] == zero) continue;
        Int q = A[t][j] / A[t][t];
        col_add(j, t, -q);
        if (A[t][j] != zero) clean = false;
      }
      if (!clean) continue;

      // Enforce divisibility of the trailing block by the pivot.
      std::size_t bad = rows;
      for (std::size_t i = t + 1; i < rows && bad == rows; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (A[i][j] % A[t][t] != zero) {
            bad = i;
            break;
          }
      if (bad == rows) break;
      row_add(t, bad, Int(1));
    }
    if (!found_any) break;
    if (A[t][t] < zero) row_negate(t);
  }

  SmithForm out;
  out.rank = static_cast<int>(t);
  for (std::size_t i = 0; i < n; ++i) out.diagonal.push_back(circlemap::to_big(A[i][i]));
  out.P = to_big(P);
  out.P_inv = to_big(P_inv);
  out.Q = to_big(Q);
  out.Q_inv = to_big(Q_inv);
  return out;
}

}  // namespace detail

/// Smith normal form with transforms. Runs in checked 64-bit arithmetic and
/// reruns with arbitrary precision if any intermediate overflows.
inline SmithForm smith_normal_form(const IntMatrix<long long>& A, std::size_t cols) {
  const std::size_t rows = A.size();
  try {
    IntMatrix<Checked64> a(rows);
    for (std::size_t i = 0; i < rows; ++i) a[i].assign(A[i].begin(), A[i].end());
    return detail::smith_impl(std::move(a), rows, cols);
  } catch (const IntegerOverflow&) {
    IntMatrix<BigInt> a(rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (long long x : A[i]) a[i].emplace_back(x);
    SmithForm out = detail::smith_impl(std::move(a), rows, cols);
    out.used_bigint = true;
    return out;
  }
}

inline SmithForm smith_normal_form(const IntMatrix<long long>& A) {
  return smith_normal_form(A, A.empty() ? 0 : A.front().size());
}

/// Arbitrary-precision entry point (used for the fallback tests).
inline SmithForm smith_normal_form_big(const IntMatrix<BigInt>& A, std::size_t cols) {
  SmithForm out = detail::smith_impl(A, A.size(), cols);
  out.used_bigint = true;
  return out;
}

}  // namespace circlemap

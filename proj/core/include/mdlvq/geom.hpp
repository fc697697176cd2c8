#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdlvq {

inline constexpr int kMaxDim = 8;

using i64 = std::int64_t;
using i128 = __int128;

// ---------------------------------------------------------------------------
// Small integer vector. Capacity is fixed; dim() entries are significant.
// Ordering is lexicographic, which is the tie-break order used throughout.
// ---------------------------------------------------------------------------
struct IVec {
  std::array<i64, kMaxDim> c{};
  int n = 0;

  IVec() = default;
  explicit IVec(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxDim); }
  IVec(std::initializer_list<i64> xs) {
    assert(static_cast<int>(xs.size()) <= kMaxDim);
    n = static_cast<int>(xs.size());
    int i = 0;
    for (i64 x : xs) c[i++] = x;
  }

  int dim() const { return n; }
  i64& operator[](int i) { return c[static_cast<size_t>(i)]; }
  i64 operator[](int i) const { return c[static_cast<size_t>(i)]; }

  friend IVec operator+(const IVec& a, const IVec& b) {
    assert(a.n == b.n);
    IVec r(a.n);
    for (int i = 0; i < a.n; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
  }
  friend IVec operator-(const IVec& a, const IVec& b) {
    assert(a.n == b.n);
    IVec r(a.n);
    for (int i = 0; i < a.n; ++i) r.c[i] = a.c[i] - b.c[i];
    return r;
  }
  IVec operator-() const {
    IVec r(n);
    for (int i = 0; i < n; ++i) r.c[i] = -c[i];
    return r;
  }
  friend IVec operator*(i64 s, const IVec& a) {
    IVec r(a.n);
    for (int i = 0; i < a.n; ++i) r.c[i] = s * a.c[i];
    return r;
  }
  bool operator==(const IVec& o) const {
    if (n != o.n) return false;
    for (int i = 0; i < n; ++i)
      if (c[i] != o.c[i]) return false;
    return true;
  }
  bool operator<(const IVec& o) const {
    assert(n == o.n);
    for (int i = 0; i < n; ++i)
      if (c[i] != o.c[i]) return c[i] < o.c[i];
    return false;
  }
  bool is_zero() const {
    for (int i = 0; i < n; ++i)
      if (c[i] != 0) return false;
    return true;
  }
};

struct IVecHash {
  size_t operator()(const IVec& v) const {
    size_t h = 1469598103934665603ull;
    for (int i = 0; i < v.n; ++i) {
      h ^= static_cast<size_t>(v.c[i]) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h ^ static_cast<size_t>(v.n);
  }
};

// Real vector companion.
struct DVec {
  std::array<double, kMaxDim> c{};
  int n = 0;

  DVec() = default;
  explicit DVec(int dim) : n(dim) {}
  DVec(std::initializer_list<double> xs) {
    n = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) c[i++] = x;
  }

  int dim() const { return n; }
  double& operator[](int i) { return c[static_cast<size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<size_t>(i)]; }

  friend DVec operator+(const DVec& a, const DVec& b) {
    DVec r(a.n);
    for (int i = 0; i < a.n; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
  }
  friend DVec operator-(const DVec& a, const DVec& b) {
    DVec r(a.n);
    for (int i = 0; i < a.n; ++i) r.c[i] = a.c[i] - b.c[i];
    return r;
  }
  friend DVec operator*(double s, const DVec& a) {
    DVec r(a.n);
    for (int i = 0; i < a.n; ++i) r.c[i] = s * a.c[i];
    return r;
  }
  double norm2() const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += c[i] * c[i];
    return s;
  }
};

inline DVec to_dvec(const IVec& v) {
  DVec r(v.n);
  for (int i = 0; i < v.n; ++i) r.c[i] = static_cast<double>(v.c[i]);
  return r;
}

// ---------------------------------------------------------------------------
// Small square matrices, row-major. Rows act on the left: y = x * M.
// ---------------------------------------------------------------------------
struct IMat {
  std::array<i64, kMaxDim * kMaxDim> m{};
  int n = 0;

  IMat() = default;
  explicit IMat(int dim) : n(dim) {}

  i64& at(int r, int c) { return m[static_cast<size_t>(r * kMaxDim + c)]; }
  i64 at(int r, int c) const { return m[static_cast<size_t>(r * kMaxDim + c)]; }

  static IMat identity(int dim) {
    IMat r(dim);
    for (int i = 0; i < dim; ++i) r.at(i, i) = 1;
    return r;
  }
  IVec row(int r) const {
    IVec v(n);
    for (int j = 0; j < n; ++j) v[j] = at(r, j);
    return v;
  }
  friend IVec operator*(const IVec& x, const IMat& M) {
    assert(x.n == M.n);
    IVec r(M.n);
    for (int j = 0; j < M.n; ++j) {
      i64 s = 0;
      for (int i = 0; i < M.n; ++i) s += x[i] * M.at(i, j);
      r[j] = s;
    }
    return r;
  }
  friend IMat operator*(const IMat& A, const IMat& B) {
    assert(A.n == B.n);
    IMat r(A.n);
    for (int i = 0; i < A.n; ++i)
      for (int j = 0; j < A.n; ++j) {
        i64 s = 0;
        for (int k = 0; k < A.n; ++k) s += A.at(i, k) * B.at(k, j);
        r.at(i, j) = s;
      }
    return r;
  }
  IMat transposed() const {
    IMat r(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r.at(i, j) = at(j, i);
    return r;
  }
  bool operator==(const IMat& o) const {
    if (n != o.n) return false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (at(i, j) != o.at(i, j)) return false;
    return true;
  }
};

// Fraction-free determinant (Bareiss); exact for the sizes used here.
inline i64 idet(const IMat& M) {
  int n = M.n;
  std::array<i128, kMaxDim * kMaxDim> a{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(i * kMaxDim + j)] = M.at(i, j);
  auto at = [&](int i, int j) -> i128& { return a[static_cast<size_t>(i * kMaxDim + j)]; };
  i128 sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (at(k, k) == 0) {
      int p = -1;
      for (int i = k + 1; i < n; ++i)
        if (at(i, k) != 0) { p = i; break; }
      if (p < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
    prev = at(k, k);
  }
  i128 d = sign * at(n - 1, n - 1);
  return static_cast<i64>(d);
}

// Adjugate via cofactors, so that M * adj(M) = det(M) * I.
inline IMat iadjugate(const IMat& M) {
  int n = M.n;
  IMat r(n);
  if (n == 1) {
    r.at(0, 0) = 1;
    return r;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      IMat sub(n - 1);
      for (int r2 = 0, rr = 0; r2 < n; ++r2) {
        if (r2 == i) continue;
        for (int c2 = 0, cc = 0; c2 < n; ++c2) {
          if (c2 == j) continue;
          sub.at(rr, cc) = M.at(r2, c2);
          ++cc;
        }
        ++rr;
      }
      i64 cof = idet(sub);
      r.at(j, i) = (((i + j) & 1) ? -cof : cof);
    }
  return r;
}

struct DMat {
  std::array<double, kMaxDim * kMaxDim> m{};
  int n = 0;

  DMat() = default;
  explicit DMat(int dim) : n(dim) {}

  double& at(int r, int c) { return m[static_cast<size_t>(r * kMaxDim + c)]; }
  double at(int r, int c) const { return m[static_cast<size_t>(r * kMaxDim + c)]; }

  static DMat identity(int dim) {
    DMat r(dim);
    for (int i = 0; i < dim; ++i) r.at(i, i) = 1.0;
    return r;
  }
  DVec row(int r) const {
    DVec v(n);
    for (int j = 0; j < n; ++j) v[j] = at(r, j);
    return v;
  }
  friend DVec operator*(const DVec& x, const DMat& M) {
    DVec r(M.n);
    for (int j = 0; j < M.n; ++j) {
      double s = 0;
      for (int i = 0; i < M.n; ++i) s += x[i] * M.at(i, j);
      r[j] = s;
    }
    return r;
  }
  friend DMat operator*(const DMat& A, const DMat& B) {
    DMat r(A.n);
    for (int i = 0; i < A.n; ++i)
      for (int j = 0; j < A.n; ++j) {
        double s = 0;
        for (int k = 0; k < A.n; ++k) s += A.at(i, k) * B.at(k, j);
        r.at(i, j) = s;
      }
    return r;
  }
  DMat transposed() const {
    DMat r(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r.at(i, j) = at(j, i);
    return r;
  }
};

inline DMat to_dmat(const IMat& M) {
  DMat r(M.n);
  for (int i = 0; i < M.n; ++i)
    for (int j = 0; j < M.n; ++j) r.at(i, j) = static_cast<double>(M.at(i, j));
  return r;
}

inline double ddet(const DMat& M) {
  DMat a = M;
  double d = 1.0;
  for (int k = 0; k < a.n; ++k) {
    int p = k;
    for (int i = k + 1; i < a.n; ++i)
      if (std::fabs(a.at(i, k)) > std::fabs(a.at(p, k))) p = i;
    if (a.at(p, k) == 0.0) return 0.0;
    if (p != k) {
      for (int j = 0; j < a.n; ++j) std::swap(a.at(k, j), a.at(p, j));
      d = -d;
    }
    d *= a.at(k, k);
    for (int i = k + 1; i < a.n; ++i) {
      double f = a.at(i, k) / a.at(k, k);
      for (int j = k; j < a.n; ++j) a.at(i, j) -= f * a.at(k, j);
    }
  }
  return d;
}

inline DMat dinverse(const DMat& M) {
  int n = M.n;
  DMat a = M, inv = DMat::identity(n);
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(a.at(i, k)) > std::fabs(a.at(p, k))) p = i;
    if (a.at(p, k) == 0.0) throw std::domain_error("singular matrix");
    if (p != k)
      for (int j = 0; j < n; ++j) {
        std::swap(a.at(k, j), a.at(p, j));
        std::swap(inv.at(k, j), inv.at(p, j));
      }
    double piv = a.at(k, k);
    for (int j = 0; j < n; ++j) {
      a.at(k, j) /= piv;
      inv.at(k, j) /= piv;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      double f = a.at(i, k);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a.at(i, j) -= f * a.at(k, j);
        inv.at(i, j) -= f * inv.at(k, j);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Exact rational scalar. Used for squared distances, costs and the zeta
// weights, so ordering decisions never go through floating point.
// ---------------------------------------------------------------------------
struct Frac {
  i64 num = 0;
  i64 den = 1;  // always > 0, gcd(num, den) = 1

  Frac() = default;
  Frac(i64 n) : num(n), den(1) {}
  Frac(i64 n, i64 d) { assign(n, d); }

  void assign(i64 n, i64 d) {
    if (d == 0) throw std::domain_error("zero denominator");
    if (d < 0) { n = -n; d = -d; }
    i64 g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    num = n;
    den = d;
  }

  static Frac reduce128(i128 n, i128 d) {
    if (d < 0) { n = -n; d = -d; }
    i128 a = n < 0 ? -n : n, b = d;
    while (b) { i128 t = a % b; a = b; b = t; }
    if (a > 1) { n /= a; d /= a; }
    constexpr i128 lim = static_cast<i128>(INT64_MAX);
    if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational overflow");
    Frac f;
    f.num = static_cast<i64>(n);
    f.den = static_cast<i64>(d);
    return f;
  }

  friend Frac operator+(const Frac& a, const Frac& b) {
    return reduce128(static_cast<i128>(a.num) * b.den + static_cast<i128>(b.num) * a.den,
                     static_cast<i128>(a.den) * b.den);
  }
  friend Frac operator-(const Frac& a, const Frac& b) {
    return reduce128(static_cast<i128>(a.num) * b.den - static_cast<i128>(b.num) * a.den,
                     static_cast<i128>(a.den) * b.den);
  }
  friend Frac operator*(const Frac& a, const Frac& b) {
    return reduce128(static_cast<i128>(a.num) * b.num, static_cast<i128>(a.den) * b.den);
  }
  friend Frac operator/(const Frac& a, const Frac& b) {
    if (b.num == 0) throw std::domain_error("division by zero");
    return reduce128(static_cast<i128>(a.num) * b.den, static_cast<i128>(a.den) * b.num);
  }
  friend bool operator==(const Frac& a, const Frac& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Frac& a, const Frac& b) {
    return static_cast<i128>(a.num) * b.den < static_cast<i128>(b.num) * a.den;
  }
  friend bool operator<=(const Frac& a, const Frac& b) { return a == b || a < b; }
  friend bool operator>(const Frac& a, const Frac& b) { return b < a; }
  friend bool operator>=(const Frac& a, const Frac& b) { return b <= a; }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return den == 1; }
};

// Parses a plain decimal literal ("0.05", "1", "-0.125") into an exact Frac.
inline Frac frac_from_decimal(const std::string& s) {
  size_t pos = 0;
  bool neg = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    neg = s[pos] == '-';
    ++pos;
  }
  i128 num = 0, den = 1;
  bool any = false, dot = false;
  for (; pos < s.size(); ++pos) {
    char ch = s[pos];
    if (ch == '.') {
      if (dot) throw std::invalid_argument("bad decimal: " + s);
      dot = true;
      continue;
    }
    if (ch < '0' || ch > '9') throw std::invalid_argument("bad decimal: " + s);
    num = num * 10 + (ch - '0');
    if (dot) den *= 10;
    any = true;
    if (den > static_cast<i128>(1000000000000000000LL)) throw std::overflow_error("decimal too long");
  }
  if (!any) throw std::invalid_argument("bad decimal: " + s);
  return Frac::reduce128(neg ? -num : num, den);
}

}  // namespace mdlvq

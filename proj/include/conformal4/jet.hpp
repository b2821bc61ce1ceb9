#pragma once

// Second-order forward-mode jets (multivariate hyper-dual numbers).
//
// A Jet<N> carries a value, its gradient and its full Hessian with respect to
// N seed variables. Arithmetic propagates all three exactly, so evaluating a
// closed-form metric on jets yields g, dg and ddg without truncation error.

#include <array>
#include <cmath>

namespace conformal4 {

template <int N>
struct Jet {
  double v = 0.0;
  std::array<double, N> d{};
  std::array<double, N * N> h{};  // row-major, symmetric

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet variable(double value, int index) {
    Jet j(value);
    j.d[index] = 1.0;
    return j;
  }

  double hess(int i, int k) const { return h[i * N + k]; }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    for (int i = 0; i < N * N; ++i) h[i] += o.h[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    for (int i = 0; i < N * N; ++i) h[i] -= o.h[i];
    return *this;
  }
  Jet& operator*=(double c) {
    v *= c;
    for (auto& x : d) x *= c;
    for (auto& x : h) x *= c;
    return *this;
  }
};

// Applies a scalar function given its value and first two derivatives at a.v.
template <int N>
Jet<N> chain(const Jet<N>& a, double f0, double f1, double f2) {
  Jet<N> r;
  r.v = f0;
  for (int i = 0; i < N; ++i) r.d[i] = f1 * a.d[i];
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k)
      r.h[i * N + k] = f1 * a.h[i * N + k] + f2 * a.d[i] * a.d[k];
  return r;
}

template <int N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N>
Jet<N> operator-(Jet<N> a) { return a *= -1.0; }
template <int N>
Jet<N> operator+(Jet<N> a, double c) { a.v += c; return a; }
template <int N>
Jet<N> operator+(double c, Jet<N> a) { a.v += c; return a; }
template <int N>
Jet<N> operator-(Jet<N> a, double c) { a.v -= c; return a; }
template <int N>
Jet<N> operator-(double c, Jet<N> a) { a *= -1.0; a.v += c; return a; }
template <int N>
Jet<N> operator*(Jet<N> a, double c) { return a *= c; }
template <int N>
Jet<N> operator*(double c, Jet<N> a) { return a *= c; }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.v * b.d[i] + b.v * a.d[i];
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k)
      r.h[i * N + k] = a.v * b.h[i * N + k] + b.v * a.h[i * N + k] +
                       a.d[i] * b.d[k] + b.d[i] * a.d[k];
  return r;
}

template <int N>
Jet<N> reciprocal(const Jet<N>& a) {
  const double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) { return a * reciprocal(b); }
template <int N>
Jet<N> operator/(Jet<N> a, double c) { return a *= (1.0 / c); }
template <int N>
Jet<N> operator/(double c, const Jet<N>& b) { return reciprocal(b) * c; }

template <int N>
Jet<N> sin(const Jet<N>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, s, c, -s);
}
template <int N>
Jet<N> cos(const Jet<N>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, c, -s, -c);
}
template <int N>
Jet<N> exp(const Jet<N>& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
template <int N>
Jet<N> log(const Jet<N>& a) {
  const double inv = 1.0 / a.v;
  return chain(a, std::log(a.v), inv, -inv * inv);
}
template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  const double r = std::sqrt(a.v);
  return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}

// Integer powers go through repeated multiplication so negative bases work.
template <int N>
Jet<N> pow(const Jet<N>& a, int n) {
  if (n < 0) return reciprocal(pow(a, -n));
  Jet<N> result(1.0);
  Jet<N> base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

template <int N>
Jet<N> pow(const Jet<N>& a, double p) {
  if (p == std::floor(p) && std::abs(p) <= 64.0) return pow(a, static_cast<int>(p));
  const double f0 = std::pow(a.v, p);
  return chain(a, f0, p * f0 / a.v, p * (p - 1.0) * f0 / (a.v * a.v));
}

template <int N>
Jet<N> pow(const Jet<N>& a, const Jet<N>& b) {
  bool constant_exponent = true;
  for (double x : b.d) constant_exponent = constant_exponent && x == 0.0;
  for (double x : b.h) constant_exponent = constant_exponent && x == 0.0;
  if (constant_exponent) return pow(a, b.v);
  return exp(b * log(a));
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) { return x.v; }

using Jet4 = Jet<4>;

}  // namespace conformal4

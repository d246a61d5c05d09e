#pragma once
// Vectorized forward-mode dual numbers: value plus W directional derivatives.
// Gradients of the log posterior are assembled by sweeping over parameter
// chunks of width W, seeding the identity into each chunk.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace hierform {

template <int W>
struct Dual {
  double v = 0.0;
  std::array<double, W> d{};

  Dual() = default;
  Dual(double x) : v(x) {}  // NOLINT: implicit from constants is the point
  Dual(double x, int seed_slot) : v(x) { d[seed_slot] = 1.0; }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < W; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < W; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < W; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (int i = 0; i < W; ++i) d[i] *= s;
    return *this;
  }
  Dual& operator+=(double s) {
    v += s;
    return *this;
  }
};

template <int W>
inline Dual<W> operator+(Dual<W> a, const Dual<W>& b) { return a += b; }
template <int W>
inline Dual<W> operator-(Dual<W> a, const Dual<W>& b) { return a -= b; }
template <int W>
inline Dual<W> operator*(Dual<W> a, const Dual<W>& b) { return a *= b; }

template <int W>
inline Dual<W> operator+(Dual<W> a, double b) { a.v += b; return a; }
template <int W>
inline Dual<W> operator+(double a, Dual<W> b) { b.v += a; return b; }
template <int W>
inline Dual<W> operator-(Dual<W> a, double b) { a.v -= b; return a; }
template <int W>
inline Dual<W> operator-(double a, Dual<W> b) {
  b.v = a - b.v;
  for (int i = 0; i < W; ++i) b.d[i] = -b.d[i];
  return b;
}
template <int W>
inline Dual<W> operator*(Dual<W> a, double b) { return a *= b; }
template <int W>
inline Dual<W> operator*(double a, Dual<W> b) { return b *= a; }

template <int W>
inline Dual<W> operator-(Dual<W> a) {
  a.v = -a.v;
  for (int i = 0; i < W; ++i) a.d[i] = -a.d[i];
  return a;
}

template <int W>
inline Dual<W> operator/(const Dual<W>& a, const Dual<W>& b) {
  Dual<W> r;
  const double inv = 1.0 / b.v;
  r.v = a.v * inv;
  for (int i = 0; i < W; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
  return r;
}
template <int W>
inline Dual<W> operator/(Dual<W> a, double b) { return a *= (1.0 / b); }
template <int W>
inline Dual<W> operator/(double a, const Dual<W>& b) {
  Dual<W> r;
  r.v = a / b.v;
  const double f = -r.v / b.v;
  for (int i = 0; i < W; ++i) r.d[i] = f * b.d[i];
  return r;
}

template <int W> inline bool operator<(const Dual<W>& a, const Dual<W>& b) { return a.v < b.v; }
template <int W> inline bool operator<(const Dual<W>& a, double b) { return a.v < b; }
template <int W> inline bool operator<(double a, const Dual<W>& b) { return a < b.v; }
template <int W> inline bool operator>(const Dual<W>& a, double b) { return a.v > b; }
template <int W> inline bool operator>(double a, const Dual<W>& b) { return a > b.v; }

template <int W>
inline Dual<W> chain(const Dual<W>& x, double fv, double dfv) {
  Dual<W> r;
  r.v = fv;
  for (int i = 0; i < W; ++i) r.d[i] = dfv * x.d[i];
  return r;
}

template <int W>
inline Dual<W> exp(const Dual<W>& x) {
  const double e = std::exp(x.v);
  return chain(x, e, e);
}
template <int W>
inline Dual<W> log(const Dual<W>& x) { return chain(x, std::log(x.v), 1.0 / x.v); }
template <int W>
inline Dual<W> log1p(const Dual<W>& x) { return chain(x, std::log1p(x.v), 1.0 / (1.0 + x.v)); }
template <int W>
inline Dual<W> sqrt(const Dual<W>& x) {
  const double s = std::sqrt(x.v);
  return chain(x, s, 0.5 / s);
}
template <int W>
inline Dual<W> tanh(const Dual<W>& x) {
  const double t = std::tanh(x.v);
  return chain(x, t, 1.0 - t * t);
}
template <int W>
inline Dual<W> fabs(const Dual<W>& x) { return x.v < 0 ? -x : x; }

template <int W>
inline Dual<W> pow(const Dual<W>& a, const Dual<W>& b) {
  // a^b with a > 0; domain violations surface as NaN just like std::pow
  const double p = std::pow(a.v, b.v);
  Dual<W> r;
  r.v = p;
  const double la = std::log(a.v);
  const double fa = b.v * std::pow(a.v, b.v - 1.0);
  for (int i = 0; i < W; ++i) r.d[i] = fa * a.d[i] + p * la * b.d[i];
  return r;
}
template <int W>
inline Dual<W> pow(const Dual<W>& a, double b) {
  return chain(a, std::pow(a.v, b), b * std::pow(a.v, b - 1.0));
}

// integer power, valid for negative bases
template <int W>
inline Dual<W> powi(const Dual<W>& a, long long n) {
  if (n == 0) return Dual<W>(1.0);
  const bool neg = n < 0;
  long long m = neg ? -n : n;
  Dual<W> base = a, acc(1.0);
  while (m > 0) {
    if (m & 1) acc *= base;
    base *= base;
    m >>= 1;
  }
  return neg ? 1.0 / acc : acc;
}

inline double powi(double a, long long n) {
  if (n == 0) return 1.0;
  const bool neg = n < 0;
  long long m = neg ? -n : n;
  double base = a, acc = 1.0;
  while (m > 0) {
    if (m & 1) acc *= base;
    base *= base;
    m >>= 1;
  }
  return neg ? 1.0 / acc : acc;
}

template <int W>
inline double value_of(const Dual<W>& x) { return x.v; }
inline double value_of(double x) { return x; }

template <int W>
inline bool is_finite(const Dual<W>& x) { return std::isfinite(x.v); }
inline bool is_finite(double x) { return std::isfinite(x); }

// log(1 + e^x), overflow-safe; derivative is the logistic function
template <int W>
inline Dual<W> log1p_exp(const Dual<W>& x) {
  if (x.v > 35.0) {
    Dual<W> r = x;
    r.v += std::exp(-x.v);
    return r;  // derivative ~ 1
  }
  const double e = std::exp(x.v);
  return chain(x, std::log1p(e), e / (1.0 + e));
}
inline double log1p_exp(double x) {
  if (x > 35.0) return x + std::exp(-x);
  return std::log1p(std::exp(x));
}

template <int W>
inline Dual<W> inv_logit(const Dual<W>& x) {
  if (x.v >= 0) {
    const double p = 1.0 / (1.0 + std::exp(-x.v));
    return chain(x, p, p * (1.0 - p));
  }
  const double e = std::exp(x.v);
  const double p = e / (1.0 + e);
  return chain(x, p, p * (1.0 - p));
}
inline double inv_logit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <class S>
inline S log_sum_exp(const S& a, const S& b) {
  if (value_of(a) == -std::numeric_limits<double>::infinity()) return b;
  if (value_of(b) == -std::numeric_limits<double>::infinity()) return a;
  if (value_of(a) >= value_of(b)) return a + log1p_exp(b - a);
  return b + log1p_exp(a - b);
}

}  // namespace hierform

#ifndef EXTCALC_JETS_HPP
#define EXTCALC_JETS_HPP

// Forward-mode derivative propagation. Two carriers:
//
//   Dual<T>  first-order coefficients over a dynamic seed set, nestable
//            (Dual<Dual<double>> carries mixed second derivatives) so that
//            derived field closures can themselves be differentiated.
//   Jet2     value + gradient + packed symmetric Hessian in one pass; the
//            engine behind chart-transition matrices and theta-parameters.
//
// An empty coefficient vector means "constant": it broadcasts against any
// seed width. Seeded operands of different nonzero widths are a program bug.

#include <cmath>
#include <cstddef>
#include <vector>

#include "extcalc/errors.hpp"

namespace extcalc {

template <class T>
struct Dual {
    T v{};
    std::vector<T> d;  // empty = constant

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT: implicit by design, mirrors double
    Dual(T value, std::vector<T> deriv) : v(std::move(value)), d(std::move(deriv)) {}

    static Dual seeded(T value, std::size_t width, std::size_t slot) {
        Dual r;
        r.v = std::move(value);
        r.d.assign(width, T{});
        r.d[slot] = T(1.0);
        return r;
    }
};

using J1 = Dual<double>;
using J2 = Dual<J1>;
using J3 = Dual<J2>;

template <class S>
struct JetLevel;
template <>
struct JetLevel<double> {
    static constexpr int value = 0;
};
template <class T>
struct JetLevel<Dual<T>> {
    static constexpr int value = JetLevel<T>::value + 1;
};

inline double scalar_value(double x) { return x; }
template <class T>
double scalar_value(const Dual<T>& x) {
    return scalar_value(x.v);
}

namespace detail {

inline std::size_t joint_width(std::size_t wa, std::size_t wb) {
    if (wa != 0 && wb != 0 && wa != wb) throw Error("jet seed width mismatch");
    return wa != 0 ? wa : wb;
}

template <class T>
const T& coeff(const std::vector<T>& d, std::size_t i) {
    static const T zero{};
    return d.empty() ? zero : d[i];
}

}  // namespace detail

template <class T>
Dual<T> operator-(const Dual<T>& a) {
    Dual<T> r;
    r.v = -a.v;
    r.d.reserve(a.d.size());
    for (const T& c : a.d) r.d.push_back(-c);
    return r;
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v + b.v;
    const std::size_t w = detail::joint_width(a.d.size(), b.d.size());
    r.d.reserve(w);
    for (std::size_t i = 0; i < w; ++i) r.d.push_back(detail::coeff(a.d, i) + detail::coeff(b.d, i));
    return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v - b.v;
    const std::size_t w = detail::joint_width(a.d.size(), b.d.size());
    r.d.reserve(w);
    for (std::size_t i = 0; i < w; ++i) r.d.push_back(detail::coeff(a.d, i) - detail::coeff(b.d, i));
    return r;
}

template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v * b.v;
    const std::size_t w = detail::joint_width(a.d.size(), b.d.size());
    r.d.reserve(w);
    for (std::size_t i = 0; i < w; ++i)
        r.d.push_back(detail::coeff(a.d, i) * b.v + a.v * detail::coeff(b.d, i));
    return r;
}

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    if (scalar_value(b.v) == 0.0) throw DomainError("division by zero");
    Dual<T> r;
    r.v = a.v / b.v;
    const std::size_t w = detail::joint_width(a.d.size(), b.d.size());
    r.d.reserve(w);
    for (std::size_t i = 0; i < w; ++i)
        r.d.push_back((detail::coeff(a.d, i) - r.v * detail::coeff(b.d, i)) / b.v);
    return r;
}

// double mixes: keeps hot paths free of temporary constant duals
template <class T>
Dual<T> operator+(const Dual<T>& a, double c) {
    Dual<T> r = a;
    r.v = r.v + T(c);
    return r;
}
template <class T>
Dual<T> operator+(double c, const Dual<T>& a) {
    return a + c;
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double c) {
    return a + (-c);
}
template <class T>
Dual<T> operator-(double c, const Dual<T>& a) {
    return -(a + (-c));
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double c) {
    Dual<T> r;
    r.v = a.v * T(c);
    r.d.reserve(a.d.size());
    for (const T& x : a.d) r.d.push_back(x * T(c));
    return r;
}
template <class T>
Dual<T> operator*(double c, const Dual<T>& a) {
    return a * c;
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double c) {
    if (c == 0.0) throw DomainError("division by zero");
    return a * (1.0 / c);
}
template <class T>
Dual<T> operator/(double c, const Dual<T>& a) {
    return Dual<T>(c) / a;
}

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
    a = a + b;
    return a;
}
template <class T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) {
    a = a - b;
    return a;
}

namespace detail {

// res = f(a) with chain factor fp = f'(a.v)
template <class T, class F>
Dual<T> dual_chain(const Dual<T>& a, F&& fval, const T& fp) {
    Dual<T> r;
    r.v = fval(a.v);
    r.d.reserve(a.d.size());
    for (const T& c : a.d) r.d.push_back(fp * c);
    return r;
}

}  // namespace detail

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) { return std::tan(x); }
inline double exp(double x) { return std::exp(x); }

inline double log(double x) {
    if (x <= 0.0) throw DomainError("log of non-positive value");
    return std::log(x);
}

inline double sqrt(double x) {
    if (x < 0.0) throw DomainError("sqrt of negative value");
    return std::sqrt(x);
}

inline double atan2(double y, double x) {
    if (x == 0.0 && y == 0.0) throw DomainError("atan2 at the origin");
    return std::atan2(y, x);
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
    return detail::dual_chain(
        a, [](const T& v) { return sin(v); }, cos(a.v));
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
    return detail::dual_chain(
        a, [](const T& v) { return cos(v); }, -sin(a.v));
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
    const T c = cos(a.v);
    return detail::dual_chain(
        a, [](const T& v) { return tan(v); }, T(1.0) / (c * c));
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
    return detail::dual_chain(
        a, [](const T& v) { return exp(v); }, exp(a.v));
}
template <class T>
Dual<T> log(const Dual<T>& a) {
    if (scalar_value(a.v) <= 0.0) throw DomainError("log of non-positive value");
    return detail::dual_chain(
        a, [](const T& v) { return log(v); }, T(1.0) / a.v);
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    const double av = scalar_value(a.v);
    if (av < 0.0) throw DomainError("sqrt of negative value");
    if (av == 0.0 && !a.d.empty()) throw DomainError("sqrt derivative at zero");
    const T s = sqrt(a.v);
    return detail::dual_chain(
        a, [](const T& v) { return sqrt(v); }, T(0.5) / s);
}

template <class T>
Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
    if (scalar_value(x.v) == 0.0 && scalar_value(y.v) == 0.0)
        throw DomainError("atan2 at the origin");
    Dual<T> r;
    r.v = atan2(y.v, x.v);
    const std::size_t w = detail::joint_width(y.d.size(), x.d.size());
    if (w != 0) {
        const T rr = x.v * x.v + y.v * y.v;
        const T wy = x.v / rr;
        const T wx = -(y.v / rr);
        r.d.reserve(w);
        for (std::size_t i = 0; i < w; ++i)
            r.d.push_back(wy * detail::coeff(y.d, i) + wx * detail::coeff(x.d, i));
    }
    return r;
}

namespace detail {

inline bool integral_exponent(double e, long long& n) {
    const double r = std::nearbyint(e);
    if (r != e || std::abs(r) > 64) return false;
    n = static_cast<long long>(r);
    return true;
}

template <class S>
S int_pow(const S& base, long long n) {
    if (n == 0) return S(1.0);
    if (n < 0) return S(1.0) / int_pow(base, -n);
    S acc = base;
    S out = S(1.0);
    long long k = n;
    while (k > 0) {
        if (k & 1) out = out * acc;
        k >>= 1;
        if (k) acc = acc * acc;
    }
    return out;
}

}  // namespace detail

// numeric exponent only, per the expression grammar
inline double pow(double x, double e) {
    long long n;
    if (detail::integral_exponent(e, n)) {
        if (n < 0 && x == 0.0) throw DomainError("division by zero in negative power");
        return detail::int_pow(x, n);
    }
    if (x <= 0.0) throw DomainError("non-integer power of non-positive base");
    return std::pow(x, e);
}

template <class T>
Dual<T> pow(const Dual<T>& a, double e) {
    long long n;
    if (detail::integral_exponent(e, n)) {
        if (n < 0 && scalar_value(a.v) == 0.0)
            throw DomainError("division by zero in negative power");
        Dual<T> r;
        r.v = detail::int_pow(a.v, n);
        if (!a.d.empty()) {
            if (n == 0) {
                r.d.assign(a.d.size(), T{});
            } else {
                const T fp = T(static_cast<double>(n)) * detail::int_pow(a.v, n - 1);
                r.d.reserve(a.d.size());
                for (const T& c : a.d) r.d.push_back(fp * c);
            }
        }
        return r;
    }
    if (scalar_value(a.v) <= 0.0) throw DomainError("non-integer power of non-positive base");
    const T pv = pow(a.v, e);
    return detail::dual_chain(
        a, [&](const T&) { return pv; }, T(e) * pow(a.v, e - 1.0));
}

// ---------------------------------------------------------------------------
// Jet2: value, gradient, Hessian (packed upper triangle, symmetric by layout)
// ---------------------------------------------------------------------------

struct Jet2 {
    double v = 0.0;
    std::vector<double> g;  // empty = constant
    std::vector<double> h;  // packed upper triangle, size m(m+1)/2

    Jet2() = default;
    Jet2(double c) : v(c) {}  // NOLINT: implicit by design

    static Jet2 seeded(double value, std::size_t width, std::size_t slot) {
        Jet2 r;
        r.v = value;
        r.g.assign(width, 0.0);
        r.g[slot] = 1.0;
        r.h.assign(width * (width + 1) / 2, 0.0);
        return r;
    }

    std::size_t width() const { return g.size(); }
    // index into the packed triangle, i <= j
    static std::size_t tri(std::size_t m, std::size_t i, std::size_t j) {
        return i * m - i * (i - 1) / 2 + (j - i);
    }
    double hess(std::size_t i, std::size_t j) const {
        if (h.empty()) return 0.0;
        const std::size_t m = g.size();
        return i <= j ? h[tri(m, i, j)] : h[tri(m, j, i)];
    }
};

inline double scalar_value(const Jet2& x) { return x.v; }

namespace detail {

inline std::size_t jet2_width(const Jet2& a, const Jet2& b) {
    return joint_width(a.width(), b.width());
}
inline double gc(const Jet2& a, std::size_t i) { return a.g.empty() ? 0.0 : a.g[i]; }
inline double hc(const Jet2& a, std::size_t k) { return a.h.empty() ? 0.0 : a.h[k]; }

}  // namespace detail

inline Jet2 operator-(const Jet2& a) {
    Jet2 r;
    r.v = -a.v;
    r.g.reserve(a.g.size());
    for (double x : a.g) r.g.push_back(-x);
    r.h.reserve(a.h.size());
    for (double x : a.h) r.h.push_back(-x);
    return r;
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v + b.v;
    const std::size_t m = detail::jet2_width(a, b);
    r.g.resize(m);
    r.h.resize(m * (m + 1) / 2);
    for (std::size_t i = 0; i < m; ++i) r.g[i] = detail::gc(a, i) + detail::gc(b, i);
    for (std::size_t k = 0; k < r.h.size(); ++k) r.h[k] = detail::hc(a, k) + detail::hc(b, k);
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v - b.v;
    const std::size_t m = detail::jet2_width(a, b);
    r.g.resize(m);
    r.h.resize(m * (m + 1) / 2);
    for (std::size_t i = 0; i < m; ++i) r.g[i] = detail::gc(a, i) - detail::gc(b, i);
    for (std::size_t k = 0; k < r.h.size(); ++k) r.h[k] = detail::hc(a, k) - detail::hc(b, k);
    return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v * b.v;
    const std::size_t m = detail::jet2_width(a, b);
    r.g.resize(m);
    r.h.resize(m * (m + 1) / 2);
    for (std::size_t i = 0; i < m; ++i) r.g[i] = detail::gc(a, i) * b.v + a.v * detail::gc(b, i);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const std::size_t k = Jet2::tri(m, i, j);
            r.h[k] = detail::hc(a, k) * b.v + a.v * detail::hc(b, k) +
                     detail::gc(a, i) * detail::gc(b, j) + detail::gc(a, j) * detail::gc(b, i);
        }
    return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
    if (b.v == 0.0) throw DomainError("division by zero");
    Jet2 r;
    r.v = a.v / b.v;
    const std::size_t m = detail::jet2_width(a, b);
    r.g.resize(m);
    r.h.resize(m * (m + 1) / 2);
    for (std::size_t i = 0; i < m; ++i) r.g[i] = (detail::gc(a, i) - r.v * detail::gc(b, i)) / b.v;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const std::size_t k = Jet2::tri(m, i, j);
            r.h[k] = (detail::hc(a, k) - r.v * detail::hc(b, k) - r.g[i] * detail::gc(b, j) -
                      r.g[j] * detail::gc(b, i)) /
                     b.v;
        }
    return r;
}

namespace detail {

// c = f(a): first/second chain rule with fp = f', fpp = f''
inline Jet2 jet2_chain(const Jet2& a, double fv, double fp, double fpp) {
    Jet2 r;
    r.v = fv;
    const std::size_t m = a.width();
    r.g.resize(m);
    r.h.resize(m * (m + 1) / 2);
    for (std::size_t i = 0; i < m; ++i) r.g[i] = fp * a.g[i];
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const std::size_t k = Jet2::tri(m, i, j);
            r.h[k] = fp * hc(a, k) + fpp * a.g[i] * a.g[j];
        }
    return r;
}

}  // namespace detail

inline Jet2 sin(const Jet2& a) { return detail::jet2_chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return detail::jet2_chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 tan(const Jet2& a) {
    const double t = std::tan(a.v);
    const double sec2 = 1.0 + t * t;
    return detail::jet2_chain(a, t, sec2, 2.0 * t * sec2);
}
inline Jet2 exp(const Jet2& a) {
    const double e = std::exp(a.v);
    return detail::jet2_chain(a, e, e, e);
}
inline Jet2 log(const Jet2& a) {
    if (a.v <= 0.0) throw DomainError("log of non-positive value");
    return detail::jet2_chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
inline Jet2 sqrt(const Jet2& a) {
    if (a.v < 0.0) throw DomainError("sqrt of negative value");
    if (a.v == 0.0 && !a.g.empty()) throw DomainError("sqrt derivative at zero");
    const double s = std::sqrt(a.v);
    return detail::jet2_chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet2 pow(const Jet2& a, double e) {
    long long n;
    double fv, fp, fpp;
    if (detail::integral_exponent(e, n)) {
        if (n < 0 && a.v == 0.0) throw DomainError("division by zero in negative power");
        fv = detail::int_pow(a.v, n);
        fp = (n == 0) ? 0.0 : static_cast<double>(n) * detail::int_pow(a.v, n - 1);
        fpp = (n == 0 || n == 1) ? 0.0
                                 : static_cast<double>(n) * static_cast<double>(n - 1) *
                                       detail::int_pow(a.v, n - 2);
    } else {
        if (a.v <= 0.0) throw DomainError("non-integer power of non-positive base");
        fv = std::pow(a.v, e);
        fp = e * std::pow(a.v, e - 1.0);
        fpp = e * (e - 1.0) * std::pow(a.v, e - 2.0);
    }
    return detail::jet2_chain(a, fv, fp, fpp);
}

inline Jet2 atan2(const Jet2& y, const Jet2& x) {
    if (x.v == 0.0 && y.v == 0.0) throw DomainError("atan2 at the origin");
    Jet2 r;
    r.v = std::atan2(y.v, x.v);
    const std::size_t m = detail::jet2_width(y, x);
    if (m == 0) return r;
    const double rr = x.v * x.v + y.v * y.v;
    const double wy = x.v / rr;
    const double wx = -y.v / rr;
    const double wyy = -2.0 * x.v * y.v / (rr * rr);
    const double wyx = (y.v * y.v - x.v * x.v) / (rr * rr);
    const double wxx = 2.0 * x.v * y.v / (rr * rr);
    r.g.resize(m);
    r.h.resize(m * (m + 1) / 2);
    for (std::size_t i = 0; i < m; ++i) r.g[i] = wy * detail::gc(y, i) + wx * detail::gc(x, i);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const std::size_t k = Jet2::tri(m, i, j);
            r.h[k] = wy * detail::hc(y, k) + wx * detail::hc(x, k) +
                     wyy * detail::gc(y, i) * detail::gc(y, j) +
                     wyx * (detail::gc(y, i) * detail::gc(x, j) + detail::gc(x, i) * detail::gc(y, j)) +
                     wxx * detail::gc(x, i) * detail::gc(x, j);
        }
    return r;
}

}  // namespace extcalc

#endif

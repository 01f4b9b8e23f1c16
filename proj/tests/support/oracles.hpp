#ifndef EXTCALC_TESTS_ORACLES_HPP
#define EXTCALC_TESTS_ORACLES_HPP

// Test-side oracles, kept independent of the implementation paths they
// check: finite differences over fiber-point coordinates, Gaussian matrix
// inversion, random points and tensors.

#include <cmath>
#include <vector>

#include "extcalc/bundle.hpp"
#include "extcalc/extfield.hpp"
#include "extcalc/multitensor.hpp"
#include "test_rng.hpp"

namespace extcalc::testing {

inline TensorD random_tensor(Rng& rng, int n, Valence v, double lo = -1.0, double hi = 1.0) {
    TensorD t(n, v);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

inline TensorD random_tensor(std::uint64_t seed, int n, Valence v) {
    Rng rng(seed);
    return random_tensor(rng, n, v);
}

inline FiberPointD random_point(const BundleSpec& spec, Rng& rng, double base_lo = -1.0,
                                double base_hi = 1.0) {
    FiberPointD q;
    q.base.reserve(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) q.base.push_back(rng.uniform(base_lo, base_hi));
    for (const Valence& v : spec.types) q.args.push_back(random_tensor(rng, spec.n, v));
    return q;
}

// central difference of f's components against one coordinate of N
inline TensorD fd_partial(const ExtField& f, const FiberPointD& q, std::size_t coord) {
    FiberPointD hi = q, lo = q;
    const std::size_t n = q.base.size();
    double x;
    if (coord < n) {
        x = q.base[coord];
    } else {
        std::size_t off = coord - n;
        std::size_t P = 0;
        while (off >= q.args[P].size()) off -= q.args[P++].size();
        x = q.args[P][off];
    }
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    if (coord < n) {
        hi.base[coord] += h;
        lo.base[coord] -= h;
    } else {
        std::size_t off = coord - n;
        std::size_t P = 0;
        while (off >= q.args[P].size()) off -= q.args[P++].size();
        hi.args[P][off] += h;
        lo.args[P][off] -= h;
    }
    TensorD up = f.eval(hi);
    const TensorD dn = f.eval(lo);
    for (std::size_t c = 0; c < up.size(); ++c) up[c] = (up[c] - dn[c]) / (2 * h);
    return up;
}

// Gauss-Jordan inverse; the test-side route to T = S^{-1}
inline std::vector<double> invert(const std::vector<double>& m, int n) {
    std::vector<double> a = m;
    std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * n + col]))
                piv = r;
        for (int c = 0; c < n; ++c) {
            std::swap(a[static_cast<std::size_t>(piv) * n + c], a[static_cast<std::size_t>(col) * n + c]);
            std::swap(inv[static_cast<std::size_t>(piv) * n + c],
                      inv[static_cast<std::size_t>(col) * n + c]);
        }
        const double d = a[static_cast<std::size_t>(col) * n + col];
        for (int c = 0; c < n; ++c) {
            a[static_cast<std::size_t>(col) * n + c] /= d;
            inv[static_cast<std::size_t>(col) * n + c] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[static_cast<std::size_t>(r) * n + col];
            for (int c = 0; c < n; ++c) {
                a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
                inv[static_cast<std::size_t>(r) * n + c] -= f * inv[static_cast<std::size_t>(col) * n + c];
            }
        }
    }
    return inv;
}

// well-conditioned random matrix: identity plus a small perturbation
inline std::vector<double> random_invertible(Rng& rng, int n) {
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m[static_cast<std::size_t>(i) * n + j] = (i == j ? 1.0 : 0.0) + 0.35 * rng.uniform();
    return m;
}

}  // namespace extcalc::testing

#endif

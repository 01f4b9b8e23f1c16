#ifndef EXTCALC_ATLAS_HPP
#define EXTCALC_ATLAS_HPP

// Charts, transition maps, and the derived transition data: the mutually
// inverse Jacobians S^i_j = dx^i/dxt^j, T^i_j = dxt^i/dx^j and the
// theta-parameters built from second derivatives of the transition maps.
// Index layout for theta arrays: theta[(k*n + i)*n + j] = theta^k_{ij}.

#include <span>
#include <string>
#include <vector>

#include "extcalc/errors.hpp"
#include "extcalc/jets.hpp"
#include "extcalc/multitensor.hpp"
#include "extcalc/smoothexpr.hpp"

namespace extcalc {

enum class Direction { ToTilde, FromTilde };

inline std::vector<std::string> base_var_names(int n) {
    std::vector<std::string> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
    return v;
}

struct Chart {
    std::string name;
    int dim = 0;
    // points certified by the user to lie in the chart's (overlap) domain
    std::vector<std::vector<double>> sample_points;
};

class Transition {
public:
    Transition() = default;
    Transition(std::string from, std::string to, int n, std::vector<Expr> forward,
               std::vector<Expr> backward);

    const std::string& from() const { return from_; }
    const std::string& to() const { return to_; }
    int dim() const { return n_; }
    const std::vector<Expr>& forward_exprs() const { return fwd_; }
    const std::vector<Expr>& backward_exprs() const { return bwd_; }

    template <class S>
    std::vector<S> forward(std::span<const S> x) const {
        return apply(cfwd_, x);
    }
    template <class S>
    std::vector<S> backward(std::span<const S> xt) const {
        return apply(cbwd_, xt);
    }

    template <class S>
    std::vector<S> map(std::span<const S> p, Direction dir) const {
        return dir == Direction::ToTilde ? forward(p) : backward(p);
    }

private:
    template <class S>
    std::vector<S> apply(const std::vector<CompiledExpr>& prog, std::span<const S> env) const {
        if (env.size() != static_cast<std::size_t>(n_))
            throw ShapeMismatch("transition: point has wrong dimension");
        std::vector<S> out;
        out.reserve(prog.size());
        for (const CompiledExpr& c : prog) out.push_back(c.eval(env));
        return out;
    }

    std::string from_, to_;
    int n_ = 0;
    std::vector<Expr> fwd_, bwd_;
    std::vector<CompiledExpr> cfwd_, cbwd_;
};

/// S, T, theta and theta-tilde of a chart change at one base point,
/// generic over the derivative-propagating scalar.
template <class S>
struct TransitionJets {
    std::vector<S> point;   // untilded coordinates
    std::vector<S> image;   // tilded coordinates
    std::vector<S> Smat;    // n*n, S[i*n+j] = dx^i/dxt^j
    std::vector<S> Tmat;    // n*n, T[i*n+j] = dxt^i/dx^j
    std::vector<S> theta;   // n^3
    std::vector<S> theta_tilde;  // n^3
    // second derivatives of the maps, kept for the independent 3.12 route
    std::vector<S> fwd_hess;  // [(k*n+i)*n+j] = d2 xt^k / dx^i dx^j
    std::vector<S> bwd_hess;  // [(k*n+i)*n+j] = d2 x^k / dxt^i dxt^j

    int n = 0;

    const S& Sm(int i, int j) const { return Smat[static_cast<std::size_t>(i) * n + j]; }
    const S& Tm(int i, int j) const { return Tmat[static_cast<std::size_t>(i) * n + j]; }
    const S& th(int k, int i, int j) const {
        return theta[(static_cast<std::size_t>(k) * n + i) * n + j];
    }
    const S& tht(int k, int i, int j) const {
        return theta_tilde[(static_cast<std::size_t>(k) * n + i) * n + j];
    }

    Tensor<S> S_tensor() const { return Tensor<S>(n, Valence{1, 1}, Smat); }
    Tensor<S> T_tensor() const { return Tensor<S>(n, Valence{1, 1}, Tmat); }
};

using TransitionData = TransitionJets<double>;

namespace detail {

inline double det_value(const std::vector<double>& m, int n) {
    std::vector<double> a = m;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * n + col]))
                piv = r;
        if (a[static_cast<std::size_t>(piv) * n + col] == 0.0) return 0.0;
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(piv) * n + c],
                          a[static_cast<std::size_t>(col) * n + c]);
            det = -det;
        }
        det *= a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f =
                a[static_cast<std::size_t>(r) * n + col] / a[static_cast<std::size_t>(col) * n + col];
            for (int c = col; c < n; ++c)
                a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
        }
    }
    return det;
}

}  // namespace detail

/// Jacobians and theta-parameters at `point`, exact to arithmetic rounding.
/// T comes from the forward map's jets at `point`; S from the backward map's
/// jets at the forward image. theta = S * (fwd Hessian), theta-tilde =
/// T * (bwd Hessian).
template <class S>
TransitionJets<S> transition_jets(const Transition& t, std::span<const S> point) {
    const int n = t.dim();
    using DD = Dual<Dual<S>>;

    TransitionJets<S> out;
    out.n = n;
    out.point.assign(point.begin(), point.end());

    const auto lift2 = [n](std::span<const S> p) {
        std::vector<DD> lifted;
        lifted.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            Dual<S> inner = Dual<S>::seeded(p[static_cast<std::size_t>(i)],
                                            static_cast<std::size_t>(n),
                                            static_cast<std::size_t>(i));
            DD v;
            v.v = std::move(inner);
            v.d.assign(static_cast<std::size_t>(n), Dual<S>{});
            v.d[static_cast<std::size_t>(i)] = Dual<S>(S(1.0), {});
            lifted.push_back(std::move(v));
        }
        return lifted;
    };

    const std::size_t nn = static_cast<std::size_t>(n) * n;
    out.Tmat.assign(nn, S{});
    out.Smat.assign(nn, S{});
    out.fwd_hess.assign(nn * static_cast<std::size_t>(n), S{});
    out.bwd_hess.assign(nn * static_cast<std::size_t>(n), S{});
    out.theta.assign(nn * static_cast<std::size_t>(n), S{});
    out.theta_tilde.assign(nn * static_cast<std::size_t>(n), S{});

    {
        const std::vector<DD> lifted = lift2(point);
        const std::vector<DD> img = t.forward(std::span<const DD>(lifted));
        out.image.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const DD& f = img[static_cast<std::size_t>(k)];
            out.image.push_back(f.v.v);
            for (int j = 0; j < n; ++j)
                out.Tmat[static_cast<std::size_t>(k) * n + j] = detail::coeff(f.v.d, j);
            for (int i = 0; i < n; ++i) {
                const Dual<S>& gi = detail::coeff(f.d, i);
                for (int j = 0; j < n; ++j)
                    out.fwd_hess[(static_cast<std::size_t>(k) * n + i) * n + j] =
                        detail::coeff(gi.d, j);
            }
        }
    }
    {
        std::vector<double> tv(nn);
        for (std::size_t i = 0; i < nn; ++i) tv[i] = scalar_value(out.Tmat[i]);
        const double det = detail::det_value(tv, n);
        if (std::abs(det) < 1e-12)
            throw SingularJacobian("transition " + t.from() + "->" + t.to() +
                                   ": |det T| below 1e-12");
    }
    {
        const std::vector<DD> lifted = lift2(out.image);
        const std::vector<DD> back = t.backward(std::span<const DD>(lifted));
        for (int k = 0; k < n; ++k) {
            const DD& f = back[static_cast<std::size_t>(k)];
            for (int j = 0; j < n; ++j)
                out.Smat[static_cast<std::size_t>(k) * n + j] = detail::coeff(f.v.d, j);
            for (int i = 0; i < n; ++i) {
                const Dual<S>& gi = detail::coeff(f.d, i);
                for (int j = 0; j < n; ++j)
                    out.bwd_hess[(static_cast<std::size_t>(k) * n + i) * n + j] =
                        detail::coeff(gi.d, j);
            }
        }
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                S acc_t{};
                S acc_tt{};
                for (int h = 0; h < n; ++h) {
                    acc_t = acc_t + out.Sm(k, h) * out.fwd_hess[(static_cast<std::size_t>(h) * n + i) * n + j];
                    acc_tt = acc_tt + out.Tm(k, h) * out.bwd_hess[(static_cast<std::size_t>(h) * n + i) * n + j];
                }
                out.theta[(static_cast<std::size_t>(k) * n + i) * n + j] = acc_t;
                out.theta_tilde[(static_cast<std::size_t>(k) * n + i) * n + j] = acc_tt;
            }
    return out;
}

TransitionData transition_data(const Transition& t, std::span<const double> point);

/// theta-tilde by the alternative route -sum_h dT^k_h/dxt^i S^h_j,
/// chained through the forward Hessian. Used to cross-check the primary
/// definition; the two must agree for any smooth transition.
std::vector<double> theta_tilde_alt(const TransitionData& d);

struct ThetaDualityReport {
    double residual_316 = 0.0;
    double residual_317 = 0.0;
    double max_residual() const { return residual_316 > residual_317 ? residual_316 : residual_317; }
};

/// Residuals of the two duality formulas relating theta and theta-tilde.
ThetaDualityReport check_theta_duality(const TransitionData& d);

}  // namespace extcalc

#endif

#ifndef EXTCALC_BUNDLE_HPP
#define EXTCALC_BUNDLE_HPP

// Composite tensor bundle N over an n-dimensional base: points pair base
// coordinates with Q tensor arguments of declared types. Coordinates of N
// flatten as x1..xn, then the fiber components with P ascending and each
// tensor row-major; that order also names the smoothexpr variables
// x{i} and T{P}_{uppers;lowers} (1-based).

#include <span>
#include <string>
#include <vector>

#include "extcalc/atlas.hpp"
#include "extcalc/errors.hpp"
#include "extcalc/multitensor.hpp"

namespace extcalc {

struct BundleSpec {
    int n = 0;                   // base dimension
    std::vector<Valence> types;  // Q entries, Q = 0 permitted

    int slots() const { return static_cast<int>(types.size()); }

    std::size_t slot_size(int P) const {  // P is 0-based here
        return int_power(static_cast<std::size_t>(n), types[static_cast<std::size_t>(P)].rank());
    }
    std::size_t fiber_dim() const {
        std::size_t d = 0;
        for (int P = 0; P < slots(); ++P) d += slot_size(P);
        return d;
    }
    std::size_t total_dim() const { return static_cast<std::size_t>(n) + fiber_dim(); }

    std::size_t slot_offset(int P) const {  // offset of slot P inside the fiber block
        std::size_t off = 0;
        for (int R = 0; R < P; ++R) off += slot_size(R);
        return off;
    }

    bool operator==(const BundleSpec& o) const { return n == o.n && types == o.types; }
};

/// Variable names for all coordinates of N, in flattening order.
std::vector<std::string> bundle_var_names(const BundleSpec& spec);

template <class S>
struct FiberPoint {
    std::vector<S> base;
    std::vector<Tensor<S>> args;

    static FiberPoint zero(const BundleSpec& spec) {
        FiberPoint q;
        q.base.assign(static_cast<std::size_t>(spec.n), S{});
        q.args.reserve(spec.types.size());
        for (const Valence& v : spec.types) q.args.emplace_back(spec.n, v);
        return q;
    }

    /// All coordinates in flattening order.
    std::vector<S> flat() const {
        std::vector<S> out = base;
        for (const Tensor<S>& t : args)
            out.insert(out.end(), t.components().begin(), t.components().end());
        return out;
    }
};

using FiberPointD = FiberPoint<double>;

template <class S>
void validate_point(const BundleSpec& spec, const FiberPoint<S>& q) {
    if (q.base.size() != static_cast<std::size_t>(spec.n))
        throw ShapeMismatch("fiber point: base dimension mismatch");
    if (q.args.size() != spec.types.size())
        throw ShapeMismatch("fiber point: wrong number of tensor arguments");
    for (std::size_t P = 0; P < q.args.size(); ++P)
        if (q.args[P].dim() != spec.n || q.args[P].valence() != spec.types[P])
            throw ShapeMismatch("fiber point: argument " + std::to_string(P + 1) +
                                " has wrong shape");
}

template <class S>
struct BundleTangent {
    std::vector<S> u;            // components along d/dx^i
    std::vector<Tensor<S>> v;    // per slot P, shaped like T[P]
};

using BundleTangentD = BundleTangent<double>;

// ---------------------------------------------------------------------------
// Tensor component transformation: the mutually inverse chart laws
// ---------------------------------------------------------------------------

namespace detail {

// apply matrix M (n*n, row-major) to index position pos:
// out[..i..] = sum_w M[i*n+w] x[..w..], or with the transpose when asked,
// out[..j..] = sum_w M[w*n+j] x[..w..]. Upper slots contract the second
// index of the transition matrix, lower slots the first.
template <class S>
Tensor<S> apply_matrix_slot(const Tensor<S>& x, std::span<const S> M, int pos, bool transpose) {
    const int n = x.dim();
    Tensor<S> out(n, x.valence());
    for (std::size_t c = 0; c < x.size(); ++c) {
        const int i = x.digit(c, pos);
        S acc{};
        for (int w = 0; w < n; ++w) {
            const std::size_t mi = transpose ? static_cast<std::size_t>(w) * n + i
                                             : static_cast<std::size_t>(i) * n + w;
            acc = acc + M[mi] * x[x.with_digit(c, pos, w)];
        }
        out[c] = acc;
    }
    return out;
}

}  // namespace detail

/// Matrix `up` on every contravariant slot, `lo` on every covariant slot.
/// from_tilde is (up, lo) = (S, T); to_tilde is (T, S).
template <class S>
Tensor<S> transform_components_with(const Tensor<S>& x, std::span<const S> up,
                                    std::span<const S> lo) {
    Tensor<S> out = x;
    const Valence v = x.valence();
    for (int m = 0; m < v.r; ++m) out = detail::apply_matrix_slot(out, up, m, false);
    for (int m = 0; m < v.s; ++m) out = detail::apply_matrix_slot(out, lo, v.r + m, true);
    return out;
}

template <class S>
Tensor<S> transform_tensor_components(const Tensor<S>& x, const TransitionJets<S>& td,
                                      Direction dir) {
    if (x.dim() != td.n) throw ShapeMismatch("transform_tensor_components: dimension mismatch");
    if (dir == Direction::FromTilde)
        return transform_components_with(x, std::span<const S>(td.Smat),
                                         std::span<const S>(td.Tmat));
    return transform_components_with(x, std::span<const S>(td.Tmat), std::span<const S>(td.Smat));
}

// ---------------------------------------------------------------------------
// Fiber point transformation: base through the maps, arguments by the chart law
// ---------------------------------------------------------------------------

template <class S>
FiberPoint<S> transform_fiber_point(const BundleSpec& spec, const Transition& t,
                                    const FiberPoint<S>& q, Direction dir = Direction::ToTilde) {
    validate_point(spec, q);
    const TransitionJets<S> td = dir == Direction::ToTilde
                                     ? transition_jets<S>(t, std::span<const S>(q.base))
                                     : [&] {
                                           // anchor the jets at the untilded preimage
                                           std::vector<S> back = t.backward(std::span<const S>(q.base));
                                           return transition_jets<S>(t, std::span<const S>(back));
                                       }();
    FiberPoint<S> out;
    out.base = dir == Direction::ToTilde ? td.image : td.point;
    out.args.reserve(q.args.size());
    for (const Tensor<S>& a : q.args)
        out.args.push_back(transform_tensor_components(a, td, dir));
    return out;
}

// ---------------------------------------------------------------------------
// Tangent vector transformation
// ---------------------------------------------------------------------------

// In closed form: the new v-components are
// the tensor transform of v + sum_j u^j Deg(theta_j)(T[P]) where Deg acts as
// +theta on upper slots and -theta^T on lower slots, theta and the fiber
// values both taken in the source chart; the new u is the plain Jacobian
// image of u.
template <class S>
BundleTangent<S> transform_bundle_tangent(const BundleSpec& spec, const Transition& t,
                                          const FiberPoint<S>& q, const BundleTangent<S>& w,
                                          Direction dir) {
    validate_point(spec, q);
    if (w.u.size() != static_cast<std::size_t>(spec.n) || w.v.size() != q.args.size())
        throw ShapeMismatch("transform_bundle_tangent: tangent has wrong shape");
    const int n = spec.n;

    // q must be given in the chart the tangent components live in
    std::vector<S> untilded_base =
        dir == Direction::ToTilde ? q.base : t.backward(std::span<const S>(q.base));
    const TransitionJets<S> td = transition_jets<S>(t, std::span<const S>(untilded_base));

    std::span<const S> jac =
        dir == Direction::ToTilde ? std::span<const S>(td.Tmat) : std::span<const S>(td.Smat);
    const std::vector<S>& theta = dir == Direction::ToTilde ? td.theta : td.theta_tilde;

    BundleTangent<S> out;
    out.u.assign(static_cast<std::size_t>(n), S{});
    for (int i = 0; i < n; ++i) {
        S acc{};
        for (int j = 0; j < n; ++j)
            acc = acc + jac[static_cast<std::size_t>(i) * n + j] * w.u[static_cast<std::size_t>(j)];
        out.u[static_cast<std::size_t>(i)] = acc;
    }

    out.v.reserve(w.v.size());
    for (std::size_t P = 0; P < w.v.size(); ++P) {
        Tensor<S> corrected = w.v[P];
        for (int j = 0; j < n; ++j) {
            Tensor<S> theta_j(n, Valence{1, 1});
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    theta_j[static_cast<std::size_t>(k) * n + i] =
                        theta[(static_cast<std::size_t>(k) * n + j) * n + i];
            corrected = add(corrected,
                            scale(w.u[static_cast<std::size_t>(j)],
                                  degenerate_action(theta_j, q.args[P])));
        }
        out.v.push_back(transform_tensor_components(corrected, td, dir));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coordinate lift: seeds every coordinate of N for derivative propagation
// ---------------------------------------------------------------------------

template <class S>
FiberPoint<Dual<S>> lift_point(const BundleSpec& spec, const FiberPoint<S>& q) {
    validate_point(spec, q);
    const std::size_t width = spec.total_dim();
    FiberPoint<Dual<S>> out;
    out.base.reserve(q.base.size());
    for (std::size_t i = 0; i < q.base.size(); ++i)
        out.base.push_back(Dual<S>::seeded(q.base[i], width, i));
    out.args.reserve(q.args.size());
    std::size_t off = static_cast<std::size_t>(spec.n);
    for (const Tensor<S>& a : q.args) {
        Tensor<Dual<S>> la(a.dim(), a.valence());
        for (std::size_t c = 0; c < a.size(); ++c)
            la[c] = Dual<S>::seeded(a[c], width, off + c);
        off += a.size();
        out.args.push_back(std::move(la));
    }
    return out;
}

template <class S>
FiberPoint<S> point_values(const FiberPoint<Dual<S>>& q) {
    FiberPoint<S> out;
    out.base.reserve(q.base.size());
    for (const Dual<S>& x : q.base) out.base.push_back(x.v);
    out.args.reserve(q.args.size());
    for (const Tensor<Dual<S>>& a : q.args) {
        Tensor<S> t(a.dim(), a.valence());
        for (std::size_t c = 0; c < a.size(); ++c) t[c] = a[c].v;
        out.args.push_back(std::move(t));
    }
    return out;
}

}  // namespace extcalc

#endif

#ifndef EXTCALC_CONNECTION_HPP
#define EXTCALC_CONNECTION_HPP

// Extended affine connections and the differentiations they induce. The
// connection field gamma has valence (1,2) with slot order (k; j, i): the
// first lower slot j is the differentiation direction. Horizontal lift
// components follow with the direction as first lower slot as well, and
// every differential produced here appends the direction as the first
// lower slot of the result.

#include <vector>

#include "extcalc/derivation.hpp"

namespace extcalc {

struct ExtendedConnection {
    ExtField gamma;  // (1,2), functions of base and fiber coordinates
};

ExtendedConnection make_connection(ExtField gamma);
ExtendedConnection zero_connection(const BundleSpec& spec);

namespace detail {

// (Gamma_j)^k_i as a (1,1) tensor from (1,2) values with slot order (k; j, i)
template <class S>
Tensor<S> direction_slice(const Tensor<S>& gamma, int j) {
    const int n = gamma.dim();
    Tensor<S> M(n, Valence{1, 1});
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            M[static_cast<std::size_t>(k) * n + i] =
                gamma[(static_cast<std::size_t>(k) * n + j) * n + i];
    return M;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Horizontal lift components: lift[P]_j = Deg(Gamma_j)(T[P])
// ---------------------------------------------------------------------------

template <class S>
struct LiftComponents {
    // per slot P: valence (r_P, s_P + 1), direction first among the lowers
    std::vector<Tensor<S>> lift;
};

template <class S>
LiftComponents<S> lift_components(const ExtendedConnection& conn, const FiberPoint<S>& q) {
    const BundleSpec& spec = conn.gamma.spec();
    validate_point(spec, q);
    const Tensor<S> gamma = conn.gamma.eval(q);
    const int n = spec.n;
    LiftComponents<S> out;
    out.lift.reserve(q.args.size());
    for (int P = 0; P < spec.slots(); ++P) {
        const Valence vp = spec.types[static_cast<std::size_t>(P)];
        Tensor<S> lp(n, Valence{vp.r, vp.s + 1});
        const std::size_t upper_count = int_power(static_cast<std::size_t>(n), vp.r);
        const std::size_t lower_count = int_power(static_cast<std::size_t>(n), vp.s);
        for (int j = 0; j < n; ++j) {
            const Tensor<S> dj = degenerate_action(detail::direction_slice(gamma, j),
                                                   q.args[static_cast<std::size_t>(P)]);
            for (std::size_t ub = 0; ub < upper_count; ++ub)
                for (std::size_t lb = 0; lb < lower_count; ++lb)
                    lp[(ub * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) *
                           lower_count +
                       lb] = dj[ub * lower_count + lb];
        }
        out.lift.push_back(std::move(lp));
    }
    return out;
}

/// Lift components of slot P as a derived field, valence (r_P, s_P + 1).
ExtField lift_field(const ExtendedConnection& conn, int P);  // P 1-based

// ---------------------------------------------------------------------------
// Covariant components: per-direction triples and the general covariant derivative
// ---------------------------------------------------------------------------

struct CovariantComponents {
    ExtField Zij;              // (1,1): Z^i_j, lower slot = direction
    std::vector<ExtField> ZPj; // per P: (r_P, s_P + 1), direction first lower
    ExtField Gji;              // (1,2): Gamma^k_{j i}
};

CovariantComponents make_covariant(const BundleSpec& spec, ExtField Zij, std::vector<ExtField> ZPj,
                                   ExtField Gji);

/// Degenerate covariant differentiation: a (1,2) field acting algebraically
/// per direction.
CovariantComponents degenerate_covariant(const ExtField& S3);

/// Covariant components of the spatial (horizontal, native-annulling)
/// differentiation of conn: Z^i_j = delta, Z[P]_j = -lift[P]_j, Gji = gamma.
CovariantComponents spatial_components(const ExtendedConnection& conn);

/// The covariant differential: valence (alpha, beta + 1), direction first
/// among the lower slots.
ExtField covariant_differential(const CovariantComponents& c, const ExtField& f);

/// nabla_dir f by contracting the direction into the differential.
ExtField covariant_apply(const CovariantComponents& c, const ExtField& dir, const ExtField& f);

ExtField spatial_covariant_differential(const ExtendedConnection& conn, const ExtField& f);
ExtField spatial_covariant(const ExtendedConnection& conn, const ExtField& dir, const ExtField& f);

/// Component triple of nabla_dir for nesting into commutators.
DerivationComponents spatial_derivation(const ExtendedConnection& conn, const ExtField& dir);

// ---------------------------------------------------------------------------
// Canonical vertical multivariate differentiation
// ---------------------------------------------------------------------------

/// Contraction of dirT into the slot-P fiber partials of f. P is 1-based.
ExtField vertical_derivative(int P, const ExtField& dirT, const ExtField& f);

/// The un-contracted multivariate differential: valence
/// (alpha + s_P, beta + r_P), the new upper block after f's uppers and the
/// new lower block after f's lowers.
ExtField vertical_differential(int P, const ExtField& f);

/// Component triple of the vertical differentiation along dirT.
DerivationComponents vertical_derivation(const BundleSpec& spec, int P, const ExtField& dirT);

/// Tangent vector with u = 0 and v[P] = Y: the vertical lift of Y into
/// slot P. P is 1-based.
template <class S>
BundleTangent<S> vertical_lift(const BundleSpec& spec, int P, const Tensor<S>& Y,
                               const FiberPoint<S>& q) {
    validate_point(spec, q);
    if (P < 1 || P > spec.slots()) throw IndexOutOfRange("vertical_lift: slot out of range");
    if (Y.valence() != spec.types[static_cast<std::size_t>(P - 1)] || Y.dim() != spec.n)
        throw ShapeMismatch("vertical_lift: direction tensor has wrong shape");
    BundleTangent<S> w;
    w.u.assign(static_cast<std::size_t>(spec.n), S{});
    w.v.reserve(q.args.size());
    for (int R = 0; R < spec.slots(); ++R)
        w.v.push_back(R == P - 1 ? Y : Tensor<S>(spec.n, spec.types[static_cast<std::size_t>(R)]));
    return w;
}

// ---------------------------------------------------------------------------
// Chart transformation of connections, lifts and covariant components
// ---------------------------------------------------------------------------

/// Value-level connection transform: tensor law plus theta of
/// the target chart. `q` is always in the untilded chart; for ToTilde `in`
/// holds untilded values at q, for FromTilde tilded values at the image.
TensorD transform_connection_values(const BundleSpec& spec, const Transition& t,
                                    const FiberPointD& q, const TensorD& in, Direction dir);

/// Value-level lift-component transform: tensor law plus the theta action
/// on the native values.
std::vector<TensorD> transform_lift_values(const BundleSpec& spec, const Transition& t,
                                           const FiberPointD& q, const std::vector<TensorD>& in,
                                           Direction dir);

/// Value-level covariant-component transform.
struct CovariantValues {
    TensorD Zij;
    std::vector<TensorD> ZPj;
    TensorD Gji;
};
CovariantValues eval_covariant(const CovariantComponents& c, const FiberPointD& q);
CovariantValues transform_covariant_values(const BundleSpec& spec, const Transition& t,
                                           const FiberPointD& q, const CovariantValues& in,
                                           Direction dir);

/// The connection's field on the other side of `t`, as a derived closure
/// evaluable (and differentiable) anywhere in the destination chart.
ExtendedConnection transport_connection(const ExtendedConnection& conn, const Transition& t,
                                        Direction dir);

// ---------------------------------------------------------------------------
// Structural decomposition of a differentiation
// ---------------------------------------------------------------------------

struct Decomposition {
    ExtField X;                // extended vector field: the horizontal part
    std::vector<ExtField> Y;   // per slot P: vertical direction tensors
    ExtField S_deg;            // (1,1): the degenerate remainder
};

/// Split d into spatial + vertical + degenerate parts relative to conn.
Decomposition decompose(const DerivationComponents& d, const ExtendedConnection& conn);

/// Rebuild the component triple of nabla_X + sum_P vertical_Y[P] + Deg(S).
DerivationComponents reconstruct(const ExtendedConnection& conn, const Decomposition& parts);

}  // namespace extcalc

#endif

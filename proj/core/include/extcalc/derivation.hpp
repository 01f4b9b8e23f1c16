#ifndef EXTCALC_DERIVATION_HPP
#define EXTCALC_DERIVATION_HPP

// Differentiations of the extended algebra, represented extrinsically by
// their component triple (Z, Z[P], Gamma) in a chart. Applying one to a
// field is a first-order operator: Z-directional base derivative plus
// Z[P]-contracted fiber derivatives plus Gamma corrections, +Gamma on each
// upper slot and -Gamma^T on each lower slot.

#include <vector>

#include "extcalc/atlas.hpp"
#include "extcalc/bundle.hpp"
#include "extcalc/extfield.hpp"
#include "extcalc/multitensor.hpp"

namespace extcalc {

struct DerivationComponents {
    ExtField Z;                // valence (1,0)
    std::vector<ExtField> ZP;  // per slot P, valence types[P]
    ExtField G;                // valence (1,1)
};

DerivationComponents make_derivation(const BundleSpec& spec, ExtField Z, std::vector<ExtField> ZP,
                                     ExtField G);
DerivationComponents zero_derivation(const BundleSpec& spec);

/// Degenerate differentiation: a (1,1) field acting algebraically. Applying
/// it to vectors is C(S (x) X); scalars map to zero.
DerivationComponents degenerate_from_tensor(const ExtField& S_field);

/// Component values of a derivation at a point.
template <class S>
struct DerivationValues {
    Tensor<S> Z;
    std::vector<Tensor<S>> ZP;
    Tensor<S> G;
};

using DerivationValuesD = DerivationValues<double>;

template <class S>
DerivationValues<S> eval_derivation(const DerivationComponents& d, const FiberPoint<S>& q) {
    DerivationValues<S> v;
    v.Z = d.Z.eval(q);
    v.ZP.reserve(d.ZP.size());
    for (const ExtField& f : d.ZP) v.ZP.push_back(f.eval(q));
    v.G = d.G.eval(q);
    return v;
}

// ---------------------------------------------------------------------------
// First-order application (the assembly shared by plain, covariant and
// spatial differentiation)
// ---------------------------------------------------------------------------

/// Assemble the image components from a lifted evaluation of the operand and
/// component values: sum_i Z^i df/dx^i + sum_P sum_u Z[P][u] df/dT[P][u]
/// + Deg(G)(f).
template <class S>
Tensor<S> first_order_apply(const BundleSpec& spec, const Tensor<Dual<S>>& lifted,
                            const Tensor<S>& Z, const std::vector<Tensor<S>>& ZP,
                            const Tensor<S>& G) {
    const int n = spec.n;
    Tensor<S> out(n, lifted.valence());
    Tensor<S> value(n, lifted.valence());
    for (std::size_t c = 0; c < lifted.size(); ++c) value[c] = lifted[c].v;

    for (std::size_t c = 0; c < lifted.size(); ++c) {
        S acc{};
        for (int i = 0; i < n; ++i)
            acc = acc + Z[static_cast<std::size_t>(i)] *
                            detail::coeff(lifted[c].d, static_cast<std::size_t>(i));
        for (int P = 0; P < spec.slots(); ++P) {
            const std::size_t off = static_cast<std::size_t>(n) + spec.slot_offset(P);
            const Tensor<S>& zp = ZP[static_cast<std::size_t>(P)];
            for (std::size_t u = 0; u < zp.size(); ++u)
                acc = acc + zp[u] * detail::coeff(lifted[c].d, off + u);
        }
        out[c] = acc;
    }
    return add(out, degenerate_action(G, value));
}

namespace impls {

class ApplyDerivationImpl final : public FieldBase<ApplyDerivationImpl> {
public:
    ApplyDerivationImpl(DerivationComponents d, ExtField f) : d_(std::move(d)), f_(std::move(f)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const Tensor<Dual<S>> lifted = eval_lifted(f_, q);
        return first_order_apply(f_.spec(), lifted, d_.Z.eval(q), eval_zp(q), d_.G.eval(q));
    }

private:
    template <class S>
    std::vector<Tensor<S>> eval_zp(const FiberPoint<S>& q) const {
        std::vector<Tensor<S>> out;
        out.reserve(d_.ZP.size());
        for (const ExtField& f : d_.ZP) out.push_back(f.eval(q));
        return out;
    }

    DerivationComponents d_;
    ExtField f_;
};

}  // namespace impls

/// Derived closure for the image of f under the differentiation d.
ExtField apply_derivation(const DerivationComponents& d, const ExtField& f);

/// D1(D2 f) - D2(D1 f) as a derived closure. Evaluation spends two lift
/// levels; exceeding the supported nesting reports DepthLimit.
ExtField commutator_field(const DerivationComponents& d1, const DerivationComponents& d2,
                          const ExtField& f);

// ---------------------------------------------------------------------------
// Transformation of component values under a chart change
// ---------------------------------------------------------------------------

/// Transform component values between the charts of `t`. `q` is always
/// given in the untilded (source) chart; for ToTilde the input values are
/// untilded and the result lives at the image point, for FromTilde the
/// input values are tilded at the image point and the result is untilded.
DerivationValuesD transform_derivation_values(const BundleSpec& spec, const Transition& t,
                                              const FiberPointD& q, const DerivationValuesD& in,
                                              Direction dir);

}  // namespace extcalc

#endif

#ifndef EXTCALC_EXTFIELD_HPP
#define EXTCALC_EXTFIELD_HPP

// Extended tensor fields: evaluable maps FiberPoint -> Tensor, generic over
// the derivative-propagating scalar. Expression-backed fields and derived
// closures share one interface; closures obtain the partials they need by
// evaluating their operands at a coordinate-lifted point, so nesting a
// closure inside another differentiation works up to three lift levels.

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "extcalc/bundle.hpp"
#include "extcalc/errors.hpp"
#include "extcalc/multitensor.hpp"
#include "extcalc/smoothexpr.hpp"

namespace extcalc {

class FieldImpl {
public:
    virtual ~FieldImpl() = default;
    virtual Tensor<double> eval0(const FiberPoint<double>&) const = 0;
    virtual Tensor<J1> eval1(const FiberPoint<J1>&) const = 0;
    virtual Tensor<J2> eval2(const FiberPoint<J2>&) const = 0;
    virtual Tensor<J3> eval3(const FiberPoint<J3>&) const = 0;
};

template <class Derived>
class FieldBase : public FieldImpl {
public:
    Tensor<double> eval0(const FiberPoint<double>& q) const final {
        return self().template evalT<double>(q);
    }
    Tensor<J1> eval1(const FiberPoint<J1>& q) const final { return self().template evalT<J1>(q); }
    Tensor<J2> eval2(const FiberPoint<J2>& q) const final { return self().template evalT<J2>(q); }
    Tensor<J3> eval3(const FiberPoint<J3>& q) const final { return self().template evalT<J3>(q); }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

namespace detail {

template <class S>
struct EvalDispatch;
template <>
struct EvalDispatch<double> {
    static Tensor<double> run(const FieldImpl& f, const FiberPoint<double>& q) { return f.eval0(q); }
};
template <>
struct EvalDispatch<J1> {
    static Tensor<J1> run(const FieldImpl& f, const FiberPoint<J1>& q) { return f.eval1(q); }
};
template <>
struct EvalDispatch<J2> {
    static Tensor<J2> run(const FieldImpl& f, const FiberPoint<J2>& q) { return f.eval2(q); }
};
template <>
struct EvalDispatch<J3> {
    static Tensor<J3> run(const FieldImpl& f, const FiberPoint<J3>& q) { return f.eval3(q); }
};

}  // namespace detail

class ExtField {
public:
    ExtField() = default;
    ExtField(BundleSpec spec, Valence val, std::shared_ptr<const FieldImpl> impl)
        : spec_(std::move(spec)), val_(val), impl_(std::move(impl)) {}

    bool empty() const { return impl_ == nullptr; }
    const BundleSpec& spec() const { return spec_; }
    const Valence& valence() const { return val_; }

    template <class S>
    Tensor<S> eval(const FiberPoint<S>& q) const {
        return detail::EvalDispatch<S>::run(*impl_, q);
    }

private:
    BundleSpec spec_;
    Valence val_;
    std::shared_ptr<const FieldImpl> impl_;
};

/// Evaluate at the coordinate-lifted point: the result's Dual components
/// carry the value and every first partial (base then fiber, in flattening
/// order). One extra lift level is spent per call; past the supported
/// nesting this reports DepthLimit.
template <class S>
Tensor<Dual<S>> eval_lifted(const ExtField& f, const FiberPoint<S>& q) {
    if constexpr (JetLevel<S>::value >= 3) {
        throw DepthLimit("derivative nesting exceeds the supported order");
    } else {
        return f.eval(lift_point(f.spec(), q));
    }
}

/// First partials of every component of f with respect to every coordinate
/// of N, split into base and fiber blocks.
template <class S>
struct Partials {
    Tensor<Dual<S>> lifted;  // raw lifted evaluation
    const BundleSpec* spec = nullptr;

    Tensor<S> value() const {
        Tensor<S> out(lifted.dim(), lifted.valence());
        for (std::size_t c = 0; c < lifted.size(); ++c) out[c] = lifted[c].v;
        return out;
    }
    /// d(component c)/dx^i
    S base(std::size_t c, int i) const {
        return detail::coeff(lifted[c].d, static_cast<std::size_t>(i));
    }
    /// d(component c)/dT[P][u], P 0-based, u flat within slot P
    S fiber(std::size_t c, int P, std::size_t u) const {
        return detail::coeff(lifted[c].d,
                             static_cast<std::size_t>(spec->n) + spec->slot_offset(P) + u);
    }
};

template <class S>
Partials<S> partials(const ExtField& f, const FiberPoint<S>& q) {
    return Partials<S>{eval_lifted(f, q), &f.spec()};
}

// ---------------------------------------------------------------------------
// Field constructors
// ---------------------------------------------------------------------------

namespace impls {

class ExprFieldImpl final : public FieldBase<ExprFieldImpl> {
public:
    ExprFieldImpl(const BundleSpec& spec, Valence val, const std::map<std::size_t, Expr>& comps)
        : spec_(spec), val_(val) {
        const std::vector<std::string> names = bundle_var_names(spec);
        const std::size_t count = int_power(static_cast<std::size_t>(spec.n), val.rank());
        comp_.resize(count);
        for (const auto& [flat, e] : comps) {
            if (flat >= count)
                throw ShapeMismatch("expression component index out of range");
            comp_[flat] = CompiledExpr(e, names);
            present_.push_back(flat);
        }
    }

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        validate_point(spec_, q);
        const std::vector<S> env = q.flat();
        Tensor<S> out(spec_.n, val_);
        for (const std::size_t c : present_)
            out[c] = comp_[c].eval(std::span<const S>(env));
        return out;
    }

private:
    BundleSpec spec_;
    Valence val_;
    std::vector<CompiledExpr> comp_;
    std::vector<std::size_t> present_;
};

class ConstantFieldImpl final : public FieldBase<ConstantFieldImpl> {
public:
    explicit ConstantFieldImpl(Tensor<double> value) : value_(std::move(value)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>&) const {
        Tensor<S> out(value_.dim(), value_.valence());
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = S(value_[c]);
        return out;
    }

private:
    Tensor<double> value_;
};

class NativeFieldImpl final : public FieldBase<NativeFieldImpl> {
public:
    NativeFieldImpl(const BundleSpec& spec, int P) : spec_(spec), P_(P) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        validate_point(spec_, q);
        return q.args[static_cast<std::size_t>(P_)];
    }

private:
    BundleSpec spec_;
    int P_;  // 0-based
};

class AddFieldImpl final : public FieldBase<AddFieldImpl> {
public:
    AddFieldImpl(ExtField a, ExtField b) : a_(std::move(a)), b_(std::move(b)) {}
    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        return add(a_.eval(q), b_.eval(q));
    }

private:
    ExtField a_, b_;
};

class ScaleConstFieldImpl final : public FieldBase<ScaleConstFieldImpl> {
public:
    ScaleConstFieldImpl(double c, ExtField f) : c_(c), f_(std::move(f)) {}
    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        return scale(S(c_), f_.eval(q));
    }

private:
    double c_;
    ExtField f_;
};

class ScaleFieldImpl final : public FieldBase<ScaleFieldImpl> {
public:
    ScaleFieldImpl(ExtField lambda, ExtField f) : lambda_(std::move(lambda)), f_(std::move(f)) {}
    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        return scale(lambda_.eval(q)[0], f_.eval(q));
    }

private:
    ExtField lambda_, f_;
};

class ProductFieldImpl final : public FieldBase<ProductFieldImpl> {
public:
    ProductFieldImpl(ExtField a, ExtField b) : a_(std::move(a)), b_(std::move(b)) {}
    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        return tensor_product(a_.eval(q), b_.eval(q));
    }

private:
    ExtField a_, b_;
};

class ContractFieldImpl final : public FieldBase<ContractFieldImpl> {
public:
    ContractFieldImpl(ExtField f, int up, int lo) : f_(std::move(f)), up_(up), lo_(lo) {}
    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        return contract(f_.eval(q), up_, lo_);
    }

private:
    ExtField f_;
    int up_, lo_;
};

// f in the destination chart of `t`, defined tensorially from a field given
// in the source chart (or the reverse, per `dir`).
class TransportedFieldImpl final : public FieldBase<TransportedFieldImpl> {
public:
    TransportedFieldImpl(ExtField f, Transition t, Direction dir)
        : f_(std::move(f)), t_(std::move(t)), dir_(dir) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        // q lives in the destination chart; pull it back, evaluate, push the
        // value forward
        const Direction back = dir_ == Direction::ToTilde ? Direction::FromTilde : Direction::ToTilde;
        const FiberPoint<S> src = transform_fiber_point(f_.spec(), t_, q, back);
        const std::vector<S>& untilded =
            dir_ == Direction::ToTilde ? src.base : q.base;
        const TransitionJets<S> td = transition_jets<S>(t_, std::span<const S>(untilded));
        return transform_tensor_components(f_.eval(src), td, dir_);
    }

private:
    ExtField f_;
    Transition t_;
    Direction dir_;
};

}  // namespace impls

ExtField make_expr_field(const BundleSpec& spec, Valence val,
                         const std::map<std::size_t, Expr>& comps);
ExtField make_constant_field(const BundleSpec& spec, Tensor<double> value);
ExtField make_zero_field(const BundleSpec& spec, Valence val);
/// The tautological field returning the P-th fiber argument. P is 1-based.
ExtField make_native_field(const BundleSpec& spec, int P);

ExtField add_fields(const ExtField& a, const ExtField& b);
ExtField sub_fields(const ExtField& a, const ExtField& b);
ExtField scale_field(double c, const ExtField& f);
ExtField scale_field(const ExtField& lambda, const ExtField& f);
ExtField product_fields(const ExtField& a, const ExtField& b);
ExtField contract_field(const ExtField& f, int upper_slot, int lower_slot);
/// Tensorial image of `f` on the other side of `t`.
ExtField transport_field(const ExtField& f, const Transition& t, Direction dir);

// ---------------------------------------------------------------------------
// Tensoriality certifier
// ---------------------------------------------------------------------------

struct TensorialityReport {
    std::vector<double> residuals;  // one per probe
    double max_residual = 0.0;
};

/// Residual per probe of f_untilded(q) minus the from-tilde transform of
/// f_tilded at the transformed fiber point.
TensorialityReport check_tensoriality(const ExtField& f_untilded, const ExtField& f_tilded,
                                      const Transition& t, const std::vector<FiberPointD>& probes);

}  // namespace extcalc

#endif

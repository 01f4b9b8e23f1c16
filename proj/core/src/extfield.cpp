#include "extcalc/extfield.hpp"

namespace extcalc {

ExtField make_expr_field(const BundleSpec& spec, Valence val,
                         const std::map<std::size_t, Expr>& comps) {
    return ExtField(spec, val, std::make_shared<impls::ExprFieldImpl>(spec, val, comps));
}

ExtField make_constant_field(const BundleSpec& spec, Tensor<double> value) {
    if (value.dim() != spec.n) throw ShapeMismatch("constant field: dimension mismatch");
    const Valence val = value.valence();
    return ExtField(spec, val, std::make_shared<impls::ConstantFieldImpl>(std::move(value)));
}

ExtField make_zero_field(const BundleSpec& spec, Valence val) {
    return make_constant_field(spec, Tensor<double>(spec.n, val));
}

ExtField make_native_field(const BundleSpec& spec, int P) {
    if (P < 1 || P > spec.slots())
        throw IndexOutOfRange("native field slot " + std::to_string(P) + " outside 1.." +
                              std::to_string(spec.slots()));
    return ExtField(spec, spec.types[static_cast<std::size_t>(P - 1)],
                    std::make_shared<impls::NativeFieldImpl>(spec, P - 1));
}

ExtField add_fields(const ExtField& a, const ExtField& b) {
    if (!(a.spec() == b.spec()) || a.valence() != b.valence())
        throw ShapeMismatch("add_fields: operands disagree in spec or valence");
    return ExtField(a.spec(), a.valence(), std::make_shared<impls::AddFieldImpl>(a, b));
}

ExtField sub_fields(const ExtField& a, const ExtField& b) {
    return add_fields(a, scale_field(-1.0, b));
}

ExtField scale_field(double c, const ExtField& f) {
    return ExtField(f.spec(), f.valence(), std::make_shared<impls::ScaleConstFieldImpl>(c, f));
}

ExtField scale_field(const ExtField& lambda, const ExtField& f) {
    if (lambda.valence() != Valence{0, 0})
        throw ShapeMismatch("scale_field: scalar factor must have valence (0,0)");
    return ExtField(f.spec(), f.valence(), std::make_shared<impls::ScaleFieldImpl>(lambda, f));
}

ExtField product_fields(const ExtField& a, const ExtField& b) {
    if (!(a.spec() == b.spec()))
        throw ShapeMismatch("product_fields: operands live on different bundles");
    const Valence v{a.valence().r + b.valence().r, a.valence().s + b.valence().s};
    return ExtField(a.spec(), v, std::make_shared<impls::ProductFieldImpl>(a, b));
}

ExtField contract_field(const ExtField& f, int upper_slot, int lower_slot) {
    const Valence v = f.valence();
    if (v.r < 1 || v.s < 1 || upper_slot < 0 || upper_slot >= v.r || lower_slot < 0 ||
        lower_slot >= v.s)
        throw SlotOutOfRange("contract_field: slot out of range for valence " + to_string(v));
    return ExtField(f.spec(), Valence{v.r - 1, v.s - 1},
                    std::make_shared<impls::ContractFieldImpl>(f, upper_slot, lower_slot));
}

ExtField transport_field(const ExtField& f, const Transition& t, Direction dir) {
    return ExtField(f.spec(), f.valence(),
                    std::make_shared<impls::TransportedFieldImpl>(f, t, dir));
}

TensorialityReport check_tensoriality(const ExtField& f_untilded, const ExtField& f_tilded,
                                      const Transition& t,
                                      const std::vector<FiberPointD>& probes) {
    TensorialityReport rep;
    rep.residuals.reserve(probes.size());
    for (const FiberPointD& q : probes) {
        const FiberPointD qt = transform_fiber_point(f_untilded.spec(), t, q, Direction::ToTilde);
        const TransitionData td = transition_data(t, std::span<const double>(q.base));
        const TensorD back =
            transform_tensor_components(f_tilded.eval(qt), td, Direction::FromTilde);
        const double r = max_abs_diff(f_untilded.eval(q), back);
        rep.residuals.push_back(r);
        if (r > rep.max_residual) rep.max_residual = r;
    }
    return rep;
}

}  // namespace extcalc

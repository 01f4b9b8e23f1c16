#include "extcalc/chainrule.hpp"

namespace extcalc {

namespace impls {

class RestrictedFieldImpl final : public FieldBase<RestrictedFieldImpl> {
public:
    RestrictedFieldImpl(ExtField f, Section sec) : f_(std::move(f)), sec_(std::move(sec)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        return f_.eval(section_point(f_.spec(), sec_, q.base));
    }

private:
    ExtField f_;
    Section sec_;
};

// classical covariant differential with Christoffels Gamma(x, T(x))
class StandardCovariantImpl final : public FieldBase<StandardCovariantImpl> {
public:
    StandardCovariantImpl(ExtendedConnection conn, Section sec, ExtField g)
        : conn_(std::move(conn)), sec_(std::move(sec)), g_(std::move(g)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const BundleSpec& spec = g_.spec();
        const int n = spec.n;
        const FiberPoint<S> qs = section_point(spec, sec_, q.base);
        const Tensor<S> gamma = conn_.gamma.eval(qs);
        // base partials of g, including the through-the-section dependence
        const Tensor<Dual<S>> lifted = eval_lifted(g_, q);
        Tensor<S> value(n, g_.valence());
        for (std::size_t c = 0; c < value.size(); ++c) value[c] = lifted[c].v;

        const Valence v = g_.valence();
        Tensor<S> out(n, Valence{v.r, v.s + 1});
        const std::size_t upper_count = int_power(static_cast<std::size_t>(n), v.r);
        const std::size_t lower_count = int_power(static_cast<std::size_t>(n), v.s);
        for (int j = 0; j < n; ++j) {
            Tensor<S> row(n, v);
            for (std::size_t c = 0; c < row.size(); ++c)
                row[c] = detail::coeff(lifted[c].d, static_cast<std::size_t>(j));
            row = add(row, degenerate_action(detail::direction_slice(gamma, j), value));
            for (std::size_t ub = 0; ub < upper_count; ++ub)
                for (std::size_t lb = 0; lb < lower_count; ++lb)
                    out[(ub * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) *
                            lower_count +
                        lb] = row[ub * lower_count + lb];
        }
        return out;
    }

private:
    ExtendedConnection conn_;
    Section sec_;
    ExtField g_;
};

}  // namespace impls

Section make_section(const BundleSpec& spec, std::vector<ExtField> fields) {
    if (fields.size() != spec.types.size())
        throw ShapeMismatch("section: expected one field per bundle slot");
    for (std::size_t P = 0; P < fields.size(); ++P)
        if (fields[P].valence() != spec.types[P])
            throw ShapeMismatch("section: slot " + std::to_string(P + 1) + " has wrong valence");
    return Section{std::move(fields)};
}

double section_invariance_probe(const BundleSpec& spec, const Section& sec,
                                const std::vector<FiberPointD>& probes) {
    double worst = 0.0;
    for (const FiberPointD& q : probes) {
        FiberPointD other = q;
        for (Tensor<double>& a : other.args)
            for (std::size_t c = 0; c < a.size(); ++c) a[c] += 0.731 + static_cast<double>(c);
        for (const ExtField& f : sec.fields)
            worst = std::max(worst, max_abs_diff(f.eval(q), f.eval(other)));
    }
    return worst;
}

ExtField restrict_field(const ExtField& f, const Section& sec) {
    if (sec.fields.size() != f.spec().types.size())
        throw ShapeMismatch("restrict_field: section does not match the bundle");
    return ExtField(f.spec(), f.valence(),
                    std::make_shared<impls::RestrictedFieldImpl>(f, sec));
}

ExtField standard_covariant_differential(const ExtendedConnection& conn, const Section& sec,
                                         const ExtField& g) {
    const Valence v = g.valence();
    return ExtField(g.spec(), Valence{v.r, v.s + 1},
                    std::make_shared<impls::StandardCovariantImpl>(conn, sec, g));
}

ExtField standard_covariant(const ExtendedConnection& conn, const Section& sec,
                            const ExtField& dir, const ExtField& g) {
    if (dir.valence() != Valence{1, 0})
        throw ShapeMismatch("standard_covariant: direction must be a vector field");
    return contract_field(product_fields(dir, standard_covariant_differential(conn, sec, g)), 0, 0);
}

ChainRuleReport chain_rule_residual(const ExtendedConnection& conn, const ExtField& f,
                                    const Section& sec, const ExtField& dir,
                                    const std::vector<std::vector<double>>& base_probes,
                                    ChainRuleDrop drop) {
    const BundleSpec& spec = f.spec();
    const int n = spec.n;
    if (dir.valence() != Valence{1, 0})
        throw ShapeMismatch("chain_rule_residual: direction must be a vector field");

    const ExtField restricted = restrict_field(f, sec);
    const ExtField lhs_field = standard_covariant_differential(conn, sec, restricted);
    const ExtField spatial_field = spatial_covariant_differential(conn, f);
    std::vector<ExtField> secder;  // standard covariant differential of each section field
    secder.reserve(sec.fields.size());
    for (const ExtField& tp : sec.fields)
        secder.push_back(standard_covariant_differential(conn, sec, tp));

    ChainRuleReport rep;
    rep.probes.reserve(base_probes.size());
    for (const std::vector<double>& base : base_probes) {
        FiberPointD q;
        q.base = base;
        for (const Valence& v : spec.types) q.args.emplace_back(n, v);
        const FiberPointD qs = section_point(spec, sec, q.base);

        const TensorD dirv = dir.eval(qs);
        const TensorD lhs = lhs_field.eval(q);            // (alpha, beta+1)
        const TensorD spatial = spatial_field.eval(qs);   // (alpha, beta+1)
        // vertical correction: sum_P sum_u (nabla_j T[P])[u] * df/dT[P][u]
        const Tensor<Dual<double>> pf = eval_lifted(f, qs);
        const Valence v = f.valence();
        Tensor<double> vertical(n, Valence{v.r, v.s + 1});
        {
            const std::size_t upper_count = int_power(static_cast<std::size_t>(n), v.r);
            const std::size_t lower_count = int_power(static_cast<std::size_t>(n), v.s);
            std::vector<TensorD> sd;
            sd.reserve(secder.size());
            for (const ExtField& g : secder) sd.push_back(g.eval(q));
            for (int j = 0; j < n; ++j)
                for (std::size_t ub = 0; ub < upper_count; ++ub)
                    for (std::size_t lb = 0; lb < lower_count; ++lb) {
                        double acc = 0.0;
                        for (int P = 0; P < spec.slots(); ++P) {
                            const Valence vp = spec.types[static_cast<std::size_t>(P)];
                            const std::size_t cnt = spec.slot_size(P);
                            const std::size_t voff =
                                static_cast<std::size_t>(n) + spec.slot_offset(P);
                            const std::size_t lp =
                                int_power(static_cast<std::size_t>(n), vp.s);
                            for (std::size_t u = 0; u < cnt; ++u) {
                                // nabla_j T[P][u]: direction is the first lower
                                // slot of the differential
                                const std::size_t uup = u / lp, ulo = u % lp;
                                const double ndT =
                                    sd[static_cast<std::size_t>(P)]
                                      [(uup * static_cast<std::size_t>(n) +
                                        static_cast<std::size_t>(j)) *
                                           lp +
                                       ulo];
                                acc += ndT * detail::coeff(pf[ub * lower_count + lb].d, voff + u);
                            }
                        }
                        vertical[(ub * static_cast<std::size_t>(n) +
                                  static_cast<std::size_t>(j)) *
                                     lower_count +
                                 lb] = acc;
                    }
        }

        // contract every term with the direction on its first lower slot
        const auto contract_dir = [&](const TensorD& t) {
            Tensor<double> out(n, v);
            const std::size_t upper_count = int_power(static_cast<std::size_t>(n), v.r);
            const std::size_t lower_count = int_power(static_cast<std::size_t>(n), v.s);
            for (std::size_t ub = 0; ub < upper_count; ++ub)
                for (std::size_t lb = 0; lb < lower_count; ++lb) {
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j)
                        acc += dirv[static_cast<std::size_t>(j)] *
                               t[(ub * static_cast<std::size_t>(n) +
                                  static_cast<std::size_t>(j)) *
                                     lower_count +
                                 lb];
                    out[ub * lower_count + lb] = acc;
                }
            return out;
        };

        const TensorD lhs_c = contract_dir(lhs);
        const TensorD spa_c = contract_dir(spatial);
        const TensorD ver_c = contract_dir(vertical);

        ChainRuleProbeResult pr;
        pr.standard_norm = max_abs(lhs_c);
        pr.spatial_norm = max_abs(spa_c);
        pr.vertical_norm = max_abs(ver_c);
        double res = 0.0;
        for (std::size_t c = 0; c < lhs_c.size(); ++c) {
            const double a = drop == ChainRuleDrop::Standard ? 0.0 : lhs_c[c];
            const double b = drop == ChainRuleDrop::Spatial ? 0.0 : spa_c[c];
            const double d = drop == ChainRuleDrop::Vertical ? 0.0 : ver_c[c];
            res = std::max(res, std::abs(a - b - d));
        }
        pr.residual = res;
        rep.max_residual = std::max(rep.max_residual, res);
        rep.probes.push_back(pr);
    }
    return rep;
}

}  // namespace extcalc

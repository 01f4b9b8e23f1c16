#include "extcalc/connection.hpp"

namespace extcalc {

namespace {

// theta^k_{ji} with fixed direction j, as a (1,1) matrix over k,i
TensorD theta_direction_slice(const std::vector<double>& theta, int n, int j) {
    TensorD M(n, Valence{1, 1});
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            M[static_cast<std::size_t>(k) * n + i] =
                theta[(static_cast<std::size_t>(k) * n + j) * n + i];
    return M;
}

template <class S>
void write_direction_block(Tensor<S>& dst, const Tensor<S>& block, int j, const Valence& vp) {
    const int n = dst.dim();
    const std::size_t upper_count = int_power(static_cast<std::size_t>(n), vp.r);
    const std::size_t lower_count = int_power(static_cast<std::size_t>(n), vp.s);
    for (std::size_t ub = 0; ub < upper_count; ++ub)
        for (std::size_t lb = 0; lb < lower_count; ++lb)
            dst[(ub * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) * lower_count + lb] =
                block[ub * lower_count + lb];
}

template <class S>
Tensor<S> read_direction_block(const Tensor<S>& src, int j, const Valence& vp) {
    const int n = src.dim();
    Tensor<S> block(n, vp);
    const std::size_t upper_count = int_power(static_cast<std::size_t>(n), vp.r);
    const std::size_t lower_count = int_power(static_cast<std::size_t>(n), vp.s);
    for (std::size_t ub = 0; ub < upper_count; ++ub)
        for (std::size_t lb = 0; lb < lower_count; ++lb)
            block[ub * lower_count + lb] =
                src[(ub * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) * lower_count +
                    lb];
    return block;
}

}  // namespace

ExtendedConnection make_connection(ExtField gamma) {
    if (gamma.valence() != Valence{1, 2})
        throw ShapeMismatch("connection coefficients must have valence (1,2)");
    return ExtendedConnection{std::move(gamma)};
}

ExtendedConnection zero_connection(const BundleSpec& spec) {
    return ExtendedConnection{make_zero_field(spec, Valence{1, 2})};
}

namespace impls {

class LiftFieldImpl final : public FieldBase<LiftFieldImpl> {
public:
    LiftFieldImpl(ExtendedConnection conn, int P0) : conn_(std::move(conn)), P0_(P0) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        return lift_components(conn_, q).lift[static_cast<std::size_t>(P0_)];
    }

private:
    ExtendedConnection conn_;
    int P0_;
};

class CovariantDifferentialImpl final : public FieldBase<CovariantDifferentialImpl> {
public:
    CovariantDifferentialImpl(CovariantComponents c, ExtField f)
        : c_(std::move(c)), f_(std::move(f)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const BundleSpec& spec = f_.spec();
        const int n = spec.n;
        const Tensor<Dual<S>> lifted = eval_lifted(f_, q);
        const Tensor<S> Zij = c_.Zij.eval(q);
        const Tensor<S> Gji = c_.Gji.eval(q);
        std::vector<Tensor<S>> ZPj;
        ZPj.reserve(c_.ZPj.size());
        for (const ExtField& f : c_.ZPj) ZPj.push_back(f.eval(q));

        const Valence v = f_.valence();
        Tensor<S> out(n, Valence{v.r, v.s + 1});
        const std::size_t upper_count = int_power(static_cast<std::size_t>(n), v.r);
        const std::size_t lower_count = int_power(static_cast<std::size_t>(n), v.s);
        for (int j = 0; j < n; ++j) {
            // slice the direction out of every component family
            Tensor<S> Zj(n, Valence{1, 0});
            for (int i = 0; i < n; ++i)
                Zj[static_cast<std::size_t>(i)] = Zij[static_cast<std::size_t>(i) * n + j];
            std::vector<Tensor<S>> ZPslice;
            ZPslice.reserve(ZPj.size());
            for (int P = 0; P < spec.slots(); ++P)
                ZPslice.push_back(read_direction_block(ZPj[static_cast<std::size_t>(P)], j,
                                                       spec.types[static_cast<std::size_t>(P)]));
            const Tensor<S> row =
                first_order_apply(spec, lifted, Zj, ZPslice, detail::direction_slice(Gji, j));
            // direction j is the first lower slot of the result
            for (std::size_t ub = 0; ub < upper_count; ++ub)
                for (std::size_t lb = 0; lb < lower_count; ++lb)
                    out[(ub * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) *
                            lower_count +
                        lb] = row[ub * lower_count + lb];
        }
        return out;
    }

private:
    CovariantComponents c_;
    ExtField f_;
};

class VerticalDerivativeImpl final : public FieldBase<VerticalDerivativeImpl> {
public:
    VerticalDerivativeImpl(int P0, ExtField dirT, ExtField f)
        : P0_(P0), dirT_(std::move(dirT)), f_(std::move(f)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const BundleSpec& spec = f_.spec();
        const Tensor<Dual<S>> lifted = eval_lifted(f_, q);
        const Tensor<S> Y = dirT_.eval(q);
        const std::size_t off = static_cast<std::size_t>(spec.n) + spec.slot_offset(P0_);
        Tensor<S> out(spec.n, f_.valence());
        for (std::size_t c = 0; c < out.size(); ++c) {
            S acc{};
            for (std::size_t u = 0; u < Y.size(); ++u)
                acc = acc + Y[u] * detail::coeff(lifted[c].d, off + u);
            out[c] = acc;
        }
        return out;
    }

private:
    int P0_;
    ExtField dirT_, f_;
};

class VerticalDifferentialImpl final : public FieldBase<VerticalDifferentialImpl> {
public:
    VerticalDifferentialImpl(int P0, ExtField f) : P0_(P0), f_(std::move(f)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const BundleSpec& spec = f_.spec();
        const int n = spec.n;
        const Valence vf = f_.valence();
        const Valence vp = spec.types[static_cast<std::size_t>(P0_)];
        const Tensor<Dual<S>> lifted = eval_lifted(f_, q);
        const std::size_t off = static_cast<std::size_t>(n) + spec.slot_offset(P0_);

        // out^{fu kb}_{fl hb} = d f^{fu}_{fl} / d T^{hb}_{kb}[P]
        Tensor<S> out(n, Valence{vf.r + vp.s, vf.s + vp.r});
        const std::size_t nfu = int_power(static_cast<std::size_t>(n), vf.r);
        const std::size_t nfl = int_power(static_cast<std::size_t>(n), vf.s);
        const std::size_t nkb = int_power(static_cast<std::size_t>(n), vp.s);
        const std::size_t nhb = int_power(static_cast<std::size_t>(n), vp.r);
        for (std::size_t fu = 0; fu < nfu; ++fu)
            for (std::size_t kb = 0; kb < nkb; ++kb)
                for (std::size_t fl = 0; fl < nfl; ++fl)
                    for (std::size_t hb = 0; hb < nhb; ++hb) {
                        const std::size_t fcomp = fu * nfl + fl;
                        const std::size_t var = hb * nkb + kb;  // T[P] layout: uppers first
                        out[((fu * nkb + kb) * nfl + fl) * nhb + hb] =
                            detail::coeff(lifted[fcomp].d, off + var);
                    }
        return out;
    }

private:
    int P0_;
    ExtField f_;
};

// Connection coefficients carried to the other chart by their own
// transformation law.
class TransportedConnectionImpl final : public FieldBase<TransportedConnectionImpl> {
public:
    TransportedConnectionImpl(ExtendedConnection conn, Transition t, Direction dir)
        : conn_(std::move(conn)), t_(std::move(t)), dir_(dir) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const BundleSpec& spec = conn_.gamma.spec();
        const Direction back = dir_ == Direction::ToTilde ? Direction::FromTilde : Direction::ToTilde;
        const FiberPoint<S> src = transform_fiber_point(spec, t_, q, back);
        const std::vector<S>& untilded = dir_ == Direction::ToTilde ? src.base : q.base;
        const TransitionJets<S> td = transition_jets<S>(t_, std::span<const S>(untilded));
        const std::vector<S>& theta = dir_ == Direction::ToTilde ? td.theta_tilde : td.theta;

        Tensor<S> out = transform_tensor_components(conn_.gamma.eval(src), td, dir_);
        const int n = spec.n;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const std::size_t g = (static_cast<std::size_t>(k) * n + j) * n + i;
                    out[g] = out[g] + theta[(static_cast<std::size_t>(k) * n + j) * n + i];
                }
        return out;
    }

private:
    ExtendedConnection conn_;
    Transition t_;
    Direction dir_;
};

}  // namespace impls

ExtField lift_field(const ExtendedConnection& conn, int P) {
    const BundleSpec& spec = conn.gamma.spec();
    if (P < 1 || P > spec.slots()) throw IndexOutOfRange("lift_field: slot out of range");
    const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
    return ExtField(spec, Valence{vp.r, vp.s + 1},
                    std::make_shared<impls::LiftFieldImpl>(conn, P - 1));
}

CovariantComponents make_covariant(const BundleSpec& spec, ExtField Zij, std::vector<ExtField> ZPj,
                                   ExtField Gji) {
    if (Zij.valence() != Valence{1, 1}) throw ShapeMismatch("covariant: Zij must be (1,1)");
    if (Gji.valence() != Valence{1, 2}) throw ShapeMismatch("covariant: Gji must be (1,2)");
    if (ZPj.size() != spec.types.size()) throw ShapeMismatch("covariant: wrong slot count");
    for (std::size_t P = 0; P < ZPj.size(); ++P)
        if (ZPj[P].valence() != Valence{spec.types[P].r, spec.types[P].s + 1})
            throw ShapeMismatch("covariant: Z[P]_j has wrong valence");
    return CovariantComponents{std::move(Zij), std::move(ZPj), std::move(Gji)};
}

CovariantComponents degenerate_covariant(const ExtField& S3) {
    if (S3.valence() != Valence{1, 2})
        throw ShapeMismatch("degenerate covariant differentiation needs a (1,2) field");
    const BundleSpec& spec = S3.spec();
    std::vector<ExtField> zp;
    zp.reserve(spec.types.size());
    for (const Valence& v : spec.types) zp.push_back(make_zero_field(spec, Valence{v.r, v.s + 1}));
    return CovariantComponents{make_zero_field(spec, Valence{1, 1}), std::move(zp), S3};
}

CovariantComponents spatial_components(const ExtendedConnection& conn) {
    const BundleSpec& spec = conn.gamma.spec();
    std::vector<ExtField> zp;
    zp.reserve(spec.types.size());
    for (int P = 1; P <= spec.slots(); ++P)
        zp.push_back(scale_field(-1.0, lift_field(conn, P)));
    return CovariantComponents{make_constant_field(spec, TensorD::identity(spec.n)),
                               std::move(zp), conn.gamma};
}

ExtField covariant_differential(const CovariantComponents& c, const ExtField& f) {
    const Valence v = f.valence();
    return ExtField(f.spec(), Valence{v.r, v.s + 1},
                    std::make_shared<impls::CovariantDifferentialImpl>(c, f));
}

ExtField covariant_apply(const CovariantComponents& c, const ExtField& dir, const ExtField& f) {
    if (dir.valence() != Valence{1, 0})
        throw ShapeMismatch("covariant_apply: direction must be a vector field");
    return contract_field(product_fields(dir, covariant_differential(c, f)), 0, 0);
}

ExtField spatial_covariant_differential(const ExtendedConnection& conn, const ExtField& f) {
    return covariant_differential(spatial_components(conn), f);
}

ExtField spatial_covariant(const ExtendedConnection& conn, const ExtField& dir, const ExtField& f) {
    return covariant_apply(spatial_components(conn), dir, f);
}

DerivationComponents spatial_derivation(const ExtendedConnection& conn, const ExtField& dir) {
    if (dir.valence() != Valence{1, 0})
        throw ShapeMismatch("spatial_derivation: direction must be a vector field");
    const BundleSpec& spec = conn.gamma.spec();
    std::vector<ExtField> zp;
    zp.reserve(spec.types.size());
    for (int P = 1; P <= spec.slots(); ++P) {
        const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
        zp.push_back(scale_field(
            -1.0, contract_field(product_fields(lift_field(conn, P), dir), vp.r, 0)));
    }
    ExtField G = contract_field(product_fields(conn.gamma, dir), 1, 0);
    return DerivationComponents{dir, std::move(zp), std::move(G)};
}

ExtField vertical_derivative(int P, const ExtField& dirT, const ExtField& f) {
    const BundleSpec& spec = f.spec();
    if (P < 1 || P > spec.slots())
        throw IndexOutOfRange("vertical_derivative: slot out of range");
    if (dirT.valence() != spec.types[static_cast<std::size_t>(P - 1)])
        throw ShapeMismatch("vertical_derivative: direction has wrong valence");
    return ExtField(spec, f.valence(),
                    std::make_shared<impls::VerticalDerivativeImpl>(P - 1, dirT, f));
}

ExtField vertical_differential(int P, const ExtField& f) {
    const BundleSpec& spec = f.spec();
    if (P < 1 || P > spec.slots())
        throw IndexOutOfRange("vertical_differential: slot out of range");
    const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
    const Valence vf = f.valence();
    return ExtField(spec, Valence{vf.r + vp.s, vf.s + vp.r},
                    std::make_shared<impls::VerticalDifferentialImpl>(P - 1, f));
}

DerivationComponents vertical_derivation(const BundleSpec& spec, int P, const ExtField& dirT) {
    if (P < 1 || P > spec.slots())
        throw IndexOutOfRange("vertical_derivation: slot out of range");
    DerivationComponents d = zero_derivation(spec);
    if (dirT.valence() != spec.types[static_cast<std::size_t>(P - 1)])
        throw ShapeMismatch("vertical_derivation: direction has wrong valence");
    d.ZP[static_cast<std::size_t>(P - 1)] = dirT;
    return d;
}

TensorD transform_connection_values(const BundleSpec& spec, const Transition& t,
                                    const FiberPointD& q, const TensorD& in, Direction dir) {
    validate_point(spec, q);
    const TransitionData td = transition_data(t, std::span<const double>(q.base));
    const std::vector<double>& theta = dir == Direction::ToTilde ? td.theta_tilde : td.theta;
    TensorD out = transform_tensor_components(in, td, dir);
    const int n = spec.n;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t g = (static_cast<std::size_t>(k) * n + j) * n + i;
                out[g] += theta[(static_cast<std::size_t>(k) * n + j) * n + i];
            }
    return out;
}

std::vector<TensorD> transform_lift_values(const BundleSpec& spec, const Transition& t,
                                           const FiberPointD& q, const std::vector<TensorD>& in,
                                           Direction dir) {
    validate_point(spec, q);
    const TransitionData td = transition_data(t, std::span<const double>(q.base));
    const FiberPointD qt = transform_fiber_point(spec, t, q, Direction::ToTilde);
    const std::vector<double>& theta = dir == Direction::ToTilde ? td.theta_tilde : td.theta;
    const FiberPointD& anchor = dir == Direction::ToTilde ? qt : q;
    const int n = spec.n;

    std::vector<TensorD> out;
    out.reserve(in.size());
    for (int P = 0; P < spec.slots(); ++P) {
        const Valence vp = spec.types[static_cast<std::size_t>(P)];
        TensorD lp = transform_tensor_components(in[static_cast<std::size_t>(P)], td, dir);
        for (int j = 0; j < n; ++j) {
            TensorD block = read_direction_block(lp, j, vp);
            block = add(block, degenerate_action(theta_direction_slice(theta, n, j),
                                                 anchor.args[static_cast<std::size_t>(P)]));
            write_direction_block(lp, block, j, vp);
        }
        out.push_back(std::move(lp));
    }
    return out;
}

CovariantValues eval_covariant(const CovariantComponents& c, const FiberPointD& q) {
    CovariantValues v;
    v.Zij = c.Zij.eval(q);
    v.ZPj.reserve(c.ZPj.size());
    for (const ExtField& f : c.ZPj) v.ZPj.push_back(f.eval(q));
    v.Gji = c.Gji.eval(q);
    return v;
}

CovariantValues transform_covariant_values(const BundleSpec& spec, const Transition& t,
                                           const FiberPointD& q, const CovariantValues& in,
                                           Direction dir) {
    validate_point(spec, q);
    const TransitionData td = transition_data(t, std::span<const double>(q.base));
    const FiberPointD qt = transform_fiber_point(spec, t, q, Direction::ToTilde);
    const std::vector<double>& theta = dir == Direction::ToTilde ? td.theta_tilde : td.theta;
    const FiberPointD& anchor = dir == Direction::ToTilde ? qt : q;
    const int n = spec.n;

    CovariantValues out;
    out.Zij = transform_tensor_components(in.Zij, td, dir);

    out.ZPj.reserve(in.ZPj.size());
    for (int P = 0; P < spec.slots(); ++P) {
        const Valence vp = spec.types[static_cast<std::size_t>(P)];
        TensorD zp = transform_tensor_components(in.ZPj[static_cast<std::size_t>(P)], td, dir);
        for (int j = 0; j < n; ++j) {
            TensorD block = read_direction_block(zp, j, vp);
            for (int i = 0; i < n; ++i)
                block = add(block,
                            scale(-out.Zij[static_cast<std::size_t>(i) * n + j],
                                  degenerate_action(theta_direction_slice(theta, n, i),
                                                    anchor.args[static_cast<std::size_t>(P)])));
            write_direction_block(zp, block, j, vp);
        }
        out.ZPj.push_back(std::move(zp));
    }

    out.Gji = transform_tensor_components(in.Gji, td, dir);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int a = 0; a < n; ++a)
                    acc += out.Zij[static_cast<std::size_t>(a) * n + j] *
                           theta[(static_cast<std::size_t>(k) * n + a) * n + i];
                out.Gji[(static_cast<std::size_t>(k) * n + j) * n + i] += acc;
            }
    return out;
}

ExtendedConnection transport_connection(const ExtendedConnection& conn, const Transition& t,
                                        Direction dir) {
    return ExtendedConnection{
        ExtField(conn.gamma.spec(), Valence{1, 2},
                 std::make_shared<impls::TransportedConnectionImpl>(conn, t, dir))};
}

Decomposition decompose(const DerivationComponents& d, const ExtendedConnection& conn) {
    const BundleSpec& spec = conn.gamma.spec();
    if (!(d.Z.spec() == spec))
        throw ShapeMismatch("decompose: derivation and connection live on different bundles");
    Decomposition parts;
    parts.X = d.Z;
    parts.Y.reserve(d.ZP.size());
    for (int P = 1; P <= spec.slots(); ++P) {
        const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
        const ExtField corr =
            contract_field(product_fields(lift_field(conn, P), parts.X), vp.r, 0);
        parts.Y.push_back(add_fields(d.ZP[static_cast<std::size_t>(P - 1)], corr));
    }
    parts.S_deg =
        sub_fields(d.G, contract_field(product_fields(conn.gamma, parts.X), 1, 0));
    return parts;
}

DerivationComponents reconstruct(const ExtendedConnection& conn, const Decomposition& parts) {
    const BundleSpec& spec = conn.gamma.spec();
    DerivationComponents d;
    d.Z = parts.X;
    d.ZP.reserve(parts.Y.size());
    for (int P = 1; P <= spec.slots(); ++P) {
        const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
        const ExtField corr =
            contract_field(product_fields(lift_field(conn, P), parts.X), vp.r, 0);
        d.ZP.push_back(sub_fields(parts.Y[static_cast<std::size_t>(P - 1)], corr));
    }
    d.G = add_fields(contract_field(product_fields(conn.gamma, parts.X), 1, 0), parts.S_deg);
    return d;
}

}  // namespace extcalc

#include "extcalc/curvature.hpp"

namespace extcalc {

namespace impls {

class TorsionImpl final : public FieldBase<TorsionImpl> {
public:
    explicit TorsionImpl(ExtendedConnection conn) : conn_(std::move(conn)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const Tensor<S> g = conn_.gamma.eval(q);
        const int n = g.dim();
        Tensor<S> out(n, Valence{1, 2});
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    out[(static_cast<std::size_t>(k) * n + i) * n + j] =
                        g[(static_cast<std::size_t>(k) * n + i) * n + j] -
                        g[(static_cast<std::size_t>(k) * n + j) * n + i];
        return out;
    }

private:
    ExtendedConnection conn_;
};

class StaticCurvatureImpl final : public FieldBase<StaticCurvatureImpl> {
public:
    explicit StaticCurvatureImpl(ExtendedConnection conn) : conn_(std::move(conn)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const BundleSpec& spec = conn_.gamma.spec();
        const int n = spec.n;
        const Tensor<Dual<S>> gl = eval_lifted(conn_.gamma, q);
        Tensor<S> gv(n, Valence{1, 2});
        for (std::size_t c = 0; c < gv.size(); ++c) gv[c] = gl[c].v;

        // horizontal lift components per direction, from the gamma values
        std::vector<std::vector<Tensor<S>>> lifts(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            lifts[static_cast<std::size_t>(i)].reserve(q.args.size());
            for (int P = 0; P < spec.slots(); ++P)
                lifts[static_cast<std::size_t>(i)].push_back(degenerate_action(
                    detail::direction_slice(gv, i), q.args[static_cast<std::size_t>(P)]));
        }

        // horizontal derivative of the gamma component (k; dir, act)
        const auto hd = [&](int i, int k, int dir, int act) -> S {
            const std::size_t c = (static_cast<std::size_t>(k) * n + dir) * n + act;
            S acc = detail::coeff(gl[c].d, static_cast<std::size_t>(i));
            for (int P = 0; P < spec.slots(); ++P) {
                const std::size_t off = static_cast<std::size_t>(n) + spec.slot_offset(P);
                const Tensor<S>& L = lifts[static_cast<std::size_t>(i)][static_cast<std::size_t>(P)];
                for (std::size_t u = 0; u < L.size(); ++u)
                    acc = acc - L[u] * detail::coeff(gl[c].d, off + u);
            }
            return acc;
        };

        Tensor<S> out(n, Valence{1, 3});
        for (int k = 0; k < n; ++k)
            for (int h = 0; h < n; ++h)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        S acc = hd(i, k, j, h) - hd(j, k, i, h);
                        for (int a = 0; a < n; ++a)
                            acc = acc +
                                  gv[(static_cast<std::size_t>(a) * n + j) * n + h] *
                                      gv[(static_cast<std::size_t>(k) * n + i) * n + a] -
                                  gv[(static_cast<std::size_t>(a) * n + i) * n + h] *
                                      gv[(static_cast<std::size_t>(k) * n + j) * n + a];
                        out[((static_cast<std::size_t>(k) * n + h) * n + i) * n + j] = acc;
                    }
        return out;
    }

private:
    ExtendedConnection conn_;
};

class DynamicCurvatureImpl final : public FieldBase<DynamicCurvatureImpl> {
public:
    DynamicCurvatureImpl(ExtendedConnection conn, int P0) : conn_(std::move(conn)), P0_(P0) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const BundleSpec& spec = conn_.gamma.spec();
        const int n = spec.n;
        const Valence vp = spec.types[static_cast<std::size_t>(P0_)];
        const Tensor<Dual<S>> gl = eval_lifted(conn_.gamma, q);
        const std::size_t off = static_cast<std::size_t>(n) + spec.slot_offset(P0_);

        const std::size_t nkb = int_power(static_cast<std::size_t>(n), vp.s);
        const std::size_t nhb = int_power(static_cast<std::size_t>(n), vp.r);
        Tensor<S> out(n, Valence{1 + vp.s, 2 + vp.r});
        for (int k = 0; k < n; ++k)
            for (std::size_t kb = 0; kb < nkb; ++kb)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (std::size_t hb = 0; hb < nhb; ++hb) {
                            const std::size_t gc = (static_cast<std::size_t>(k) * n + j) * n + i;
                            const std::size_t var = hb * nkb + kb;
                            out[(((static_cast<std::size_t>(k) * nkb + kb) * n +
                                  static_cast<std::size_t>(i)) *
                                     n +
                                 static_cast<std::size_t>(j)) *
                                    nhb +
                                hb] = -detail::coeff(gl[gc].d, off + var);
                        }
        return out;
    }

private:
    ExtendedConnection conn_;
    int P0_;
};

class ThetaTensorImpl final : public FieldBase<ThetaTensorImpl> {
public:
    ThetaTensorImpl(ExtField D, BundleSpec spec, int P0, int R0)
        : D_(std::move(D)), spec_(std::move(spec)), P0_(P0), R0_(R0) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const int n = spec_.n;
        const Valence vp = spec_.types[static_cast<std::size_t>(P0_)];
        const Valence vr = spec_.types[static_cast<std::size_t>(R0_)];
        const Tensor<S> Dv = D_.eval(q);
        const Tensor<S>& TR = q.args[static_cast<std::size_t>(R0_)];

        const std::size_t nkb = int_power(static_cast<std::size_t>(n), vp.s);
        const std::size_t nhb = int_power(static_cast<std::size_t>(n), vp.r);
        const std::size_t nib = int_power(static_cast<std::size_t>(n), vr.r);
        const std::size_t njb = int_power(static_cast<std::size_t>(n), vr.s);

        Tensor<S> out(n, Valence{vr.r + vp.s, vr.s + 1 + vp.r});
        for (int j = 0; j < n; ++j)
            for (std::size_t kb = 0; kb < nkb; ++kb)
                for (std::size_t hb = 0; hb < nhb; ++hb) {
                    Tensor<S> A(n, Valence{1, 1});
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            A[static_cast<std::size_t>(a) * n + b] =
                                Dv[(((static_cast<std::size_t>(a) * nkb + kb) * n +
                                     static_cast<std::size_t>(b)) *
                                        n +
                                    static_cast<std::size_t>(j)) *
                                       nhb +
                                   hb];
                    const Tensor<S> block = scale(S(-1.0), degenerate_action(A, TR));
                    for (std::size_t ib = 0; ib < nib; ++ib)
                        for (std::size_t jb = 0; jb < njb; ++jb)
                            out[(((ib * nkb + kb) * njb + jb) * n + static_cast<std::size_t>(j)) *
                                    nhb +
                                hb] = block[ib * njb + jb];
                }
        return out;
    }

private:
    ExtField D_;
    BundleSpec spec_;
    int P0_, R0_;
};

class OmegaTensorImpl final : public FieldBase<OmegaTensorImpl> {
public:
    OmegaTensorImpl(ExtField R, BundleSpec spec, int R0)
        : R_(std::move(R)), spec_(std::move(spec)), R0_(R0) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const int n = spec_.n;
        const Valence vr = spec_.types[static_cast<std::size_t>(R0_)];
        const Tensor<S> Rv = R_.eval(q);
        const Tensor<S>& TR = q.args[static_cast<std::size_t>(R0_)];
        const std::size_t nib = int_power(static_cast<std::size_t>(n), vr.r);
        const std::size_t njb = int_power(static_cast<std::size_t>(n), vr.s);

        Tensor<S> out(n, Valence{vr.r, vr.s + 2});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Tensor<S> A(n, Valence{1, 1});
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        A[static_cast<std::size_t>(a) * n + b] =
                            Rv[((static_cast<std::size_t>(a) * n + b) * n +
                                static_cast<std::size_t>(i)) *
                                   n +
                               static_cast<std::size_t>(j)];
                const Tensor<S> block = scale(S(-1.0), degenerate_action(A, TR));
                for (std::size_t ib = 0; ib < nib; ++ib)
                    for (std::size_t jb = 0; jb < njb; ++jb)
                        out[((ib * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * n +
                             static_cast<std::size_t>(j)) *
                                njb +
                            jb] = block[ib * njb + jb];
            }
        return out;
    }

private:
    ExtField R_;
    BundleSpec spec_;
    int R0_;
};

// the contraction wrappers S = D[P](X,Y), U = Theta[P,R](X,Y), S = R(X,Y),
// V = T(X,Y), U = Omega[R](X,Y)
class PairContractionImpl final : public FieldBase<PairContractionImpl> {
public:
    enum class Kind { Dynamic, Theta, Static, Torsion, Omega };

    PairContractionImpl(Kind kind, ExtField base, BundleSpec spec, int P0, int R0, ExtField X,
                        ExtField Y)
        : kind_(kind), base_(std::move(base)), spec_(std::move(spec)), P0_(P0), R0_(R0),
          X_(std::move(X)), Y_(std::move(Y)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        const int n = spec_.n;
        const Tensor<S> B = base_.eval(q);
        const Tensor<S> Xv = X_.eval(q);
        const Tensor<S> Yv = Y_.eval(q);
        switch (kind_) {
            case Kind::Dynamic: {
                const Valence vp = spec_.types[static_cast<std::size_t>(P0_)];
                const std::size_t nkb = int_power(static_cast<std::size_t>(n), vp.s);
                const std::size_t nhb = int_power(static_cast<std::size_t>(n), vp.r);
                Tensor<S> out(n, Valence{1, 1});
                for (int k = 0; k < n; ++k)
                    for (int i = 0; i < n; ++i) {
                        S acc{};
                        for (int j = 0; j < n; ++j)
                            for (std::size_t hb = 0; hb < nhb; ++hb)
                                for (std::size_t kb = 0; kb < nkb; ++kb)
                                    acc = acc + B[(((static_cast<std::size_t>(k) * nkb + kb) * n +
                                                    static_cast<std::size_t>(i)) *
                                                       n +
                                                   static_cast<std::size_t>(j)) *
                                                      nhb +
                                                  hb] *
                                                    Xv[static_cast<std::size_t>(j)] *
                                                    Yv[hb * nkb + kb];
                        out[static_cast<std::size_t>(k) * n + i] = acc;
                    }
                return out;
            }
            case Kind::Theta: {
                const Valence vp = spec_.types[static_cast<std::size_t>(P0_)];
                const Valence vr = spec_.types[static_cast<std::size_t>(R0_)];
                const std::size_t nkb = int_power(static_cast<std::size_t>(n), vp.s);
                const std::size_t nhb = int_power(static_cast<std::size_t>(n), vp.r);
                const std::size_t nib = int_power(static_cast<std::size_t>(n), vr.r);
                const std::size_t njb = int_power(static_cast<std::size_t>(n), vr.s);
                Tensor<S> out(n, vr);
                for (std::size_t ib = 0; ib < nib; ++ib)
                    for (std::size_t jb = 0; jb < njb; ++jb) {
                        S acc{};
                        for (int j = 0; j < n; ++j)
                            for (std::size_t hb = 0; hb < nhb; ++hb)
                                for (std::size_t kb = 0; kb < nkb; ++kb)
                                    acc = acc +
                                          B[(((ib * nkb + kb) * njb + jb) * n +
                                             static_cast<std::size_t>(j)) *
                                                nhb +
                                            hb] *
                                              Xv[static_cast<std::size_t>(j)] * Yv[hb * nkb + kb];
                        out[ib * njb + jb] = acc;
                    }
                return out;
            }
            case Kind::Static: {
                Tensor<S> out(n, Valence{1, 1});
                for (int k = 0; k < n; ++k)
                    for (int h = 0; h < n; ++h) {
                        S acc{};
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j)
                                acc = acc + B[((static_cast<std::size_t>(k) * n + h) * n + i) * n +
                                              j] *
                                                Xv[static_cast<std::size_t>(i)] *
                                                Yv[static_cast<std::size_t>(j)];
                        out[static_cast<std::size_t>(k) * n + h] = acc;
                    }
                return out;
            }
            case Kind::Torsion: {
                Tensor<S> out(n, Valence{1, 0});
                for (int k = 0; k < n; ++k) {
                    S acc{};
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            acc = acc + B[(static_cast<std::size_t>(k) * n + i) * n + j] *
                                            Xv[static_cast<std::size_t>(i)] *
                                            Yv[static_cast<std::size_t>(j)];
                    out[static_cast<std::size_t>(k)] = acc;
                }
                return out;
            }
            case Kind::Omega:
            default: {
                const Valence vr = spec_.types[static_cast<std::size_t>(R0_)];
                const std::size_t nib = int_power(static_cast<std::size_t>(n), vr.r);
                const std::size_t njb = int_power(static_cast<std::size_t>(n), vr.s);
                Tensor<S> out(n, vr);
                for (std::size_t ib = 0; ib < nib; ++ib)
                    for (std::size_t jb = 0; jb < njb; ++jb) {
                        S acc{};
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j)
                                acc = acc +
                                      B[((ib * static_cast<std::size_t>(n) +
                                          static_cast<std::size_t>(i)) *
                                             n +
                                         static_cast<std::size_t>(j)) *
                                            njb +
                                        jb] *
                                          Xv[static_cast<std::size_t>(i)] *
                                          Yv[static_cast<std::size_t>(j)];
                        out[ib * njb + jb] = acc;
                    }
                return out;
            }
        }
    }

private:
    Kind kind_;
    ExtField base_;
    BundleSpec spec_;
    int P0_, R0_;
    ExtField X_, Y_;
};

}  // namespace impls

ExtField torsion(const ExtendedConnection& conn) {
    return ExtField(conn.gamma.spec(), Valence{1, 2},
                    std::make_shared<impls::TorsionImpl>(conn));
}

ExtField static_curvature(const ExtendedConnection& conn) {
    return ExtField(conn.gamma.spec(), Valence{1, 3},
                    std::make_shared<impls::StaticCurvatureImpl>(conn));
}

ExtField dynamic_curvature(const ExtendedConnection& conn, int P) {
    const BundleSpec& spec = conn.gamma.spec();
    if (P < 1 || P > spec.slots()) throw IndexOutOfRange("dynamic_curvature: slot out of range");
    const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
    return ExtField(spec, Valence{1 + vp.s, 2 + vp.r},
                    std::make_shared<impls::DynamicCurvatureImpl>(conn, P - 1));
}

ExtField theta_tensor(const ExtendedConnection& conn, int P, int R) {
    const BundleSpec& spec = conn.gamma.spec();
    if (P < 1 || P > spec.slots() || R < 1 || R > spec.slots())
        throw IndexOutOfRange("theta_tensor: slot out of range");
    const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
    const Valence vr = spec.types[static_cast<std::size_t>(R - 1)];
    return ExtField(spec, Valence{vr.r + vp.s, vr.s + 1 + vp.r},
                    std::make_shared<impls::ThetaTensorImpl>(dynamic_curvature(conn, P), spec,
                                                             P - 1, R - 1));
}

ExtField omega_tensor(const ExtendedConnection& conn, int R) {
    const BundleSpec& spec = conn.gamma.spec();
    if (R < 1 || R > spec.slots()) throw IndexOutOfRange("omega_tensor: slot out of range");
    const Valence vr = spec.types[static_cast<std::size_t>(R - 1)];
    return ExtField(spec, Valence{vr.r, vr.s + 2},
                    std::make_shared<impls::OmegaTensorImpl>(static_curvature(conn), spec, R - 1));
}

CurvaturePack curvature_pack(const ExtendedConnection& conn) {
    const BundleSpec& spec = conn.gamma.spec();
    CurvaturePack pack;
    pack.torsion = torsion(conn);
    pack.static_R = static_curvature(conn);
    for (int P = 1; P <= spec.slots(); ++P) pack.dynamic_D.push_back(dynamic_curvature(conn, P));
    pack.theta_PR.resize(static_cast<std::size_t>(spec.slots()));
    for (int P = 1; P <= spec.slots(); ++P)
        for (int R = 1; R <= spec.slots(); ++R)
            pack.theta_PR[static_cast<std::size_t>(P - 1)].push_back(theta_tensor(conn, P, R));
    for (int R = 1; R <= spec.slots(); ++R) pack.omega_R.push_back(omega_tensor(conn, R));
    return pack;
}

ExtField contract_dynamic(const ExtField& D, const BundleSpec& spec, int P, const ExtField& X,
                          const ExtField& Y) {
    return ExtField(spec, Valence{1, 1},
                    std::make_shared<impls::PairContractionImpl>(
                        impls::PairContractionImpl::Kind::Dynamic, D, spec, P - 1, 0, X, Y));
}

ExtField contract_theta(const ExtField& Th, const BundleSpec& spec, int P, int R, const ExtField& X,
                        const ExtField& Y) {
    return ExtField(spec, spec.types[static_cast<std::size_t>(R - 1)],
                    std::make_shared<impls::PairContractionImpl>(
                        impls::PairContractionImpl::Kind::Theta, Th, spec, P - 1, R - 1, X, Y));
}

ExtField contract_static(const ExtField& R, const ExtField& X, const ExtField& Y) {
    return ExtField(R.spec(), Valence{1, 1},
                    std::make_shared<impls::PairContractionImpl>(
                        impls::PairContractionImpl::Kind::Static, R, R.spec(), 0, 0, X, Y));
}

ExtField contract_torsion(const ExtField& T, const ExtField& X, const ExtField& Y) {
    return ExtField(T.spec(), Valence{1, 0},
                    std::make_shared<impls::PairContractionImpl>(
                        impls::PairContractionImpl::Kind::Torsion, T, T.spec(), 0, 0, X, Y));
}

ExtField contract_omega(const ExtField& Om, const BundleSpec& spec, int R, const ExtField& X,
                        const ExtField& Y) {
    return ExtField(spec, spec.types[static_cast<std::size_t>(R - 1)],
                    std::make_shared<impls::PairContractionImpl>(
                        impls::PairContractionImpl::Kind::Omega, Om, spec, 0, R - 1, X, Y));
}

}  // namespace extcalc

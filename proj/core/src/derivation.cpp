#include "extcalc/derivation.hpp"

namespace extcalc {

namespace {

void require_shapes(const BundleSpec& spec, const ExtField& Z, const std::vector<ExtField>& ZP,
                    const ExtField& G) {
    if (Z.valence() != Valence{1, 0}) throw ShapeMismatch("derivation: Z must have valence (1,0)");
    if (G.valence() != Valence{1, 1}) throw ShapeMismatch("derivation: G must have valence (1,1)");
    if (ZP.size() != spec.types.size())
        throw ShapeMismatch("derivation: expected " + std::to_string(spec.types.size()) +
                            " fiber components");
    for (std::size_t P = 0; P < ZP.size(); ++P)
        if (ZP[P].valence() != spec.types[P])
            throw ShapeMismatch("derivation: Z[" + std::to_string(P + 1) + "] has wrong valence");
}

// theta contracted with a direction vector on its middle (first lower) index:
// M^k_i = sum_a dir^a theta^k_{a i}
TensorD theta_dir_matrix(const std::vector<double>& theta, int n, const TensorD& dir) {
    TensorD M(n, Valence{1, 1});
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int a = 0; a < n; ++a)
                acc += dir[static_cast<std::size_t>(a)] *
                       theta[(static_cast<std::size_t>(k) * n + a) * n + i];
            M[static_cast<std::size_t>(k) * n + i] = acc;
        }
    return M;
}

// theta with fixed direction j as a (1,1) matrix: (theta_j)^a_b = theta^a_{j b}
TensorD theta_slice(const std::vector<double>& theta, int n, int j) {
    TensorD M(n, Valence{1, 1});
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            M[static_cast<std::size_t>(a) * n + b] =
                theta[(static_cast<std::size_t>(a) * n + j) * n + b];
    return M;
}

}  // namespace

DerivationComponents make_derivation(const BundleSpec& spec, ExtField Z, std::vector<ExtField> ZP,
                                     ExtField G) {
    require_shapes(spec, Z, ZP, G);
    return DerivationComponents{std::move(Z), std::move(ZP), std::move(G)};
}

DerivationComponents zero_derivation(const BundleSpec& spec) {
    std::vector<ExtField> zp;
    zp.reserve(spec.types.size());
    for (const Valence& v : spec.types) zp.push_back(make_zero_field(spec, v));
    return DerivationComponents{make_zero_field(spec, Valence{1, 0}), std::move(zp),
                                make_zero_field(spec, Valence{1, 1})};
}

DerivationComponents degenerate_from_tensor(const ExtField& S_field) {
    if (S_field.valence() != Valence{1, 1})
        throw ShapeMismatch("degenerate differentiation needs a (1,1) field");
    DerivationComponents d = zero_derivation(S_field.spec());
    d.G = S_field;
    return d;
}

ExtField apply_derivation(const DerivationComponents& d, const ExtField& f) {
    if (!(d.Z.spec() == f.spec()))
        throw ShapeMismatch("apply_derivation: derivation and field live on different bundles");
    return ExtField(f.spec(), f.valence(),
                    std::make_shared<impls::ApplyDerivationImpl>(d, f));
}

ExtField commutator_field(const DerivationComponents& d1, const DerivationComponents& d2,
                          const ExtField& f) {
    return sub_fields(apply_derivation(d1, apply_derivation(d2, f)),
                      apply_derivation(d2, apply_derivation(d1, f)));
}

DerivationValuesD transform_derivation_values(const BundleSpec& spec, const Transition& t,
                                              const FiberPointD& q, const DerivationValuesD& in,
                                              Direction dir) {
    validate_point(spec, q);
    const TransitionData td = transition_data(t, std::span<const double>(q.base));
    const FiberPointD qt = transform_fiber_point(spec, t, q, Direction::ToTilde);
    const int n = spec.n;

    DerivationValuesD out;
    // Z transforms vectorially either way.
    out.Z = transform_tensor_components(in.Z, td, dir);

    // Z[P]: tensor law plus the theta correction driven by the *target*
    // chart's Z, theta and native values.
    const std::vector<double>& theta = dir == Direction::ToTilde ? td.theta_tilde : td.theta;
    const FiberPointD& anchor = dir == Direction::ToTilde ? qt : q;
    out.ZP.reserve(in.ZP.size());
    for (std::size_t P = 0; P < in.ZP.size(); ++P) {
        TensorD zp = transform_tensor_components(in.ZP[P], td, dir);
        for (int i = 0; i < n; ++i) {
            const TensorD theta_i = theta_slice(theta, n, i);
            zp = add(zp, scale(-out.Z[static_cast<std::size_t>(i)],
                               degenerate_action(theta_i, anchor.args[P])));
        }
        out.ZP.push_back(std::move(zp));
    }

    // Gamma: (1,1) tensor law plus sum_a Z^a theta^k_{a i} in the target chart.
    out.G = add(transform_tensor_components(in.G, td, dir), theta_dir_matrix(theta, n, out.Z));
    return out;
}

}  // namespace extcalc

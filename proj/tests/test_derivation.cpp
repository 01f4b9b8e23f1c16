#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "extcalc/derivation.hpp"
#include "extcalc/testfields.hpp"
#include "oracles.hpp"

using namespace extcalc;
using extcalc::testing::Rng;

namespace {

Transition cart_to_polar() {
    return Transition("cart", "polar", 2,
                      {parse("sqrt(x1^2+x2^2)"), parse("atan2(x2,x1)")},
                      {parse("x1*cos(x2)"), parse("x1*sin(x2)")});
}

DerivationComponents random_derivation(const BundleSpec& spec, std::mt19937_64& rng) {
    std::vector<ExtField> zp;
    for (const Valence& v : spec.types) zp.push_back(make_poly_field(spec, v, rng));
    return make_derivation(spec, make_poly_field(spec, Valence{1, 0}, rng), std::move(zp),
                           make_poly_field(spec, Valence{1, 1}, rng));
}

// all coordinates of the vector field on N represented by d's (Z, Z[P]) part
std::vector<double> z_coords(const DerivationComponents& d, const FiberPointD& q) {
    std::vector<double> out = d.Z.eval(q).components();
    for (const ExtField& f : d.ZP) {
        const TensorD t = f.eval(q);
        out.insert(out.end(), t.components().begin(), t.components().end());
    }
    return out;
}

FiberPointD shift_coord(const BundleSpec& spec, const FiberPointD& q, std::size_t w, double h) {
    FiberPointD out = q;
    if (w < static_cast<std::size_t>(spec.n)) {
        out.base[w] += h;
    } else {
        std::size_t off = w - static_cast<std::size_t>(spec.n);
        std::size_t P = 0;
        while (off >= out.args[P].size()) off -= out.args[P++].size();
        out.args[P][off] += h;
    }
    return out;
}

}  // namespace

TEST_CASE("apply_derivation basics") {
    SUBCASE("zero derivation maps everything to zero") {
        BundleSpec spec{2, {Valence{1, 0}}};
        std::mt19937_64 rng(5);
        const ExtField f = make_poly_field(spec, Valence{1, 1}, rng);
        const ExtField img = apply_derivation(zero_derivation(spec), f);
        const FiberPointD q = random_fiber_point(spec, rng);
        CHECK(max_abs(img.eval(q)) == 0.0);
    }

    SUBCASE("directional derivative on a scalar: n=1, Q=0, Z=1, f=x^2") {
        BundleSpec spec{1, {}};
        DerivationComponents d = zero_derivation(spec);
        d.Z = make_constant_field(spec, TensorD(1, Valence{1, 0}, {1.0}));
        const ExtField f = make_expr_field(spec, Valence{0, 0}, {{0, parse("x1^2")}});
        FiberPointD q;
        q.base = {3.0};
        CHECK(apply_derivation(d, f).eval(q)[0] == doctest::Approx(6.0));
    }

    SUBCASE("pure Gamma = identity: +f on vectors, -f on covectors, 0 on scalars") {
        BundleSpec spec{2, {Valence{0, 1}}};
        std::mt19937_64 rng(7);
        DerivationComponents d = zero_derivation(spec);
        d.G = make_constant_field(spec, TensorD::identity(2));
        const FiberPointD q = random_fiber_point(spec, rng);
        const ExtField vec = make_poly_field(spec, Valence{1, 0}, rng);
        const ExtField cov = make_poly_field(spec, Valence{0, 1}, rng);
        const ExtField sca = make_poly_field(spec, Valence{0, 0}, rng);
        CHECK(max_abs_diff(apply_derivation(d, vec).eval(q), vec.eval(q)) < 1e-15);
        CHECK(max_abs_diff(apply_derivation(d, cov).eval(q), scale(-1.0, cov.eval(q))) < 1e-15);
        CHECK(std::abs(apply_derivation(d, sca).eval(q)[0]) == 0.0);
    }
}

TEST_CASE("differentiation axioms on random triples") {
    BundleSpec spec{2, {Valence{1, 0}, Valence{0, 1}}};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const DerivationComponents d = random_derivation(spec, rng);
        const ExtField f = make_poly_field(spec, Valence{1, 1}, rng);
        const ExtField g = make_poly_field(spec, Valence{0, 1}, rng);
        const FiberPointD q = random_fiber_point(spec, rng);

        // grading: image has the operand's valence
        CHECK(apply_derivation(d, f).valence() == f.valence());

        // R-linearity
        const TensorD lin1 = apply_derivation(d, add_fields(f, f)).eval(q);
        const TensorD lin2 = scale(2.0, apply_derivation(d, f).eval(q));
        CHECK(max_abs_diff(lin1, lin2) < 1e-9);
        const TensorD lam1 = apply_derivation(d, scale_field(3.25, f)).eval(q);
        const TensorD lam2 = scale(3.25, apply_derivation(d, f).eval(q));
        CHECK(max_abs_diff(lam1, lam2) < 1e-9);

        // Leibniz
        const TensorD lz1 = apply_derivation(d, product_fields(f, g)).eval(q);
        const TensorD lz2 = add(tensor_product(apply_derivation(d, f).eval(q), g.eval(q)),
                                tensor_product(f.eval(q), apply_derivation(d, g).eval(q)));
        CHECK(max_abs_diff(lz1, lz2) < 1e-9);

        // commutation with contraction
        const TensorD cc1 = apply_derivation(d, contract_field(f, 0, 0)).eval(q);
        const TensorD cc2 = contract(apply_derivation(d, f).eval(q), 0, 0);
        CHECK(max_abs_diff(cc1, cc2) < 1e-9);
    }
}

TEST_CASE("covector law via the contraction-commutation oracle") {
    // applying d to C(h (x) e) two ways forces the -Gamma^T sign on covectors
    BundleSpec spec{3, {Valence{1, 0}}};
    std::mt19937_64 rng(13);
    const DerivationComponents d = random_derivation(spec, rng);
    const ExtField h = make_poly_field(spec, Valence{0, 1}, rng);
    const ExtField e = make_poly_field(spec, Valence{1, 0}, rng);
    const ExtField pair = contract_field(product_fields(h, e), 0, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const FiberPointD q = random_fiber_point(spec, rng);
        const double lhs = apply_derivation(d, pair).eval(q)[0];
        const double rhs =
            contract(tensor_product(apply_derivation(d, h).eval(q), e.eval(q)), 0, 0)[0] +
            contract(tensor_product(h.eval(q), apply_derivation(d, e).eval(q)), 0, 0)[0];
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("degenerate differentiations") {
    BundleSpec spec{2, {Valence{1, 0}}};
    std::mt19937_64 rng(17);

    SUBCASE("identity operator reproduces vectors, kills scalars") {
        const DerivationComponents d =
            degenerate_from_tensor(make_constant_field(spec, TensorD::identity(2)));
        const ExtField x = make_poly_field(spec, Valence{1, 0}, rng);
        const ExtField phi = make_poly_field(spec, Valence{0, 0}, rng);
        const FiberPointD q = random_fiber_point(spec, rng);
        CHECK(max_abs_diff(apply_derivation(d, x).eval(q), x.eval(q)) < 1e-15);
        CHECK(apply_derivation(d, phi).eval(q)[0] == 0.0);
    }

    SUBCASE("vectors get C(S (x) X), covectors get -S^T") {
        const ExtField S = make_poly_field(spec, Valence{1, 1}, rng);
        const DerivationComponents d = degenerate_from_tensor(S);
        const ExtField x = make_poly_field(spec, Valence{1, 0}, rng);
        const ExtField h = make_poly_field(spec, Valence{0, 1}, rng);
        for (int trial = 0; trial < 5; ++trial) {
            const FiberPointD q = random_fiber_point(spec, rng);
            const TensorD Sv = S.eval(q);
            const TensorD xv = x.eval(q);
            const TensorD hv = h.eval(q);
            // vector route: matrix action
            TensorD want_x(2, Valence{1, 0});
            TensorD want_h(2, Valence{0, 1});
            for (int i = 0; i < 2; ++i) {
                double ax = 0.0, ah = 0.0;
                for (int w = 0; w < 2; ++w) {
                    ax += Sv[static_cast<std::size_t>(i) * 2 + w] * xv[static_cast<std::size_t>(w)];
                    ah -= Sv[static_cast<std::size_t>(w) * 2 + i] * hv[static_cast<std::size_t>(w)];
                }
                want_x[static_cast<std::size_t>(i)] = ax;
                want_h[static_cast<std::size_t>(i)] = ah;
            }
            CHECK(max_abs_diff(apply_derivation(d, x).eval(q), want_x) < 1e-14);
            CHECK(max_abs_diff(apply_derivation(d, h).eval(q), want_h) < 1e-14);
        }
    }
}

TEST_CASE("commutators") {
    BundleSpec spec{2, {Valence{1, 0}}};
    std::mt19937_64 rng(23);

    SUBCASE("commutator of a derivation with itself vanishes") {
        const DerivationComponents d = random_derivation(spec, rng);
        const ExtField f = make_poly_field(spec, Valence{1, 0}, rng);
        const FiberPointD q = random_fiber_point(spec, rng);
        CHECK(max_abs(commutator_field(d, d, f).eval(q)) < 1e-11);
    }

    SUBCASE("degenerate pair reduces to the pointwise matrix commutator") {
        const ExtField S1 = make_poly_field(spec, Valence{1, 1}, rng);
        const ExtField S2 = make_poly_field(spec, Valence{1, 1}, rng);
        const ExtField x = make_poly_field(spec, Valence{1, 0}, rng);
        const ExtField comm = commutator_field(degenerate_from_tensor(S1),
                                               degenerate_from_tensor(S2), x);
        for (int trial = 0; trial < 5; ++trial) {
            const FiberPointD q = random_fiber_point(spec, rng);
            const TensorD a = S1.eval(q), b = S2.eval(q), xv = x.eval(q);
            TensorD want(2, Valence{1, 0});
            for (int i = 0; i < 2; ++i) {
                double acc = 0.0;
                for (int k = 0; k < 2; ++k)
                    for (int j = 0; j < 2; ++j)
                        acc += (a[static_cast<std::size_t>(i) * 2 + k] *
                                    b[static_cast<std::size_t>(k) * 2 + j] -
                                b[static_cast<std::size_t>(i) * 2 + k] *
                                    a[static_cast<std::size_t>(k) * 2 + j]) *
                               xv[static_cast<std::size_t>(j)];
                want[static_cast<std::size_t>(i)] = acc;
            }
            CHECK(max_abs_diff(comm.eval(q), want) < 1e-10);
        }
    }

    SUBCASE("on scalars the commutator is the Lie bracket of the Z vector fields") {
        const DerivationComponents d1 = random_derivation(spec, rng);
        const DerivationComponents d2 = random_derivation(spec, rng);
        const ExtField phi = make_poly_field(spec, Valence{0, 0}, rng);
        const ExtField comm = commutator_field(d1, d2, phi);
        const std::size_t W = spec.total_dim();
        for (int trial = 0; trial < 4; ++trial) {
            const FiberPointD q = random_fiber_point(spec, rng);
            // finite-difference Lie bracket of the coordinate vector fields on N
            const double h = 1e-6;
            std::vector<double> bracket(W, 0.0);
            const std::vector<double> z1 = z_coords(d1, q);
            const std::vector<double> z2 = z_coords(d2, q);
            for (std::size_t w = 0; w < W; ++w) {
                double acc = 0.0;
                for (std::size_t v = 0; v < W; ++v) {
                    const std::vector<double> up2 = z_coords(d2, shift_coord(spec, q, v, h));
                    const std::vector<double> dn2 = z_coords(d2, shift_coord(spec, q, v, -h));
                    const std::vector<double> up1 = z_coords(d1, shift_coord(spec, q, v, h));
                    const std::vector<double> dn1 = z_coords(d1, shift_coord(spec, q, v, -h));
                    acc += z1[v] * (up2[w] - dn2[w]) / (2 * h) - z2[v] * (up1[w] - dn1[w]) / (2 * h);
                }
                bracket[w] = acc;
            }
            double want = 0.0;
            for (std::size_t w = 0; w < W; ++w) {
                const double dphi = (phi.eval(shift_coord(spec, q, w, h))[0] -
                                     phi.eval(shift_coord(spec, q, w, -h))[0]) /
                                    (2 * h);
                want += bracket[w] * dphi;
            }
            CHECK(std::abs(comm.eval(q)[0] - want) < 1e-5);
        }
    }
}

TEST_CASE("component transformation") {
    BundleSpec spec{2, {Valence{1, 0}}};
    const Transition polar = cart_to_polar();
    std::mt19937_64 rng(29);

    SUBCASE("affine transition: all theta terms vanish, pure multilinear law") {
        const Transition t("a", "b", 2, {parse("2*x1+x2"), parse("x1+x2")},
                           {parse("x1-x2"), parse("-x1+2*x2")});
        const DerivationComponents d = random_derivation(spec, rng);
        const FiberPointD q = random_fiber_point(spec, rng);
        const DerivationValuesD v = eval_derivation(d, q);
        const DerivationValuesD vt = transform_derivation_values(spec, t, q, v, Direction::ToTilde);
        const TransitionData td = transition_data(t, std::span<const double>(q.base));
        CHECK(max_abs_diff(vt.Z, transform_tensor_components(v.Z, td, Direction::ToTilde)) < 1e-12);
        CHECK(max_abs_diff(vt.ZP[0], transform_tensor_components(v.ZP[0], td, Direction::ToTilde)) <
              1e-12);
        CHECK(max_abs_diff(vt.G, transform_tensor_components(v.G, td, Direction::ToTilde)) < 1e-12);
    }

    SUBCASE("Z = 0 makes Gamma a (1,1) tensor") {
        DerivationComponents d = zero_derivation(spec);
        d.G = make_poly_field(spec, Valence{1, 1}, rng);
        FiberPointD q = random_fiber_point(spec, rng);
        q.base = {1.3, 0.4};
        const DerivationValuesD v = eval_derivation(d, q);
        const DerivationValuesD vt =
            transform_derivation_values(spec, polar, q, v, Direction::ToTilde);
        const TransitionData td = transition_data(polar, std::span<const double>(q.base));
        CHECK(max_abs_diff(vt.G, transform_tensor_components(v.G, td, Direction::ToTilde)) < 1e-12);
    }

    SUBCASE("forward then back restores the components at the polar fixture") {
        for (int trial = 0; trial < 10; ++trial) {
            const DerivationComponents d = random_derivation(spec, rng);
            FiberPointD q = random_fiber_point(spec, rng);
            q.base = {extcalc::testing::Rng(rng()).uniform(0.5, 2.0),
                      extcalc::testing::Rng(rng()).uniform(-1.2, 1.2)};
            const DerivationValuesD v = eval_derivation(d, q);
            const DerivationValuesD vt =
                transform_derivation_values(spec, polar, q, v, Direction::ToTilde);
            const DerivationValuesD back =
                transform_derivation_values(spec, polar, q, vt, Direction::FromTilde);
            CHECK(max_abs_diff(back.Z, v.Z) < 1e-9);
            CHECK(max_abs_diff(back.ZP[0], v.ZP[0]) < 1e-9);
            CHECK(max_abs_diff(back.G, v.G) < 1e-9);
        }
    }
}

TEST_CASE("a derivation is fixed by its action on scalars and vectors") {
    BundleSpec spec{2, {Valence{1, 0}, Valence{0, 1}}};
    std::mt19937_64 rng(31);
    const DerivationComponents d = random_derivation(spec, rng);

    // probe basis: coordinate scalars, fiber-component scalars, constant
    // coordinate vectors
    const std::vector<std::string> names = bundle_var_names(spec);
    for (int trial = 0; trial < 5; ++trial) {
        const FiberPointD q = random_fiber_point(spec, rng);
        const DerivationValuesD direct = eval_derivation(d, q);

        for (int i = 0; i < spec.n; ++i) {
            const ExtField xi = make_expr_field(spec, Valence{0, 0}, {{0, parse(names[static_cast<std::size_t>(i)])}});
            CHECK(std::abs(apply_derivation(d, xi).eval(q)[0] -
                           direct.Z[static_cast<std::size_t>(i)]) < 1e-10);
        }
        for (std::size_t P = 0; P < direct.ZP.size(); ++P) {
            const std::size_t off =
                static_cast<std::size_t>(spec.n) + spec.slot_offset(static_cast<int>(P));
            for (std::size_t u = 0; u < direct.ZP[P].size(); ++u) {
                const ExtField tv =
                    make_expr_field(spec, Valence{0, 0}, {{0, parse(names[off + u])}});
                CHECK(std::abs(apply_derivation(d, tv).eval(q)[0] - direct.ZP[P][u]) < 1e-10);
            }
        }
        for (int k = 0; k < spec.n; ++k) {
            TensorD ek(spec.n, Valence{1, 0});
            ek[static_cast<std::size_t>(k)] = 1.0;
            const TensorD img = apply_derivation(d, make_constant_field(spec, ek)).eval(q);
            for (int i = 0; i < spec.n; ++i)
                CHECK(std::abs(img[static_cast<std::size_t>(i)] -
                               direct.G[static_cast<std::size_t>(i) * spec.n + k]) < 1e-10);
        }
    }
}

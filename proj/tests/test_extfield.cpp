#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "extcalc/extfield.hpp"
#include "oracles.hpp"

using namespace extcalc;
using extcalc::testing::Rng;

namespace {

Transition cart_to_polar() {
    return Transition("cart", "polar", 2,
                      {parse("sqrt(x1^2+x2^2)"), parse("atan2(x2,x1)")},
                      {parse("x1*cos(x2)"), parse("x1*sin(x2)")});
}

// Minkowski-signature diagonal
double mink(int i) { return i == 0 ? 1.0 : -1.0; }

// quadruple-sum oracle for the electromagnetic scalar, c = 1
double em_lagrangian_oracle(const TensorD& F) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    if (i != j || a != b) continue;  // diagonal metric
                    sum += mink(i) * mink(a) * F[F.flatten({i, a})] * F[F.flatten({j, b})];
                }
    return -sum / (16.0 * 3.14159265358979323846);
}

ExtField em_lagrangian_field(const BundleSpec& spec) {
    // L = -1/(16 pi) sum g_ii g_aa (F^{ia})^2
    std::string src;
    for (int i = 0; i < 4; ++i)
        for (int a = 0; a < 4; ++a) {
            const double sign = mink(i) * mink(a);
            const std::string term =
                "T1_{" + std::to_string(i + 1) + std::to_string(a + 1) + ";}^2";
            src += (sign > 0 ? (src.empty() ? "" : "+") : "-") + term;
        }
    src = "-(" + src + ")/(16*pi)";
    return make_expr_field(spec, Valence{0, 0}, {{0, parse(src)}});
}

TensorD em_field_strength(double e1, double e2, double e3, double h1, double h2, double h3) {
    TensorD F(4, Valence{2, 0});
    const double m[4][4] = {{0, -e1, -e2, -e3},
                            {e1, 0, -h3, h2},
                            {e2, h3, 0, -h1},
                            {e3, -h2, h1, 0}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) F[F.flatten({i, j})] = m[i][j];
    return F;
}

}  // namespace

TEST_CASE("constant and native fields") {
    BundleSpec spec{2, {Valence{1, 0}, Valence{0, 1}}};
    Rng rng(5);
    const TensorD c = extcalc::testing::random_tensor(rng, 2, Valence{1, 1});
    const ExtField f = make_constant_field(spec, c);
    for (int trial = 0; trial < 5; ++trial) {
        const FiberPointD q = extcalc::testing::random_point(spec, rng);
        CHECK(max_abs_diff(f.eval(q), c) == 0.0);
    }
    const ExtField n2 = make_native_field(spec, 2);
    const FiberPointD q = extcalc::testing::random_point(spec, rng);
    CHECK(max_abs_diff(n2.eval(q), q.args[1]) == 0.0);
    CHECK_THROWS_AS(make_native_field(spec, 3), IndexOutOfRange);
    CHECK_THROWS_AS(make_native_field(spec, 0), IndexOutOfRange);
}

TEST_CASE("native field partials: identity on its own slot, zero elsewhere") {
    BundleSpec spec{2, {Valence{1, 0}, Valence{1, 0}}};
    Rng rng(9);
    const FiberPointD q = extcalc::testing::random_point(spec, rng);
    for (int P = 1; P <= 2; ++P) {
        const ExtField nat = make_native_field(spec, P);
        const Partials<double> p = partials(nat, q);
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(p.base(c, 0) == 0.0);
            CHECK(p.base(c, 1) == 0.0);
            for (int R = 0; R < 2; ++R)
                for (std::size_t u = 0; u < 2; ++u)
                    CHECK(p.fiber(c, R, u) == ((R == P - 1 && u == c) ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("expression field partials: product rule case") {
    BundleSpec spec{2, {Valence{1, 0}}};
    const ExtField f =
        make_expr_field(spec, Valence{0, 0}, {{0, parse("x1*T1_{1;}")}});
    Rng rng(11);
    const FiberPointD q = extcalc::testing::random_point(spec, rng);
    const Partials<double> p = partials(f, q);
    CHECK(p.base(0, 0) == doctest::Approx(q.args[0][0]));
    CHECK(p.base(0, 1) == 0.0);
    CHECK(p.fiber(0, 0, 0) == doctest::Approx(q.base[0]));
    CHECK(p.fiber(0, 0, 1) == 0.0);
}

TEST_CASE("constant field has zero partials") {
    BundleSpec spec{2, {Valence{0, 1}}};
    Rng rng(13);
    const ExtField f = make_constant_field(spec, extcalc::testing::random_tensor(rng, 2, Valence{1, 0}));
    const FiberPointD q = extcalc::testing::random_point(spec, rng);
    const Partials<double> p = partials(f, q);
    for (std::size_t c = 0; c < 2; ++c) {
        for (int i = 0; i < spec.n; ++i) CHECK(p.base(c, i) == 0.0);
        for (std::size_t u = 0; u < spec.slot_size(0); ++u) CHECK(p.fiber(c, 0, u) == 0.0);
    }
}

TEST_CASE("partials of random expression fields match central differences") {
    BundleSpec spec{2, {Valence{1, 0}, Valence{0, 1}}};
    Rng rng(17);
    const char* bodies[] = {
        "sin(x1)*T1_{1;} + cos(x2)*T2_{;1}",
        "x1^2*T1_{2;} - x2*T1_{1;}*T2_{;2}",
        "exp(0.4*x1)+T1_{1;}^2*x2",
        "(T2_{;1}+2)*(x1-x2)",
    };
    for (const char* body : bodies) {
        const ExtField f = make_expr_field(spec, Valence{0, 0}, {{0, parse(body)}});
        for (int trial = 0; trial < 13; ++trial) {
            const FiberPointD q = extcalc::testing::random_point(spec, rng);
            const Partials<double> p = partials(f, q);
            for (std::size_t w = 0; w < spec.total_dim(); ++w) {
                const TensorD fd = extcalc::testing::fd_partial(f, q, w);
                const double got = extcalc::detail::coeff(p.lifted[0].d, w);
                const double scale = std::max(1.0, std::abs(fd[0]));
                CHECK(std::abs(got - fd[0]) / scale < 1e-5);
            }
        }
    }
}

TEST_CASE("pointwise algebra") {
    BundleSpec spec{2, {Valence{1, 0}}};
    Rng rng(23);
    const ExtField x = make_expr_field(spec, Valence{1, 0},
                                       {{0, parse("x1*T1_{1;}")}, {1, parse("x2+T1_{2;}")}});
    const ExtField zero = make_zero_field(spec, Valence{1, 0});

    SUBCASE("f + 0 = f at random points") {
        const ExtField sum = add_fields(x, zero);
        for (int trial = 0; trial < 20; ++trial) {
            const FiberPointD q = extcalc::testing::random_point(spec, rng);
            CHECK(max_abs_diff(sum.eval(q), x.eval(q)) == 0.0);
        }
    }

    SUBCASE("degenerate operator via contraction of a product") {
        // C(S (x) X) with S = identity reproduces X
        const ExtField S = make_constant_field(spec, TensorD::identity(2));
        const ExtField sx = contract_field(product_fields(S, x), 1, 0);
        const FiberPointD q = extcalc::testing::random_point(spec, rng);
        CHECK(max_abs_diff(sx.eval(q), x.eval(q)) < 1e-15);
    }

    SUBCASE("associativity and distributivity at random points") {
        const ExtField a = make_expr_field(spec, Valence{0, 0}, {{0, parse("x1+T1_{2;}")}});
        const ExtField b = make_expr_field(spec, Valence{0, 0}, {{0, parse("x2*T1_{1;}")}});
        const ExtField c = make_expr_field(spec, Valence{0, 0}, {{0, parse("x1*x2")}});
        for (int trial = 0; trial < 20; ++trial) {
            const FiberPointD q = extcalc::testing::random_point(spec, rng);
            const double av = a.eval(q)[0], bv = b.eval(q)[0], cv = c.eval(q)[0];
            const double assoc = product_fields(product_fields(a, b), c).eval(q)[0];
            CHECK(std::abs(assoc - av * bv * cv) < 1e-12);
            const double dist =
                product_fields(a, add_fields(b, c)).eval(q)[0];
            CHECK(std::abs(dist - av * (bv + cv)) < 1e-12);
        }
    }

    SUBCASE("Leibniz rule for partials of a product closure") {
        const ExtField g = make_expr_field(spec, Valence{0, 1},
                                           {{0, parse("sin(x2)+T1_{1;}")}, {1, parse("x1*T1_{2;}")}});
        const ExtField prod = product_fields(x, g);
        for (int trial = 0; trial < 10; ++trial) {
            const FiberPointD q = extcalc::testing::random_point(spec, rng);
            const Partials<double> px = partials(x, q);
            const Partials<double> pg = partials(g, q);
            const Partials<double> pp = partials(prod, q);
            for (std::size_t w = 0; w < spec.total_dim(); ++w) {
                for (std::size_t i = 0; i < 2; ++i)
                    for (std::size_t j = 0; j < 2; ++j) {
                        const double want =
                            extcalc::detail::coeff(px.lifted[i].d, w) * pg.lifted[j].v +
                            px.lifted[i].v * extcalc::detail::coeff(pg.lifted[j].d, w);
                        CHECK(std::abs(extcalc::detail::coeff(pp.lifted[i * 2 + j].d, w) - want) <
                              1e-9);
                    }
            }
        }
    }
}

TEST_CASE("EM lagrangian fixture evaluates to 1/(8 pi) at E=(1,0,0), H=0") {
    BundleSpec spec{4, {Valence{2, 0}}};
    const ExtField L = em_lagrangian_field(spec);
    FiberPointD q = FiberPointD::zero(spec);
    q.args[0] = em_field_strength(1, 0, 0, 0, 0, 0);
    const double got = L.eval(q)[0];
    CHECK(got == doctest::Approx(1.0 / (8 * 3.14159265358979323846)).epsilon(1e-12));
    CHECK(got == doctest::Approx(em_lagrangian_oracle(q.args[0])).epsilon(1e-12));

    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        q.args[0] = em_field_strength(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(),
                                      rng.uniform(), rng.uniform());
        CHECK(L.eval(q)[0] == doctest::Approx(em_lagrangian_oracle(q.args[0])).epsilon(1e-11));
    }
}

TEST_CASE("tensoriality certifier") {
    BundleSpec spec{2, {Valence{1, 0}}};
    const Transition t = cart_to_polar();
    Rng rng(37);
    std::vector<FiberPointD> probes;
    for (int i = 0; i < 15; ++i) {
        FiberPointD q = extcalc::testing::random_point(spec, rng);
        q.base = {rng.uniform(0.4, 2.5), rng.uniform(-1.5, 1.5)};
        probes.push_back(q);
    }

    SUBCASE("chart-invariant scalar built from a covector contraction") {
        // omega = dx1 in cart components; contracted with the native vector
        const ExtField psi_cart =
            make_expr_field(spec, Valence{0, 0}, {{0, parse("T1_{1;}")}});
        const ExtField psi_polar = make_expr_field(
            spec, Valence{0, 0},
            {{0, parse("cos(x2)*T1_{1;} - x1*sin(x2)*T1_{2;}")}});
        const auto rep = check_tensoriality(psi_cart, psi_polar, t, probes);
        CHECK(rep.max_residual < 1e-9);
    }

    SUBCASE("native fields transform by the fiber law itself") {
        const ExtField nat = make_native_field(spec, 1);
        const auto rep = check_tensoriality(nat, nat, t, probes);
        CHECK(rep.max_residual < 1e-9);
    }

    SUBCASE("transported field passes by construction") {
        const ExtField f = make_expr_field(spec, Valence{1, 1},
                                           {{0, parse("x1+T1_{1;}")},
                                            {1, parse("sin(x2)")},
                                            {2, parse("T1_{2;}*T1_{1;}")},
                                            {3, parse("exp(0.2*x1)")}});
        const ExtField ft = transport_field(f, t, Direction::ToTilde);
        const auto rep = check_tensoriality(f, ft, t, probes);
        CHECK(rep.max_residual < 1e-9);
    }

    SUBCASE("mismatched pair is flagged") {
        const ExtField f = make_expr_field(spec, Valence{0, 0}, {{0, parse("T1_{1;}")}});
        const ExtField f2 = make_expr_field(
            spec, Valence{0, 0},
            {{0, parse("2*(cos(x2)*T1_{1;} - x1*sin(x2)*T1_{2;})")}});
        const auto rep = check_tensoriality(f, f2, t, probes);
        CHECK(rep.max_residual > 0.01);
    }
}

TEST_CASE("depth limit reports cleanly") {
    BundleSpec spec{1, {}};
    const ExtField f = make_expr_field(spec, Valence{0, 0}, {{0, parse("x1^3")}});
    Rng rng(3);
    FiberPointD q;
    q.base = {0.5};
    // three lift levels are supported
    const auto l1 = eval_lifted(f, q);
    (void)l1;
    const auto q1 = lift_point(spec, q);
    const auto q2 = lift_point(spec, q1);
    const auto l3 = eval_lifted(f, q2);
    (void)l3;
    const auto q3 = lift_point(spec, q2);
    CHECK_THROWS_AS(eval_lifted(f, q3), DepthLimit);
}

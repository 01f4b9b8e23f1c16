#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "extcalc/multitensor.hpp"
#include "test_rng.hpp"

using namespace extcalc;

namespace {

TensorD random_tensor(extcalc::testing::Rng& rng, int n, Valence v, bool integers = false) {
    TensorD t(n, v);
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = integers ? static_cast<double>(rng.uniform_int(-4, 4)) : rng.uniform();
    return t;
}

// explicit triple-loop contraction, kept independent of Tensor's slot
// arithmetic on purpose
TensorD oracle_contract_21_slot10(const TensorD& a) {
    // valence (2,1), contract upper slot 1 with lower slot 0 -> (1,0)
    const int n = a.dim();
    TensorD out(n, Valence{1, 0});
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k)
            sum += a[(static_cast<std::size_t>(i) * n + k) * n + k];
        out[static_cast<std::size_t>(i)] = sum;
    }
    return out;
}

}  // namespace

TEST_CASE("add") {
    TensorD a(2, Valence{1, 0}, {1, 2});
    CHECK(add(a, TensorD(2, Valence{1, 0}, {0, 0})).components() == std::vector<double>{1, 2});
    CHECK(add(a, TensorD(2, Valence{1, 0}, {3, 4})).components() == std::vector<double>{4, 6});
    CHECK_THROWS_AS(add(a, TensorD(2, Valence{0, 1}, {1, 1})), ShapeMismatch);
    CHECK_THROWS_AS(add(a, TensorD(3, Valence{1, 0}, {1, 1, 1})), ShapeMismatch);

    extcalc::testing::Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.uniform_int(1, 3);
        const Valence v{rng.uniform_int(0, 2), rng.uniform_int(0, 2)};
        const TensorD x = random_tensor(rng, n, v);
        const TensorD y = random_tensor(rng, n, v);
        CHECK(max_abs_diff(add(x, y), add(y, x)) == 0.0);  // commutativity, exact
    }
}

TEST_CASE("scale") {
    TensorD a(2, Valence{1, 0}, {1, 2});
    CHECK(scale(1.0, a).components() == a.components());
    CHECK(scale(0.0, a).components() == std::vector<double>{0, 0});
    CHECK(scale(2.0, a).components() == std::vector<double>{2, 4});
}

TEST_CASE("tensor_product") {
    TensorD s = TensorD::scalar(2, 2.0);
    TensorD v(2, Valence{1, 0}, {1, 3});
    CHECK(tensor_product(s, v).components() == std::vector<double>{2, 6});

    TensorD e0(2, Valence{1, 0}, {1, 0});
    TensorD f1(2, Valence{0, 1}, {0, 1});
    const TensorD p = tensor_product(e0, f1);
    CHECK(p.valence() == Valence{1, 1});
    CHECK(p[p.flatten({0, 1})] == 1.0);
    CHECK(p[p.flatten({0, 0})] == 0.0);
    CHECK(p[p.flatten({1, 1})] == 0.0);

    // contracting identity x over the fresh pair reproduces x
    extcalc::testing::Rng rng(3);
    const TensorD x = random_tensor(rng, 3, Valence{1, 1});
    const TensorD idx = tensor_product(TensorD::identity(3), x);
    // product slots: uppers (id, x), lowers (id, x); pair id's lower with x's upper
    const TensorD back = contract(idx, 1, 0);
    CHECK(max_abs_diff(back, x) == 0.0);

    CHECK_THROWS_AS(tensor_product(TensorD(2, Valence{1, 0}), TensorD(3, Valence{1, 0})),
                    ShapeMismatch);
}

TEST_CASE("contract") {
    CHECK(contract(TensorD::identity(3), 0, 0)[0] == 3.0);

    extcalc::testing::Rng rng(5);
    const TensorD v = random_tensor(rng, 3, Valence{1, 0});
    const TensorD w = random_tensor(rng, 3, Valence{0, 1});
    double dot = 0.0;
    for (int i = 0; i < 3; ++i) dot += v[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    CHECK(contract(tensor_product(v, w), 0, 0)[0] == doctest::Approx(dot).epsilon(1e-15));

    const TensorD a = random_tensor(rng, 3, Valence{2, 1});
    CHECK(max_abs_diff(contract(a, 1, 0), oracle_contract_21_slot10(a)) == 0.0);

    CHECK_THROWS_AS(contract(a, 2, 0), SlotOutOfRange);
    CHECK_THROWS_AS(contract(a, 0, 1), SlotOutOfRange);
    CHECK_THROWS_AS(contract(v, 0, 0), SlotOutOfRange);
}

TEST_CASE("operations are exact on integer inputs") {
    extcalc::testing::Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(1, 3);
        const TensorD a = random_tensor(rng, n, Valence{1, 1}, true);
        const TensorD b = random_tensor(rng, n, Valence{1, 1}, true);
        const TensorD p = tensor_product(a, b);
        const TensorD c = contract(p, 0, 1);  // a's upper against b's lower
        for (std::size_t i = 0; i < c.size(); ++i)
            CHECK(c[i] == static_cast<double>(static_cast<long long>(c[i])));
        const TensorD s = add(scale(3.0, a), b);
        for (std::size_t i = 0; i < s.size(); ++i)
            CHECK(s[i] == static_cast<double>(static_cast<long long>(s[i])));
    }
}

TEST_CASE("contraction commutes with tensor_product for pairs internal to a") {
    extcalc::testing::Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = rng.uniform_int(2, 3);
        const TensorD a = random_tensor(rng, n, Valence{1, 1});
        const TensorD b = random_tensor(rng, n, Valence{1, 1});
        // contract a's own pair, before vs after taking the product with b
        const TensorD lhs = tensor_product(contract(a, 0, 0), b);
        const TensorD rhs = contract(tensor_product(a, b), 0, 0);
        CHECK(max_abs_diff(lhs, rhs) < 1e-14);
    }
}

TEST_CASE("flat and multi index round trip") {
    for (int n = 1; n <= 4; ++n)
        for (int r = 0; r <= 2; ++r)
            for (int s = 0; s + r <= 4 && s <= 2; ++s) {
                TensorD t(n, Valence{r, s});
                for (std::size_t f = 0; f < t.size(); ++f) {
                    CHECK(t.flatten(t.unflatten(f)) == f);
                    for (int p = 0; p < r + s; ++p) CHECK(t.digit(f, p) == t.unflatten(f)[p]);
                }
            }
}

TEST_CASE("degenerate_action matches explicit slot loops") {
    extcalc::testing::Rng rng(31);
    const int n = 3;
    const TensorD A = random_tensor(rng, n, Valence{1, 1});
    const TensorD x = random_tensor(rng, n, Valence{2, 1});
    const TensorD got = degenerate_action(A, x);
    // oracle: +A on two upper slots, -A^T on the lower one
    TensorD want(n, Valence{2, 1});
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int w = 0; w < n; ++w) {
                    acc += A[static_cast<std::size_t>(i1) * n + w] * x[x.flatten({w, i2, j})];
                    acc += A[static_cast<std::size_t>(i2) * n + w] * x[x.flatten({i1, w, j})];
                    acc -= A[static_cast<std::size_t>(w) * n + j] * x[x.flatten({i1, i2, w})];
                }
                want[want.flatten({i1, i2, j})] = acc;
            }
    CHECK(max_abs_diff(got, want) < 1e-15);

    // scalars are annihilated
    CHECK(degenerate_action(A, TensorD::scalar(n, 5.0))[0] == 0.0);
}

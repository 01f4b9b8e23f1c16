#ifndef EXTCALC_TESTFIELDS_HPP
#define EXTCALC_TESTFIELDS_HPP

// Seeded polynomial test fields: total degree <= 2 in the base coordinates
// and <= 1 in the fiber components, coefficients uniform in [-1, 1]. Rich
// enough to excite every term of the commutation relations while staying
// smooth everywhere.

#include <random>
#include <vector>

#include "extcalc/connection.hpp"
#include "extcalc/curvature.hpp"
#include "extcalc/extfield.hpp"

namespace extcalc {

namespace impls {

class PolyFieldImpl final : public FieldBase<PolyFieldImpl> {
public:
    struct Component {
        double c0 = 0.0;
        std::vector<double> lin;            // per base coordinate
        std::vector<double> quad;           // packed upper triangle over base
        std::vector<double> fiber;          // per fiber coordinate
        std::vector<double> cross;          // [i * fiber_dim + u]: x_i * T_u
    };

    PolyFieldImpl(BundleSpec spec, Valence val, std::vector<Component> comps)
        : spec_(std::move(spec)), val_(val), comps_(std::move(comps)) {}

    template <class S>
    Tensor<S> evalT(const FiberPoint<S>& q) const {
        validate_point(spec_, q);
        const std::vector<S> env = q.flat();
        const std::size_t n = static_cast<std::size_t>(spec_.n);
        const std::size_t fd = spec_.fiber_dim();
        Tensor<S> out(spec_.n, val_);
        for (std::size_t c = 0; c < comps_.size(); ++c) {
            const Component& k = comps_[c];
            S acc = S(k.c0);
            for (std::size_t i = 0; i < n; ++i) acc = acc + env[i] * k.lin[i];
            std::size_t t = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i; j < n; ++j, ++t)
                    acc = acc + env[i] * env[j] * k.quad[t];
            for (std::size_t u = 0; u < fd; ++u) acc = acc + env[n + u] * k.fiber[u];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t u = 0; u < fd; ++u)
                    acc = acc + env[i] * env[n + u] * k.cross[i * fd + u];
            out[c] = acc;
        }
        return out;
    }

private:
    BundleSpec spec_;
    Valence val_;
    std::vector<Component> comps_;
};

}  // namespace impls

struct PolyOptions {
    bool base_quadratic = true;
    bool fiber_linear = true;    // include T-linear terms
    bool cross_terms = true;     // include x*T terms
    double amplitude = 1.0;
};

inline ExtField make_poly_field(const BundleSpec& spec, Valence val, std::mt19937_64& rng,
                                const PolyOptions& opt = {}) {
    std::uniform_real_distribution<double> u(-opt.amplitude, opt.amplitude);
    const std::size_t n = static_cast<std::size_t>(spec.n);
    const std::size_t fd = spec.fiber_dim();
    const std::size_t count = int_power(n, val.rank());
    std::vector<impls::PolyFieldImpl::Component> comps(count);
    for (auto& k : comps) {
        k.c0 = u(rng);
        k.lin.resize(n);
        for (auto& v : k.lin) v = u(rng);
        k.quad.assign(n * (n + 1) / 2, 0.0);
        if (opt.base_quadratic)
            for (auto& v : k.quad) v = u(rng);
        k.fiber.assign(fd, 0.0);
        if (opt.fiber_linear)
            for (auto& v : k.fiber) v = u(rng);
        k.cross.assign(n * fd, 0.0);
        if (opt.cross_terms)
            for (auto& v : k.cross) v = u(rng);
    }
    return ExtField(spec, val,
                    std::make_shared<impls::PolyFieldImpl>(spec, val, std::move(comps)));
}

/// Random connection with polynomial coefficients, degree <= 1 in the fiber
/// components when `fiber_dependent` is set.
inline ExtendedConnection make_poly_connection(const BundleSpec& spec, std::mt19937_64& rng,
                                               bool fiber_dependent = true,
                                               double amplitude = 0.5) {
    PolyOptions opt;
    opt.amplitude = amplitude;
    opt.fiber_linear = fiber_dependent;
    opt.cross_terms = fiber_dependent;
    return make_connection(make_poly_field(spec, Valence{1, 2}, rng, opt));
}

/// Directions, operands and degenerate pair for the commutator harness.
inline CommutatorTestSet make_commutator_set(const BundleSpec& spec, std::mt19937_64& rng) {
    CommutatorTestSet set;
    set.scalar = make_poly_field(spec, Valence{0, 0}, rng);
    set.vector = make_poly_field(spec, Valence{1, 0}, rng);
    set.covector = make_poly_field(spec, Valence{0, 1}, rng);
    set.dirX = make_poly_field(spec, Valence{1, 0}, rng);
    set.dirY = make_poly_field(spec, Valence{1, 0}, rng);
    for (const Valence& v : spec.types) set.dirT.push_back(make_poly_field(spec, v, rng));
    set.S1 = make_poly_field(spec, Valence{1, 1}, rng);
    set.S2 = make_poly_field(spec, Valence{1, 1}, rng);
    return set;
}

inline FiberPointD random_fiber_point(const BundleSpec& spec, std::mt19937_64& rng,
                                      double base_lo = -1.0, double base_hi = 1.0) {
    std::uniform_real_distribution<double> ub(base_lo, base_hi);
    std::uniform_real_distribution<double> uf(-1.0, 1.0);
    FiberPointD q;
    q.base.reserve(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) q.base.push_back(ub(rng));
    for (const Valence& v : spec.types) {
        Tensor<double> t(spec.n, v);
        for (std::size_t c = 0; c < t.size(); ++c) t[c] = uf(rng);
        q.args.push_back(std::move(t));
    }
    return q;
}

}  // namespace extcalc

#endif

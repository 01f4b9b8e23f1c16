#include "extcalc/suites.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "extcalc/testfields.hpp"

namespace extcalc {

const char* kVersion = "0.1.0";

namespace {

const std::vector<std::pair<std::string, double>> kDefaults = {
    {"transition.inverse", 1e-9},
    {"transition.st-identity", 1e-9},
    {"transition.theta-symmetry", 1e-10},
    {"transition.theta-alt", 1e-9},
    {"transition.theta-duality", 1e-9},
    {"tensoriality.native", 1e-9},
    {"tensoriality.field", 1e-8},
    {"derivation.linearity", 1e-9},
    {"derivation.leibniz", 1e-9},
    {"derivation.contraction", 1e-9},
    {"derivation.uniqueness", 1e-10},
    {"derivation.transform-roundtrip", 1e-9},
    {"covariant.natives-annulled", 1e-12},
    {"covariant.vertical-native", 0.0},
    {"covariant.homomorphism", 1e-10},
    {"covariant.scaled-direction", 1e-9},
    {"covariant.degenerate-scalar", 0.0},
    {"covariant.connection-transform", 1e-8},
    {"covariant.gji-tensor-law", 1e-9},
    {"covariant.components-law", 1e-8},
    {"covariant.lift-transform", 1e-8},
    {"covariant.connection-roundtrip", 1e-9},
    {"covariant.nabla-tensoriality", 1e-6},
    {"covariant.horizontal-difference", 1e-10},
    {"curvature.torsion-antisymmetry", 1e-12},
    {"curvature.r-antisymmetry", 1e-10},
    {"curvature.dynamic-fd", 1e-5},
    {"curvature.theta-route", 1e-10},
    {"curvature.omega-route", 1e-10},
    {"15.1", 1e-10},
    {"15.3", 1e-9},
    {"15.5", 1e-6},
    {"15.13", 1e-6},
    {"16.1", 1e-10},
    {"16.2", 1e-5},
    {"16.3", 1e-5},
    {"16.4", 1e-5},
    {"16.5", 1e-5},
    {"16.6", 1e-5},
    {"16.7", 1e-5},
    {"decomposition.reconstruct", 1e-9},
    {"section.invariance", 0.0},
    {"17.9", 1e-6},
    {"17.9-random", 1e-6},
    {"17.9-sensitivity-standard", 0.0},
    {"17.9-sensitivity-spatial", 0.0},
    {"17.9-sensitivity-vertical", 0.0},
};

struct Ctx {
    const Manifest& m;
    std::uint64_t seed;
    int probes;
    std::map<std::string, double> tol;

    double tolerance(const std::string& id) const {
        const auto it = tol.find(id);
        if (it != tol.end()) return it->second;
        for (const auto& [k, v] : kDefaults)
            if (k == id) return v;
        return 1e-9;
    }
};

void add_entry(SuiteResult& out, const Ctx& ctx, const std::string& id, const std::string& probe,
               double residual) {
    CheckEntry e;
    e.id = id;
    e.probe = probe;
    e.residual = residual;
    e.tolerance = ctx.tolerance(id);
    e.pass = residual <= e.tolerance;
    out.entries.push_back(std::move(e));
}

template <class F>
void guarded(SuiteResult& out, const Ctx& ctx, const std::string& id, const std::string& probe,
             F&& body) {
    try {
        body();
    } catch (const std::exception& ex) {
        CheckEntry e;
        e.id = id;
        e.probe = probe;
        e.tolerance = ctx.tolerance(id);
        e.pass = false;
        e.error = ex.what();
        out.entries.push_back(std::move(e));
    }
}

std::vector<FiberPointD> chart_probes(const Ctx& ctx, const Chart& chart, std::uint64_t salt) {
    std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + salt);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<FiberPointD> out;
    const std::size_t base_count = chart.sample_points.size();
    for (int i = 0; i < ctx.probes; ++i) {
        FiberPointD q;
        q.base = chart.sample_points[static_cast<std::size_t>(i) % base_count];
        for (const Valence& v : ctx.m.spec.types) {
            TensorD t(ctx.m.spec.n, v);
            for (std::size_t c = 0; c < t.size(); ++c) t[c] = u(rng);
            q.args.push_back(std::move(t));
        }
        out.push_back(std::move(q));
    }
    return out;
}

const Chart& chart_of(const Manifest& m, const std::string& name) { return *m.find_chart(name); }

// ---------------------------------------------------------------------------

void suite_transitions(SuiteResult& out, const Ctx& ctx) {
    for (const Transition& t : ctx.m.transitions) {
        const Chart& fc = chart_of(ctx.m, t.from());
        for (std::size_t i = 0; i < fc.sample_points.size(); ++i) {
            const std::vector<double>& p = fc.sample_points[i];
            const std::string probe = t.from() + "->" + t.to() + "#" + std::to_string(i);
            guarded(out, ctx, "transition.st-identity", probe, [&] {
                const TransitionData td = transition_data(t, std::span<const double>(p));
                const int n = td.n;

                double inv = 0.0;
                const std::vector<double> back = t.backward(std::span<const double>(td.image));
                for (int k = 0; k < n; ++k) inv = std::max(inv, std::abs(back[static_cast<std::size_t>(k)] - p[static_cast<std::size_t>(k)]));
                add_entry(out, ctx, "transition.inverse", probe, inv);

                double st = 0.0;
                for (int i2 = 0; i2 < n; ++i2)
                    for (int j = 0; j < n; ++j) {
                        double a = 0.0, b = 0.0;
                        for (int h = 0; h < n; ++h) {
                            a += td.Sm(i2, h) * td.Tm(h, j);
                            b += td.Tm(i2, h) * td.Sm(h, j);
                        }
                        const double want = i2 == j ? 1.0 : 0.0;
                        st = std::max(st, std::max(std::abs(a - want), std::abs(b - want)));
                    }
                add_entry(out, ctx, "transition.st-identity", probe, st);

                double sym = 0.0;
                for (int k = 0; k < n; ++k)
                    for (int i2 = 0; i2 < n; ++i2)
                        for (int j = 0; j < n; ++j) {
                            sym = std::max(sym, std::abs(td.th(k, i2, j) - td.th(k, j, i2)));
                            sym = std::max(sym, std::abs(td.tht(k, i2, j) - td.tht(k, j, i2)));
                        }
                add_entry(out, ctx, "transition.theta-symmetry", probe, sym);

                const std::vector<double> alt = theta_tilde_alt(td);
                double altres = 0.0;
                for (std::size_t c = 0; c < alt.size(); ++c)
                    altres = std::max(altres, std::abs(alt[c] - td.theta_tilde[c]));
                add_entry(out, ctx, "transition.theta-alt", probe, altres);

                add_entry(out, ctx, "transition.theta-duality", probe,
                          check_theta_duality(td).max_residual());
            });
        }
    }
}

void suite_tensoriality(SuiteResult& out, const Ctx& ctx) {
    for (const Transition& t : ctx.m.transitions) {
        const std::vector<FiberPointD> probes = chart_probes(ctx, chart_of(ctx.m, t.from()), 11);
        for (int P = 1; P <= ctx.m.spec.slots(); ++P) {
            const std::string probe = t.from() + "->" + t.to() + " T[" + std::to_string(P) + "]";
            guarded(out, ctx, "tensoriality.native", probe, [&] {
                const ExtField nat = make_native_field(ctx.m.spec, P);
                add_entry(out, ctx, "tensoriality.native", probe,
                          check_tensoriality(nat, nat, t, probes).max_residual);
            });
        }
        for (const auto& [name, f] : ctx.m.fields) {
            const auto fu = f.by_chart.find(t.from());
            const auto ft = f.by_chart.find(t.to());
            if (fu == f.by_chart.end() || ft == f.by_chart.end()) continue;
            const std::string probe = t.from() + "->" + t.to() + " " + name;
            guarded(out, ctx, "tensoriality.field", probe, [&] {
                add_entry(out, ctx, "tensoriality.field", probe,
                          check_tensoriality(fu->second, ft->second, t, probes).max_residual);
            });
        }
    }
}

void suite_derivation_axioms(SuiteResult& out, const Ctx& ctx) {
    const BundleSpec& spec = ctx.m.spec;
    std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + 23);
    const std::vector<FiberPointD> probes = chart_probes(ctx, ctx.m.charts.front(), 23);
    const Valence valences[] = {Valence{0, 0}, Valence{1, 0}, Valence{0, 1}, Valence{1, 1}};

    for (int trial = 0; trial < ctx.probes; ++trial) {
        std::vector<ExtField> zp;
        for (const Valence& v : spec.types) zp.push_back(make_poly_field(spec, v, rng));
        const DerivationComponents d = make_derivation(
            spec, make_poly_field(spec, Valence{1, 0}, rng), std::move(zp),
            make_poly_field(spec, Valence{1, 1}, rng));
        const Valence vf = valences[static_cast<std::size_t>(trial) % 4];
        const ExtField f = make_poly_field(spec, vf, rng);
        const ExtField g = make_poly_field(spec, Valence{1, 1}, rng);
        const FiberPointD& q = probes[static_cast<std::size_t>(trial) % probes.size()];
        const std::string probe = "#" + std::to_string(trial);

        guarded(out, ctx, "derivation.linearity", probe, [&] {
            const TensorD a = apply_derivation(d, add_fields(f, scale_field(2.5, f))).eval(q);
            const TensorD b = scale(3.5, apply_derivation(d, f).eval(q));
            add_entry(out, ctx, "derivation.linearity", probe, max_abs_diff(a, b));
        });
        guarded(out, ctx, "derivation.leibniz", probe, [&] {
            const TensorD a = apply_derivation(d, product_fields(f, g)).eval(q);
            const TensorD b = add(tensor_product(apply_derivation(d, f).eval(q), g.eval(q)),
                                  tensor_product(f.eval(q), apply_derivation(d, g).eval(q)));
            add_entry(out, ctx, "derivation.leibniz", probe, max_abs_diff(a, b));
        });
        guarded(out, ctx, "derivation.contraction", probe, [&] {
            const TensorD a = apply_derivation(d, contract_field(g, 0, 0)).eval(q);
            const TensorD b = contract(apply_derivation(d, g).eval(q), 0, 0);
            add_entry(out, ctx, "derivation.contraction", probe, max_abs_diff(a, b));
        });
        guarded(out, ctx, "derivation.uniqueness", probe, [&] {
            // rebuild the components from the action on coordinate scalars,
            // fiber scalars and constant vectors
            const std::vector<std::string> names = bundle_var_names(spec);
            const DerivationValuesD direct = eval_derivation(d, q);
            double res = 0.0;
            for (int i = 0; i < spec.n; ++i) {
                const ExtField xi = make_expr_field(spec, Valence{0, 0},
                                                    {{0, parse(names[static_cast<std::size_t>(i)])}});
                res = std::max(res, std::abs(apply_derivation(d, xi).eval(q)[0] -
                                             direct.Z[static_cast<std::size_t>(i)]));
            }
            for (std::size_t P = 0; P < direct.ZP.size(); ++P) {
                const std::size_t off =
                    static_cast<std::size_t>(spec.n) + spec.slot_offset(static_cast<int>(P));
                for (std::size_t u = 0; u < direct.ZP[P].size(); ++u) {
                    const ExtField tv =
                        make_expr_field(spec, Valence{0, 0}, {{0, parse(names[off + u])}});
                    res = std::max(res,
                                   std::abs(apply_derivation(d, tv).eval(q)[0] - direct.ZP[P][u]));
                }
            }
            for (int k = 0; k < spec.n; ++k) {
                TensorD ek(spec.n, Valence{1, 0});
                ek[static_cast<std::size_t>(k)] = 1.0;
                const TensorD img = apply_derivation(d, make_constant_field(spec, ek)).eval(q);
                for (int i = 0; i < spec.n; ++i)
                    res = std::max(res, std::abs(img[static_cast<std::size_t>(i)] -
                                                 direct.G[static_cast<std::size_t>(i) * spec.n + k]));
            }
            add_entry(out, ctx, "derivation.uniqueness", probe, res);
        });
    }

    // manifest derivations: transform round trip over every transition
    for (const auto& [name, md] : ctx.m.derivations) {
        for (const Transition& t : ctx.m.transitions) {
            if (t.from() != md.chart) continue;
            const std::vector<FiberPointD> tp = chart_probes(ctx, chart_of(ctx.m, t.from()), 29);
            for (std::size_t i = 0; i < tp.size(); ++i) {
                const std::string probe = name + " " + t.from() + "->" + t.to() + "#" +
                                          std::to_string(i);
                guarded(out, ctx, "derivation.transform-roundtrip", probe, [&] {
                    const DerivationValuesD v = eval_derivation(md.components, tp[i]);
                    const DerivationValuesD vt = transform_derivation_values(
                        ctx.m.spec, t, tp[i], v, Direction::ToTilde);
                    const DerivationValuesD back = transform_derivation_values(
                        ctx.m.spec, t, tp[i], vt, Direction::FromTilde);
                    double res = std::max(max_abs_diff(back.Z, v.Z), max_abs_diff(back.G, v.G));
                    for (std::size_t P = 0; P < v.ZP.size(); ++P)
                        res = std::max(res, max_abs_diff(back.ZP[P], v.ZP[P]));
                    add_entry(out, ctx, "derivation.transform-roundtrip", probe, res);
                });
            }
        }
    }
}

void suite_covariant(SuiteResult& out, const Ctx& ctx) {
    const BundleSpec& spec = ctx.m.spec;
    std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + 31);

    for (const auto& [chartname, conn] : ctx.m.connection) {
        const std::vector<FiberPointD> probes = chart_probes(ctx, chart_of(ctx.m, chartname), 31);
        const std::string tag = chartname;

        guarded(out, ctx, "covariant.natives-annulled", tag, [&] {
            double res = 0.0;
            for (int P = 1; P <= spec.slots(); ++P) {
                const ExtField img = spatial_covariant_differential(conn, make_native_field(spec, P));
                for (const FiberPointD& q : probes) res = std::max(res, max_abs(img.eval(q)));
            }
            add_entry(out, ctx, "covariant.natives-annulled", tag, res);
        });

        guarded(out, ctx, "covariant.vertical-native", tag, [&] {
            double res = 0.0;
            for (int P = 1; P <= spec.slots(); ++P) {
                const ExtField Y =
                    make_poly_field(spec, spec.types[static_cast<std::size_t>(P - 1)], rng);
                for (int R = 1; R <= spec.slots(); ++R) {
                    const ExtField img = vertical_derivative(P, Y, make_native_field(spec, R));
                    for (const FiberPointD& q : probes) {
                        if (P == R)
                            res = std::max(res, max_abs_diff(img.eval(q), Y.eval(q)));
                        else
                            res = std::max(res, max_abs(img.eval(q)));
                    }
                }
            }
            add_entry(out, ctx, "covariant.vertical-native", tag, res);
        });

        guarded(out, ctx, "covariant.homomorphism", tag, [&] {
            const CovariantComponents c = spatial_components(conn);
            const ExtField f = make_poly_field(spec, Valence{1, 1}, rng);
            const ExtField Y = make_poly_field(spec, Valence{1, 0}, rng);
            const ExtField phi = make_poly_field(spec, Valence{0, 0}, rng);
            const ExtField lhs = covariant_apply(c, scale_field(phi, Y), f);
            const ExtField rhs = scale_field(phi, covariant_apply(c, Y, f));
            double res = 0.0;
            for (const FiberPointD& q : probes)
                res = std::max(res, max_abs_diff(lhs.eval(q), rhs.eval(q)));
            add_entry(out, ctx, "covariant.homomorphism", tag, res);
        });

        guarded(out, ctx, "covariant.scaled-direction", tag, [&] {
            const DerivationComponents d =
                spatial_derivation(conn, make_poly_field(spec, Valence{1, 0}, rng));
            const ExtField X = make_poly_field(spec, Valence{1, 0}, rng);
            const ExtField phi = make_poly_field(spec, Valence{0, 0}, rng);
            const ExtField lhs = apply_derivation(d, scale_field(phi, X));
            const ExtField rhs = add_fields(scale_field(apply_derivation(d, phi), X),
                                            scale_field(phi, apply_derivation(d, X)));
            double res = 0.0;
            for (const FiberPointD& q : probes)
                res = std::max(res, max_abs_diff(lhs.eval(q), rhs.eval(q)));
            add_entry(out, ctx, "covariant.scaled-direction", tag, res);
        });

        guarded(out, ctx, "covariant.degenerate-scalar", tag, [&] {
            const CovariantComponents c =
                degenerate_covariant(make_poly_field(spec, Valence{1, 2}, rng));
            const ExtField phi = make_poly_field(spec, Valence{0, 0}, rng);
            const ExtField dir = make_poly_field(spec, Valence{1, 0}, rng);
            double res = 0.0;
            for (const FiberPointD& q : probes)
                res = std::max(res, max_abs(covariant_apply(c, dir, phi).eval(q)));
            add_entry(out, ctx, "covariant.degenerate-scalar", tag, res);
        });

        guarded(out, ctx, "covariant.horizontal-difference", tag, [&] {
            const ExtendedConnection other = make_poly_connection(spec, rng);
            const ExtField phi = make_poly_field(
                spec, Valence{0, 0}, rng, PolyOptions{true, false, false, 1.0});
            const ExtField diff = sub_fields(spatial_covariant_differential(conn, phi),
                                             spatial_covariant_differential(other, phi));
            double res = 0.0;
            for (const FiberPointD& q : probes) res = std::max(res, max_abs(diff.eval(q)));
            add_entry(out, ctx, "covariant.horizontal-difference", tag, res);
        });
    }

    // chart-pair checks over every transition with a connection on the source
    for (const Transition& t : ctx.m.transitions) {
        const auto cu = ctx.m.connection.find(t.from());
        if (cu == ctx.m.connection.end()) continue;
        const std::vector<FiberPointD> probes = chart_probes(ctx, chart_of(ctx.m, t.from()), 37);
        const std::string tag = t.from() + "->" + t.to();
        const ExtendedConnection& conn = cu->second;
        const auto ct = ctx.m.connection.find(t.to());

        if (ct != ctx.m.connection.end()) {
            guarded(out, ctx, "covariant.connection-transform", tag, [&] {
                double res = 0.0;
                for (const FiberPointD& q : probes) {
                    const FiberPointD qt = transform_fiber_point(spec, t, q, Direction::ToTilde);
                    const TensorD want = transform_connection_values(
                        spec, t, q, conn.gamma.eval(q), Direction::ToTilde);
                    res = std::max(res, max_abs_diff(ct->second.gamma.eval(qt), want));
                }
                add_entry(out, ctx, "covariant.connection-transform", tag, res);
            });
        }

        guarded(out, ctx, "covariant.connection-roundtrip", tag, [&] {
            double res = 0.0;
            for (const FiberPointD& q : probes) {
                const TensorD g = conn.gamma.eval(q);
                const TensorD gt = transform_connection_values(spec, t, q, g, Direction::ToTilde);
                const TensorD back =
                    transform_connection_values(spec, t, q, gt, Direction::FromTilde);
                res = std::max(res, max_abs_diff(back, g));
            }
            add_entry(out, ctx, "covariant.connection-roundtrip", tag, res);
        });

        guarded(out, ctx, "covariant.gji-tensor-law", tag, [&] {
            std::mt19937_64 r2(ctx.seed + 41);
            const CovariantComponents c =
                degenerate_covariant(make_poly_field(spec, Valence{1, 2}, r2));
            double res = 0.0;
            for (const FiberPointD& q : probes) {
                const CovariantValues v = eval_covariant(c, q);
                const CovariantValues vt =
                    transform_covariant_values(spec, t, q, v, Direction::ToTilde);
                const TransitionData td = transition_data(t, std::span<const double>(q.base));
                res = std::max(res, max_abs_diff(vt.Gji, transform_tensor_components(
                                                             v.Gji, td, Direction::ToTilde)));
            }
            add_entry(out, ctx, "covariant.gji-tensor-law", tag, res);
        });

        guarded(out, ctx, "covariant.lift-transform", tag, [&] {
            const ExtendedConnection transported = transport_connection(conn, t, Direction::ToTilde);
            double res = 0.0;
            for (const FiberPointD& q : probes) {
                const FiberPointD qt = transform_fiber_point(spec, t, q, Direction::ToTilde);
                const LiftComponents<double> lc = lift_components(conn, q);
                const std::vector<TensorD> lt =
                    transform_lift_values(spec, t, q, lc.lift, Direction::ToTilde);
                const LiftComponents<double> direct = lift_components(transported, qt);
                for (std::size_t P = 0; P < lt.size(); ++P)
                    res = std::max(res, max_abs_diff(lt[P], direct.lift[P]));
            }
            add_entry(out, ctx, "covariant.lift-transform", tag, res);
        });

        guarded(out, ctx, "covariant.components-law", tag, [&] {
            std::mt19937_64 r2(ctx.seed + 43);
            std::vector<ExtField> zp;
            for (const Valence& v : spec.types)
                zp.push_back(make_poly_field(spec, Valence{v.r, v.s + 1}, r2));
            const CovariantComponents c =
                make_covariant(spec, make_constant_field(spec, TensorD::identity(spec.n)),
                               std::move(zp), make_poly_field(spec, Valence{1, 2}, r2));
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            double res = 0.0;
            const int n = spec.n;
            for (const FiberPointD& q : probes) {
                const CovariantValues v = eval_covariant(c, q);
                const CovariantValues vt =
                    transform_covariant_values(spec, t, q, v, Direction::ToTilde);
                const TransitionData td = transition_data(t, std::span<const double>(q.base));
                TensorD Yt(n, Valence{1, 0});
                for (int i = 0; i < n; ++i) Yt[static_cast<std::size_t>(i)] = u(r2);
                const TensorD Y = transform_tensor_components(Yt, td, Direction::FromTilde);

                const auto contract_cv = [&](const CovariantValues& cv, const TensorD& dir) {
                    DerivationValuesD dv;
                    dv.Z = TensorD(n, Valence{1, 0});
                    dv.G = TensorD(n, Valence{1, 1});
                    for (int i = 0; i < n; ++i) {
                        double acc = 0.0;
                        for (int j = 0; j < n; ++j)
                            acc += cv.Zij[static_cast<std::size_t>(i) * n + j] *
                                   dir[static_cast<std::size_t>(j)];
                        dv.Z[static_cast<std::size_t>(i)] = acc;
                    }
                    for (int k = 0; k < n; ++k)
                        for (int i = 0; i < n; ++i) {
                            double acc = 0.0;
                            for (int j = 0; j < n; ++j)
                                acc += cv.Gji[(static_cast<std::size_t>(k) * n + j) * n + i] *
                                       dir[static_cast<std::size_t>(j)];
                            dv.G[static_cast<std::size_t>(k) * n + i] = acc;
                        }
                    for (std::size_t P = 0; P < cv.ZPj.size(); ++P) {
                        const Valence vp = spec.types[P];
                        TensorD zpP(n, vp);
                        const std::size_t lo = int_power(static_cast<std::size_t>(n), vp.s);
                        const std::size_t up = int_power(static_cast<std::size_t>(n), vp.r);
                        for (std::size_t ub = 0; ub < up; ++ub)
                            for (std::size_t lb = 0; lb < lo; ++lb) {
                                double acc = 0.0;
                                for (int j = 0; j < n; ++j)
                                    acc += cv.ZPj[P][(ub * static_cast<std::size_t>(n) +
                                                      static_cast<std::size_t>(j)) *
                                                         lo +
                                                     lb] *
                                           dir[static_cast<std::size_t>(j)];
                                zpP[ub * lo + lb] = acc;
                            }
                        dv.ZP.push_back(std::move(zpP));
                    }
                    return dv;
                };

                const DerivationValuesD tilded = contract_cv(vt, Yt);
                const DerivationValuesD want = transform_derivation_values(
                    spec, t, q, contract_cv(v, Y), Direction::ToTilde);
                res = std::max(res, max_abs_diff(tilded.Z, want.Z));
                res = std::max(res, max_abs_diff(tilded.G, want.G));
                for (std::size_t P = 0; P < want.ZP.size(); ++P)
                    res = std::max(res, max_abs_diff(tilded.ZP[P], want.ZP[P]));
            }
            add_entry(out, ctx, "covariant.components-law", tag, res);
        });

        guarded(out, ctx, "covariant.nabla-tensoriality", tag, [&] {
            const ExtendedConnection conn_to = ct != ctx.m.connection.end()
                                                   ? ct->second
                                                   : transport_connection(conn, t,
                                                                          Direction::ToTilde);
            double res = 0.0;
            // natives plus every field defined on both charts
            std::vector<std::pair<ExtField, ExtField>> pairs;
            for (int P = 1; P <= spec.slots(); ++P)
                pairs.emplace_back(make_native_field(spec, P), make_native_field(spec, P));
            for (const auto& [name, f] : ctx.m.fields) {
                const auto fu = f.by_chart.find(t.from());
                const auto ft = f.by_chart.find(t.to());
                if (fu != f.by_chart.end() && ft != f.by_chart.end())
                    pairs.emplace_back(fu->second, ft->second);
            }
            for (const auto& [f_unt, f_til] : pairs) {
                const ExtField g_unt = spatial_covariant_differential(conn, f_unt);
                const ExtField g_til = spatial_covariant_differential(conn_to, f_til);
                res = std::max(res, check_tensoriality(g_unt, g_til, t, probes).max_residual);
            }
            add_entry(out, ctx, "covariant.nabla-tensoriality", tag, res);
        });
    }
}

void suite_curvature(SuiteResult& out, const Ctx& ctx) {
    const BundleSpec& spec = ctx.m.spec;
    std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + 47);

    for (const auto& [chartname, conn] : ctx.m.connection) {
        const std::vector<FiberPointD> probes = chart_probes(ctx, chart_of(ctx.m, chartname), 47);
        const std::string tag = chartname;
        const int n = spec.n;

        guarded(out, ctx, "curvature.torsion-antisymmetry", tag, [&] {
            const ExtField T = torsion(conn);
            double res = 0.0;
            for (const FiberPointD& q : probes) {
                const TensorD tv = T.eval(q);
                for (int k = 0; k < n; ++k)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            res = std::max(res, std::abs(tv[tv.flatten({k, i, j})] +
                                                         tv[tv.flatten({k, j, i})]));
            }
            add_entry(out, ctx, "curvature.torsion-antisymmetry", tag, res);
        });

        guarded(out, ctx, "curvature.r-antisymmetry", tag, [&] {
            const ExtField R = static_curvature(conn);
            double res = 0.0;
            for (const FiberPointD& q : probes) {
                const TensorD rv = R.eval(q);
                for (int k = 0; k < n; ++k)
                    for (int h = 0; h < n; ++h)
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j)
                                res = std::max(res, std::abs(rv[rv.flatten({k, h, i, j})] +
                                                             rv[rv.flatten({k, h, j, i})]));
            }
            add_entry(out, ctx, "curvature.r-antisymmetry", tag, res);
        });

        guarded(out, ctx, "curvature.dynamic-fd", tag, [&] {
            double res = 0.0;
            for (int P = 1; P <= spec.slots(); ++P) {
                const ExtField D = dynamic_curvature(conn, P);
                const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
                const std::size_t cnt = spec.slot_size(P - 1);
                const std::size_t nkb = int_power(static_cast<std::size_t>(n), vp.s);
                for (std::size_t pi = 0; pi < std::min<std::size_t>(probes.size(), 5); ++pi) {
                    const FiberPointD& q = probes[pi];
                    const TensorD Dv = D.eval(q);
                    for (std::size_t u = 0; u < cnt; ++u) {
                        FiberPointD hi = q, lo = q;
                        const double h = 1e-6;
                        hi.args[static_cast<std::size_t>(P - 1)][u] += h;
                        lo.args[static_cast<std::size_t>(P - 1)][u] -= h;
                        const TensorD ghi = conn.gamma.eval(hi);
                        const TensorD glo = conn.gamma.eval(lo);
                        const std::size_t hb = u / nkb, kb = u % nkb;
                        const std::size_t nhb = int_power(static_cast<std::size_t>(n), vp.r);
                        for (int k = 0; k < n; ++k)
                            for (int j = 0; j < n; ++j)
                                for (int i = 0; i < n; ++i) {
                                    const double fd = (ghi[(static_cast<std::size_t>(k) * n + j) * n +
                                                           i] -
                                                       glo[(static_cast<std::size_t>(k) * n + j) * n +
                                                           i]) /
                                                      (2 * h);
                                    const double got =
                                        Dv[(((static_cast<std::size_t>(k) * nkb + kb) * n +
                                             static_cast<std::size_t>(i)) *
                                                n +
                                            static_cast<std::size_t>(j)) *
                                               nhb +
                                           hb];
                                    res = std::max(res, std::abs(got + fd));
                                }
                    }
                }
            }
            add_entry(out, ctx, "curvature.dynamic-fd", tag, res);
        });

        guarded(out, ctx, "curvature.theta-route", tag, [&] {
            double res = 0.0;
            const ExtField X = make_poly_field(spec, Valence{1, 0}, rng);
            for (int P = 1; P <= spec.slots(); ++P) {
                const ExtField Y =
                    make_poly_field(spec, spec.types[static_cast<std::size_t>(P - 1)], rng);
                const ExtField SfromD =
                    contract_dynamic(dynamic_curvature(conn, P), spec, P, X, Y);
                for (int R = 1; R <= spec.slots(); ++R) {
                    const ExtField U = contract_theta(theta_tensor(conn, P, R), spec, P, R, X, Y);
                    for (const FiberPointD& q : probes) {
                        const TensorD want = scale(
                            -1.0, degenerate_action(SfromD.eval(q),
                                                    q.args[static_cast<std::size_t>(R - 1)]));
                        res = std::max(res, max_abs_diff(U.eval(q), want));
                    }
                }
            }
            add_entry(out, ctx, "curvature.theta-route", tag, res);
        });

        guarded(out, ctx, "curvature.omega-route", tag, [&] {
            double res = 0.0;
            const ExtField X = make_poly_field(spec, Valence{1, 0}, rng);
            const ExtField Y = make_poly_field(spec, Valence{1, 0}, rng);
            const ExtField SfromR = contract_static(static_curvature(conn), X, Y);
            for (int R = 1; R <= spec.slots(); ++R) {
                const ExtField U = contract_omega(omega_tensor(conn, R), spec, R, X, Y);
                for (const FiberPointD& q : probes) {
                    const TensorD want =
                        scale(-1.0, degenerate_action(SfromR.eval(q),
                                                      q.args[static_cast<std::size_t>(R - 1)]));
                    res = std::max(res, max_abs_diff(U.eval(q), want));
                }
            }
            add_entry(out, ctx, "curvature.omega-route", tag, res);
        });
    }
}

void suite_commutators(SuiteResult& out, const Ctx& ctx) {
    const BundleSpec& spec = ctx.m.spec;

    const auto run_one = [&](const ExtendedConnection& conn, const Chart& chart,
                             const std::string& variant, std::uint64_t salt) {
        std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + salt);
        const CommutatorTestSet set = make_commutator_set(spec, rng);
        const std::vector<FiberPointD> probes = chart_probes(ctx, chart, salt + 1);
        try {
            const auto residuals = verify_commutators(conn, set, probes);
            for (const auto& r : residuals)
                add_entry(out, ctx, r.relation,
                          variant + " " + r.detail + " #" + std::to_string(r.probe), r.residual);
        } catch (const std::exception& ex) {
            CheckEntry e;
            e.id = "16.1";
            e.probe = variant;
            e.tolerance = ctx.tolerance(e.id);
            e.pass = false;
            e.error = ex.what();
            out.entries.push_back(std::move(e));
        }
    };

    for (const auto& [chartname, conn] : ctx.m.connection) {
        const Chart& chart = chart_of(ctx.m, chartname);
        run_one(conn, chart, chartname, 53);
        if (spec.slots() > 0) {
            std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + 59);
            run_one(make_poly_connection(spec, rng), chart, chartname + "+fiberG", 61);
        }
    }
}

void suite_decomposition(SuiteResult& out, const Ctx& ctx) {
    const BundleSpec& spec = ctx.m.spec;
    std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + 67);
    if (ctx.m.connection.empty()) return;
    const auto& [chartname, conn] = *ctx.m.connection.begin();
    const std::vector<FiberPointD> probes = chart_probes(ctx, chart_of(ctx.m, chartname), 67);
    const Valence valences[] = {Valence{0, 0}, Valence{1, 0}, Valence{0, 1}, Valence{1, 1}};

    for (int trial = 0; trial < ctx.probes; ++trial) {
        const std::string probe = chartname + " #" + std::to_string(trial);
        guarded(out, ctx, "decomposition.reconstruct", probe, [&] {
            std::vector<ExtField> zp;
            for (const Valence& v : spec.types) zp.push_back(make_poly_field(spec, v, rng));
            const DerivationComponents d = make_derivation(
                spec, make_poly_field(spec, Valence{1, 0}, rng), std::move(zp),
                make_poly_field(spec, Valence{1, 1}, rng));
            const DerivationComponents rebuilt = reconstruct(conn, decompose(d, conn));
            double res = 0.0;
            for (int i = 0; i < 4; ++i) {
                const ExtField f = make_poly_field(spec, valences[static_cast<std::size_t>(i)], rng);
                const FiberPointD& q = probes[static_cast<std::size_t>(trial) % probes.size()];
                res = std::max(res, max_abs_diff(apply_derivation(d, f).eval(q),
                                                 apply_derivation(rebuilt, f).eval(q)));
            }
            add_entry(out, ctx, "decomposition.reconstruct", probe, res);
        });
    }
}

void suite_chainrule(SuiteResult& out, const Ctx& ctx) {
    const BundleSpec& spec = ctx.m.spec;

    for (const ChainRuleJob& job : ctx.m.chainrule) {
        const std::string tag = job.field + "/" + job.section + "/" + job.direction;
        guarded(out, ctx, "17.9", tag, [&] {
            const ExtendedConnection& conn = ctx.m.connection.at(job.chart);
            const ExtField& f = ctx.m.fields.at(job.field).by_chart.at(job.chart);
            const ManifestSection& sec = ctx.m.sections.at(job.section);
            const ExtField& dir = ctx.m.fields.at(job.direction).by_chart.at(job.chart);

            add_entry(out, ctx, "section.invariance", tag,
                      section_invariance_probe(spec, sec.section,
                                               chart_probes(ctx, chart_of(ctx.m, job.chart), 71)));

            const ChainRuleReport rep =
                chain_rule_residual(conn, f, sec.section, dir, job.probes);
            add_entry(out, ctx, "17.9", tag, rep.max_residual);
        });
    }

    // randomized quadruples against the first connection-bearing chart
    if (!ctx.m.connection.empty()) {
        const auto& [chartname, conn] = *ctx.m.connection.begin();
        const Chart& chart = chart_of(ctx.m, chartname);
        std::mt19937_64 rng(ctx.seed * 0x9e3779b97f4a7c15ull + 73);
        PolyOptions baseonly;
        baseonly.fiber_linear = false;
        baseonly.cross_terms = false;

        // term sensitivity on a generic quadruple: every term of the identity
        // must carry weight there
        guarded(out, ctx, "17.9-sensitivity-standard", chartname, [&] {
            const ExtField f = make_poly_field(spec, Valence{1, 0}, rng);
            std::vector<ExtField> sfields;
            for (const Valence& v : spec.types)
                sfields.push_back(make_poly_field(spec, v, rng, baseonly));
            const Section sec = make_section(spec, std::move(sfields));
            const ExtField dir = make_poly_field(spec, Valence{1, 0}, rng, baseonly);
            std::vector<std::vector<double>> sprobes(chart.sample_points.begin(),
                                                     chart.sample_points.end());
            const std::pair<ChainRuleDrop, const char*> drops[] = {
                {ChainRuleDrop::Standard, "17.9-sensitivity-standard"},
                {ChainRuleDrop::Spatial, "17.9-sensitivity-spatial"},
                {ChainRuleDrop::Vertical, "17.9-sensitivity-vertical"},
            };
            for (const auto& [drop, id] : drops) {
                if (drop == ChainRuleDrop::Vertical && spec.slots() == 0) continue;
                const ChainRuleReport broken = chain_rule_residual(conn, f, sec, dir, sprobes, drop);
                // residual := shortfall below the sensitivity floor
                add_entry(out, ctx, id, chartname, std::max(0.0, 1e-2 - broken.max_residual));
            }
        });

        for (int trial = 0; trial < ctx.probes; ++trial) {
            const std::string tag = chartname + " #" + std::to_string(trial);
            guarded(out, ctx, "17.9-random", tag, [&] {
                const Valence vf{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
                const ExtField f = make_poly_field(spec, vf, rng);
                std::vector<ExtField> sfields;
                for (const Valence& v : spec.types)
                    sfields.push_back(make_poly_field(spec, v, rng, baseonly));
                const Section sec = make_section(spec, std::move(sfields));
                const ExtField dir = make_poly_field(spec, Valence{1, 0}, rng, baseonly);
                const std::vector<std::vector<double>> probes{
                    chart.sample_points[static_cast<std::size_t>(trial) %
                                        chart.sample_points.size()]};
                const ChainRuleReport rep = chain_rule_residual(conn, f, sec, dir, probes);
                add_entry(out, ctx, "17.9-random", tag, rep.max_residual);
            });
        }
    }
}

}  // namespace

const std::vector<std::string>& all_suites() {
    static const std::vector<std::string> names = {
        "transitions",  "tensoriality", "derivation-axioms", "covariant",
        "curvature",    "commutators",  "decomposition",     "chainrule",
    };
    return names;
}

std::vector<std::pair<std::string, double>> known_checks() {
    return kDefaults;
}

Report run_suites(const Manifest& m, const std::vector<std::string>& suites, std::uint64_t seed,
                  int probes, const std::map<std::string, double>& tol_overrides) {
    Ctx ctx{m, seed, probes, m.tolerance_overrides};
    for (const auto& [k, v] : tol_overrides) ctx.tol[k] = v;

    Report report;
    report.version = kVersion;
    report.manifest_digest = m.digest;
    report.seed = seed;

    for (const std::string& name : suites) {
        SuiteResult sr;
        sr.name = name;
        const auto start = std::chrono::steady_clock::now();
        if (name == "transitions")
            suite_transitions(sr, ctx);
        else if (name == "tensoriality")
            suite_tensoriality(sr, ctx);
        else if (name == "derivation-axioms")
            suite_derivation_axioms(sr, ctx);
        else if (name == "covariant")
            suite_covariant(sr, ctx);
        else if (name == "curvature")
            suite_curvature(sr, ctx);
        else if (name == "commutators")
            suite_commutators(sr, ctx);
        else if (name == "decomposition")
            suite_decomposition(sr, ctx);
        else if (name == "chainrule")
            suite_chainrule(sr, ctx);
        else
            throw ValidationError("unknown suite '" + name + "'");
        sr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.suites.push_back(std::move(sr));
    }
    return report;
}

}  // namespace extcalc

#include "extcalc/curvature.hpp"

namespace extcalc {

namespace {

// multi-index block sizes for the 16.x comparisons
struct Blocks {
    std::size_t nfu, nfl;  // operand upper/lower counts
    std::size_t nkb, nhb;  // slot-P appended blocks
};

double kahan_max(double a, double b) { return a > b ? a : b; }

}  // namespace

std::vector<RelationResidual> verify_commutators(const ExtendedConnection& conn,
                                                 const CommutatorTestSet& fields,
                                                 const std::vector<FiberPointD>& probes) {
    const BundleSpec& spec = conn.gamma.spec();
    const int n = spec.n;
    const int Q = spec.slots();
    std::vector<RelationResidual> out;

    const CurvaturePack pack = curvature_pack(conn);

    const auto record = [&](const std::string& rel, const std::string& detail, int probe,
                            double residual) {
        out.push_back(RelationResidual{rel, detail, probe, residual});
    };

    struct Operand {
        const char* name;
        const ExtField* f;
    };
    const Operand operands[] = {{"scalar", &fields.scalar},
                                {"vector", &fields.vector},
                                {"covector", &fields.covector}};

    // ---- 15.1: degenerate pair vs pointwise matrix commutator ----
    {
        const DerivationComponents d1 = degenerate_from_tensor(fields.S1);
        const DerivationComponents d2 = degenerate_from_tensor(fields.S2);
        const ExtField s12 = contract_field(product_fields(fields.S1, fields.S2), 1, 0);
        const ExtField s21 = contract_field(product_fields(fields.S2, fields.S1), 1, 0);
        const DerivationComponents d3 = degenerate_from_tensor(sub_fields(s12, s21));
        for (const Operand& op : operands) {
            const ExtField lhs = commutator_field(d1, d2, *op.f);
            const ExtField rhs = apply_derivation(d3, *op.f);
            for (std::size_t p = 0; p < probes.size(); ++p)
                record("15.1", op.name, static_cast<int>(p),
                       max_abs_diff(lhs.eval(probes[p]), rhs.eval(probes[p])));
        }
    }

    // ---- 15.3: two canonical vertical differentiations ----
    for (int P = 1; P <= Q; ++P)
        for (int R = 1; R <= Q; ++R) {
            const ExtField& X = fields.dirT[static_cast<std::size_t>(P - 1)];
            const ExtField& Y = fields.dirT[static_cast<std::size_t>(R - 1)];
            const ExtField U = vertical_derivative(P, X, Y);
            const ExtField V = vertical_derivative(R, Y, X);
            for (const Operand& op : operands) {
                const ExtField lhs = commutator_field(vertical_derivation(spec, P, X),
                                                      vertical_derivation(spec, R, Y), *op.f);
                const ExtField rhs =
                    sub_fields(vertical_derivative(R, U, *op.f), vertical_derivative(P, V, *op.f));
                const std::string detail =
                    std::string(op.name) + " P=" + std::to_string(P) + " R=" + std::to_string(R);
                for (std::size_t p = 0; p < probes.size(); ++p)
                    record("15.3", detail, static_cast<int>(p),
                           max_abs_diff(lhs.eval(probes[p]), rhs.eval(probes[p])));
            }
        }

    // ---- 15.5: spatial against vertical ----
    for (int P = 1; P <= Q; ++P) {
        const ExtField& X = fields.dirX;
        const ExtField& Y = fields.dirT[static_cast<std::size_t>(P - 1)];
        const ExtField U = spatial_covariant(conn, X, Y);
        const ExtField V = vertical_derivative(P, Y, X);
        const ExtField Sdeg =
            contract_dynamic(pack.dynamic_D[static_cast<std::size_t>(P - 1)], spec, P, X, Y);
        for (const Operand& op : operands) {
            const ExtField lhs = commutator_field(spatial_derivation(conn, X),
                                                  vertical_derivation(spec, P, Y), *op.f);
            ExtField rhs = vertical_derivative(P, U, *op.f);
            for (int R = 1; R <= Q; ++R) {
                const ExtField UR = contract_theta(
                    pack.theta_PR[static_cast<std::size_t>(P - 1)][static_cast<std::size_t>(R - 1)],
                    spec, P, R, X, Y);
                rhs = add_fields(rhs, vertical_derivative(R, UR, *op.f));
            }
            rhs = sub_fields(rhs, spatial_covariant(conn, V, *op.f));
            rhs = add_fields(rhs, apply_derivation(degenerate_from_tensor(Sdeg), *op.f));
            const std::string detail = std::string(op.name) + " P=" + std::to_string(P);
            for (std::size_t p = 0; p < probes.size(); ++p)
                record("15.5", detail, static_cast<int>(p),
                       max_abs_diff(lhs.eval(probes[p]), rhs.eval(probes[p])));
        }
    }

    // ---- 15.13: two spatial differentiations ----
    {
        const ExtField& X = fields.dirX;
        const ExtField& Y = fields.dirY;
        const ExtField V = contract_torsion(pack.torsion, X, Y);
        const ExtField U = sub_fields(
            sub_fields(spatial_covariant(conn, X, Y), spatial_covariant(conn, Y, X)), V);
        const ExtField Sdeg = contract_static(pack.static_R, X, Y);
        for (const Operand& op : operands) {
            const ExtField lhs = commutator_field(spatial_derivation(conn, X),
                                                  spatial_derivation(conn, Y), *op.f);
            ExtField rhs = spatial_covariant(conn, U, *op.f);
            for (int R = 1; R <= Q; ++R)
                rhs = add_fields(
                    rhs, vertical_derivative(
                             R, contract_omega(pack.omega_R[static_cast<std::size_t>(R - 1)], spec,
                                               R, X, Y),
                             *op.f));
            rhs = add_fields(rhs, apply_derivation(degenerate_from_tensor(Sdeg), *op.f));
            for (std::size_t p = 0; p < probes.size(); ++p)
                record("15.13", op.name, static_cast<int>(p),
                       max_abs_diff(lhs.eval(probes[p]), rhs.eval(probes[p])));
        }
    }

    // ---- 16.1: mixed fiber partials commute ----
    for (int P = 1; P <= Q; ++P)
        for (int R = P; R <= Q; ++R) {
            const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
            const Valence vr = spec.types[static_cast<std::size_t>(R - 1)];
            for (const Operand& op : operands) {
                const Valence vf = op.f->valence();
                const ExtField A = vertical_differential(P, vertical_differential(R, *op.f));
                const ExtField B = vertical_differential(R, vertical_differential(P, *op.f));
                const std::size_t nfu = int_power(static_cast<std::size_t>(n), vf.r);
                const std::size_t nfl = int_power(static_cast<std::size_t>(n), vf.s);
                const std::size_t nkR = int_power(static_cast<std::size_t>(n), vr.s);
                const std::size_t nhR = int_power(static_cast<std::size_t>(n), vr.r);
                const std::size_t nkP = int_power(static_cast<std::size_t>(n), vp.s);
                const std::size_t nhP = int_power(static_cast<std::size_t>(n), vp.r);
                const std::string detail =
                    std::string(op.name) + " P=" + std::to_string(P) + " R=" + std::to_string(R);
                for (std::size_t p = 0; p < probes.size(); ++p) {
                    const TensorD Av = A.eval(probes[p]);
                    const TensorD Bv = B.eval(probes[p]);
                    double res = 0.0;
                    for (std::size_t fu = 0; fu < nfu; ++fu)
                        for (std::size_t kR = 0; kR < nkR; ++kR)
                            for (std::size_t kP = 0; kP < nkP; ++kP)
                                for (std::size_t fl = 0; fl < nfl; ++fl)
                                    for (std::size_t hR = 0; hR < nhR; ++hR)
                                        for (std::size_t hP = 0; hP < nhP; ++hP) {
                                            const double a =
                                                Av[(((fu * nkR + kR) * nkP + kP) * nfl + fl) * nhR *
                                                       nhP +
                                                   hR * nhP + hP];
                                            const double b =
                                                Bv[(((fu * nkP + kP) * nkR + kR) * nfl + fl) * nhP *
                                                       nhR +
                                                   hP * nhR + hR];
                                            res = kahan_max(res, std::abs(a - b));
                                        }
                    record("16.1", detail, static_cast<int>(p), res);
                }
            }
        }

    // ---- 16.2/16.3/16.4: spatial against the fiber partial ----
    for (int P = 1; P <= Q; ++P) {
        const Valence vp = spec.types[static_cast<std::size_t>(P - 1)];
        const std::size_t nkb = int_power(static_cast<std::size_t>(n), vp.s);
        const std::size_t nhb = int_power(static_cast<std::size_t>(n), vp.r);
        const ExtField& Th_base = pack.dynamic_D[static_cast<std::size_t>(P - 1)];

        for (const Operand& op : operands) {
            const Valence vf = op.f->valence();
            if (vf.rank() > 1) continue;
            const char* rel = vf.r == 1 ? "16.2" : (vf.s == 1 ? "16.4" : "16.3");
            const ExtField lhsA = covariant_differential(spatial_components(conn),
                                                         vertical_differential(P, *op.f));
            const ExtField lhsB = vertical_differential(
                P, covariant_differential(spatial_components(conn), *op.f));
            const std::string detail = std::string(op.name) + " P=" + std::to_string(P);

            for (std::size_t p = 0; p < probes.size(); ++p) {
                const FiberPointD& q = probes[p];
                const TensorD Av = lhsA.eval(q);
                const TensorD Bv = lhsB.eval(q);
                const TensorD Dv = Th_base.eval(q);
                std::vector<TensorD> Thv;
                for (int R = 1; R <= Q; ++R)
                    Thv.push_back(pack.theta_PR[static_cast<std::size_t>(P - 1)]
                                               [static_cast<std::size_t>(R - 1)]
                                                   .eval(q));
                const Tensor<Dual<double>> pf = eval_lifted(*op.f, q);
                const TensorD fv = op.f->eval(q);

                double res = 0.0;
                const std::size_t nk = vf.rank() == 0 ? 1 : static_cast<std::size_t>(n);
                for (std::size_t k = 0; k < nk; ++k)
                    for (std::size_t kb = 0; kb < nkb; ++kb)
                        for (int i = 0; i < n; ++i)
                            for (std::size_t hb = 0; hb < nhb; ++hb) {
                                // lhs layout: uppers (fu, kb), lowers (i, fl, hb)
                                std::size_t flat;
                                if (vf.r == 1)
                                    flat = ((k * nkb + kb) * static_cast<std::size_t>(n) +
                                            static_cast<std::size_t>(i)) *
                                               nhb +
                                           hb;
                                else if (vf.s == 1)
                                    flat = ((kb * static_cast<std::size_t>(n) +
                                             static_cast<std::size_t>(i)) *
                                                static_cast<std::size_t>(n) +
                                            k) *
                                               nhb +
                                           hb;
                                else
                                    flat = (kb * static_cast<std::size_t>(n) +
                                            static_cast<std::size_t>(i)) *
                                               nhb +
                                           hb;
                                double rhs = 0.0;
                                if (vf.r == 1) {
                                    for (int h = 0; h < n; ++h)
                                        rhs += Dv[(((k * nkb + kb) * static_cast<std::size_t>(n) +
                                                    static_cast<std::size_t>(h)) *
                                                       static_cast<std::size_t>(n) +
                                                   static_cast<std::size_t>(i)) *
                                                      nhb +
                                                  hb] *
                                               fv[static_cast<std::size_t>(h)];
                                } else if (vf.s == 1) {
                                    for (int h = 0; h < n; ++h)
                                        rhs -= Dv[(((static_cast<std::size_t>(h) * nkb + kb) *
                                                        static_cast<std::size_t>(n) +
                                                    k) *
                                                       static_cast<std::size_t>(n) +
                                                   static_cast<std::size_t>(i)) *
                                                      nhb +
                                                  hb] *
                                               fv[static_cast<std::size_t>(h)];
                                }
                                // Theta term, common to all operand kinds
                                for (int R = 1; R <= Q; ++R) {
                                    const Valence vr = spec.types[static_cast<std::size_t>(R - 1)];
                                    const std::size_t nib =
                                        int_power(static_cast<std::size_t>(n), vr.r);
                                    const std::size_t njb =
                                        int_power(static_cast<std::size_t>(n), vr.s);
                                    const std::size_t off =
                                        static_cast<std::size_t>(n) + spec.slot_offset(R - 1);
                                    const TensorD& T = Thv[static_cast<std::size_t>(R - 1)];
                                    for (std::size_t ib = 0; ib < nib; ++ib)
                                        for (std::size_t jb = 0; jb < njb; ++jb)
                                            rhs += T[(((ib * nkb + kb) * njb + jb) *
                                                          static_cast<std::size_t>(n) +
                                                      static_cast<std::size_t>(i)) *
                                                         nhb +
                                                     hb] *
                                                   detail::coeff(pf[k].d, off + ib * njb + jb);
                                }
                                res = kahan_max(res, std::abs(Av[flat] - Bv[flat] - rhs));
                            }
                record(rel, detail, static_cast<int>(p), res);
            }
        }
    }

    // ---- 16.5/16.6/16.7: two spatial covariant derivatives ----
    {
        const ExtField dR = pack.static_R;
        for (const Operand& op : operands) {
            const Valence vf = op.f->valence();
            if (vf.rank() > 1) continue;
            const char* rel = vf.r == 1 ? "16.5" : (vf.s == 1 ? "16.7" : "16.6");
            const ExtField df = covariant_differential(spatial_components(conn), *op.f);
            const ExtField ddf = covariant_differential(spatial_components(conn), df);

            for (std::size_t p = 0; p < probes.size(); ++p) {
                const FiberPointD& q = probes[p];
                const TensorD ddv = ddf.eval(q);
                const TensorD dfv = df.eval(q);
                const TensorD Tv = pack.torsion.eval(q);
                const TensorD Rv = dR.eval(q);
                std::vector<TensorD> Omv;
                for (int R = 1; R <= Q; ++R)
                    Omv.push_back(pack.omega_R[static_cast<std::size_t>(R - 1)].eval(q));
                const Tensor<Dual<double>> pf = eval_lifted(*op.f, q);
                const TensorD fv = op.f->eval(q);

                double res = 0.0;
                const std::size_t nk = vf.rank() == 0 ? 1 : static_cast<std::size_t>(n);
                for (std::size_t k = 0; k < nk; ++k)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            // ddf lowers: (outer dir, inner dir, f lowers)
                            double lhs;
                            if (vf.r == 1)
                                lhs = ddv[(k * static_cast<std::size_t>(n) +
                                           static_cast<std::size_t>(i)) *
                                              static_cast<std::size_t>(n) +
                                          static_cast<std::size_t>(j)] -
                                      ddv[(k * static_cast<std::size_t>(n) +
                                           static_cast<std::size_t>(j)) *
                                              static_cast<std::size_t>(n) +
                                          static_cast<std::size_t>(i)];
                            else if (vf.s == 1)
                                lhs = ddv[(static_cast<std::size_t>(i) *
                                               static_cast<std::size_t>(n) +
                                           static_cast<std::size_t>(j)) *
                                              static_cast<std::size_t>(n) +
                                          k] -
                                      ddv[(static_cast<std::size_t>(j) *
                                               static_cast<std::size_t>(n) +
                                           static_cast<std::size_t>(i)) *
                                              static_cast<std::size_t>(n) +
                                          k];
                            else
                                lhs = ddv[static_cast<std::size_t>(i) *
                                              static_cast<std::size_t>(n) +
                                          static_cast<std::size_t>(j)] -
                                      ddv[static_cast<std::size_t>(j) *
                                              static_cast<std::size_t>(n) +
                                          static_cast<std::size_t>(i)];

                            double rhs = 0.0;
                            for (int h = 0; h < n; ++h) {
                                const double tor =
                                    Tv[(static_cast<std::size_t>(h) * n + i) * n + j];
                                double dfh;
                                if (vf.r == 1)
                                    dfh = dfv[k * static_cast<std::size_t>(n) +
                                              static_cast<std::size_t>(h)];
                                else if (vf.s == 1)
                                    dfh = dfv[static_cast<std::size_t>(h) *
                                                  static_cast<std::size_t>(n) +
                                              k];
                                else
                                    dfh = dfv[static_cast<std::size_t>(h)];
                                rhs -= tor * dfh;
                            }
                            if (vf.r == 1)
                                for (int h = 0; h < n; ++h)
                                    rhs += Rv[((k * static_cast<std::size_t>(n) +
                                                static_cast<std::size_t>(h)) *
                                                   static_cast<std::size_t>(n) +
                                               static_cast<std::size_t>(i)) *
                                                  static_cast<std::size_t>(n) +
                                              static_cast<std::size_t>(j)] *
                                           fv[static_cast<std::size_t>(h)];
                            else if (vf.s == 1)
                                for (int h = 0; h < n; ++h)
                                    rhs -= Rv[((static_cast<std::size_t>(h) *
                                                    static_cast<std::size_t>(n) +
                                                k) *
                                                   static_cast<std::size_t>(n) +
                                               static_cast<std::size_t>(i)) *
                                                  static_cast<std::size_t>(n) +
                                              static_cast<std::size_t>(j)] *
                                           fv[static_cast<std::size_t>(h)];
                            for (int R = 1; R <= Q; ++R) {
                                const Valence vr = spec.types[static_cast<std::size_t>(R - 1)];
                                const std::size_t nib =
                                    int_power(static_cast<std::size_t>(n), vr.r);
                                const std::size_t njb =
                                    int_power(static_cast<std::size_t>(n), vr.s);
                                const std::size_t off =
                                    static_cast<std::size_t>(n) + spec.slot_offset(R - 1);
                                const TensorD& Om = Omv[static_cast<std::size_t>(R - 1)];
                                for (std::size_t ib = 0; ib < nib; ++ib)
                                    for (std::size_t jb = 0; jb < njb; ++jb)
                                        rhs += Om[((ib * static_cast<std::size_t>(n) +
                                                    static_cast<std::size_t>(i)) *
                                                       static_cast<std::size_t>(n) +
                                                   static_cast<std::size_t>(j)) *
                                                      njb +
                                                  jb] *
                                               detail::coeff(pf[k].d, off + ib * njb + jb);
                            }
                            res = kahan_max(res, std::abs(lhs - rhs));
                        }
                record(rel, std::string(op.name), static_cast<int>(p), res);
            }
        }
    }

    return out;
}

}  // namespace extcalc

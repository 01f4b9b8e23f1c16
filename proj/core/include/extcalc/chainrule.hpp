#ifndef EXTCALC_CHAINRULE_HPP
#define EXTCALC_CHAINRULE_HPP

// Restriction of extended fields along sections and the tensorial chain
// rule: the classical covariant derivative of a restricted field equals the
// spatial covariant derivative of the extended field plus the vertical
// corrections driven by the section's own covariant derivatives. Three
// different operators share the nabla symbol here; the report carries one
// term per operator.

#include <vector>

#include "extcalc/connection.hpp"

namespace extcalc {

/// A concrete configuration of all fiber slots: per P a field of valence
/// (r_P, s_P) whose components depend only on the base coordinates.
struct Section {
    std::vector<ExtField> fields;
};

Section make_section(const BundleSpec& spec, std::vector<ExtField> fields);

/// Max deviation of the section fields across two random fiber arguments;
/// nonzero means a field peeks at fiber coordinates.
double section_invariance_probe(const BundleSpec& spec, const Section& sec,
                                const std::vector<FiberPointD>& probes);

/// Fiber point assembled from the section over a base point.
template <class S>
FiberPoint<S> section_point(const BundleSpec& spec, const Section& sec, std::vector<S> base) {
    FiberPoint<S> probe;
    probe.base = base;
    for (const Valence& v : spec.types) probe.args.emplace_back(spec.n, v);
    FiberPoint<S> q;
    q.base = std::move(base);
    q.args.reserve(sec.fields.size());
    for (const ExtField& f : sec.fields) q.args.push_back(f.eval(probe));
    return q;
}

/// Composition field: evaluates the source at the section's configuration,
/// ignoring any externally supplied fiber arguments. Derivative propagation
/// flows through the section's expressions.
ExtField restrict_field(const ExtField& f, const Section& sec);

/// Classical covariant differential of a base field, with the connection's
/// coefficients evaluated along the section. Valence (alpha, beta + 1),
/// direction first among the lowers.
ExtField standard_covariant_differential(const ExtendedConnection& conn, const Section& sec,
                                         const ExtField& g);

ExtField standard_covariant(const ExtendedConnection& conn, const Section& sec,
                            const ExtField& dir, const ExtField& g);

enum class ChainRuleDrop { None, Standard, Spatial, Vertical };

struct ChainRuleProbeResult {
    double residual = 0.0;
    double standard_norm = 0.0;  // |nabla X~| term (classical, through the section)
    double spatial_norm = 0.0;   // |nabla X| term (spatial covariant derivative)
    double vertical_norm = 0.0;  // |sum_P C(nabla T[P] (x) vertical differential)|
};

struct ChainRuleReport {
    std::vector<ChainRuleProbeResult> probes;
    double max_residual = 0.0;
};

/// Residual of the tensorial chain rule at base-point probes, optionally
/// with one term dropped (for the sensitivity check).
ChainRuleReport chain_rule_residual(const ExtendedConnection& conn, const ExtField& f,
                                    const Section& sec, const ExtField& dir,
                                    const std::vector<std::vector<double>>& base_probes,
                                    ChainRuleDrop drop = ChainRuleDrop::None);

}  // namespace extcalc

#endif

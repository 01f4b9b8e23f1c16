#ifndef EXTCALC_MANIFEST_HPP
#define EXTCALC_MANIFEST_HPP

// JSON manifests: charts, transitions, bundle, per-chart connection
// coefficients, named fields/sections/derivations and chain-rule jobs.
// All user-facing indices are 1-based; component keys look like
// "i1,...,ir;j1,...,js" against the paper's upper/lower convention.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "extcalc/chainrule.hpp"
#include "extcalc/connection.hpp"
#include "extcalc/curvature.hpp"

namespace extcalc {

struct ManifestField {
    Valence valence;
    std::map<std::string, ExtField> by_chart;
};

struct ManifestSection {
    std::string chart;
    Section section;
};

struct ManifestDerivation {
    std::string chart;
    DerivationComponents components;
};

struct ChainRuleJob {
    std::string field;
    std::string section;
    std::string direction;
    std::string chart;
    std::vector<std::vector<double>> probes;  // base coordinates
};

struct Manifest {
    BundleSpec spec;
    std::vector<Chart> charts;
    std::vector<Transition> transitions;
    std::map<std::string, ExtendedConnection> connection;  // by chart name
    std::map<std::string, ManifestField> fields;
    std::map<std::string, ManifestSection> sections;
    std::map<std::string, ManifestDerivation> derivations;
    std::vector<ChainRuleJob> chainrule;

    std::uint64_t seed = 0;
    int probes = 20;
    std::map<std::string, double> tolerance_overrides;

    std::string digest;  // FNV-1a over the manifest bytes

    const Chart* find_chart(const std::string& name) const;
};

/// Parse a component key like "1,2;1" into the flat index of a tensor of
/// the given shape. Scalars accept "" and ";".
std::size_t parse_component_key(const std::string& key, int dim, Valence v);

Manifest load_manifest(const std::string& path);
Manifest parse_manifest(const std::string& text, const std::string& digest_src);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace extcalc

#endif

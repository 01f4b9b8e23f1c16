#ifndef EXTCALC_SUITES_HPP
#define EXTCALC_SUITES_HPP

// Suite orchestration: each suite turns one aspect of the manifest into
// report entries with pinned tolerances. Checks never abort the run; a
// throwing check becomes a failing entry carrying the error text.

#include <map>
#include <string>
#include <vector>

#include "extcalc/manifest.hpp"
#include "extcalc/report.hpp"

namespace extcalc {

extern const char* kVersion;

const std::vector<std::string>& all_suites();

/// Check ids with their default tolerances, for --list-checks.
std::vector<std::pair<std::string, double>> known_checks();

Report run_suites(const Manifest& m, const std::vector<std::string>& suites, std::uint64_t seed,
                  int probes, const std::map<std::string, double>& tol_overrides);

}  // namespace extcalc

#endif

#ifndef EXTCALC_REPORT_HPP
#define EXTCALC_REPORT_HPP

// Machine-readable verification reports. Deterministic for a fixed manifest
// and seed: only the per-suite wall-clock fields vary between runs.

#include <cstdint>
#include <string>
#include <vector>

namespace extcalc {

struct CheckEntry {
    std::string id;         // check or relation identifier
    std::string probe;      // which probe/operand the entry covers
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string error;      // nonempty when the check aborted
};

struct SuiteResult {
    std::string name;
    double seconds = 0.0;
    std::vector<CheckEntry> entries;

    bool pass() const {
        for (const CheckEntry& e : entries)
            if (!e.pass) return false;
        return true;
    }
};

struct Report {
    std::string version;
    std::string manifest_digest;
    std::uint64_t seed = 0;
    std::vector<SuiteResult> suites;

    bool pass() const {
        for (const SuiteResult& s : suites)
            if (!s.pass()) return false;
        return true;
    }
};

/// Serialize with ordered keys; bit-stable given identical contents.
std::string report_to_json(const Report& r, bool include_timing = true);
void write_report(const Report& r, const std::string& path);

}  // namespace extcalc

#endif

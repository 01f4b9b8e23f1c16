#include "extcalc/report.hpp"

#include <fstream>

#include <json.hpp>

#include "extcalc/errors.hpp"

namespace extcalc {

using ordered = nlohmann::ordered_json;

std::string report_to_json(const Report& r, bool include_timing) {
    ordered root;
    root["artifact"] = "extcalc";
    root["version"] = r.version;
    root["manifest_digest"] = r.manifest_digest;
    root["seed"] = r.seed;
    root["pass"] = r.pass();
    ordered suites = ordered::array();
    for (const SuiteResult& s : r.suites) {
        ordered js;
        js["name"] = s.name;
        js["pass"] = s.pass();
        if (include_timing) js["seconds"] = s.seconds;
        ordered entries = ordered::array();
        for (const CheckEntry& e : s.entries) {
            ordered je;
            je["id"] = e.id;
            je["probe"] = e.probe;
            if (e.error.empty()) {
                je["residual"] = e.residual;
            } else {
                je["residual"] = nullptr;
                je["error"] = e.error;
            }
            je["tolerance"] = e.tolerance;
            je["pass"] = e.pass;
            entries.push_back(std::move(je));
        }
        js["entries"] = std::move(entries);
        suites.push_back(std::move(js));
    }
    root["suites"] = std::move(suites);
    return root.dump(2) + "\n";
}

void write_report(const Report& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report '" + path + "'");
    out << report_to_json(r, true);
}

}  // namespace extcalc

// Command-line front end: loads a manifest, runs the requested verification
// suites, writes a machine-readable report. Exit codes: 0 all checks pass,
// 1 at least one check failed, 2 input error.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "extcalc/manifest.hpp"
#include "extcalc/report.hpp"
#include "extcalc/suites.hpp"

namespace {

void print_checks() {
    std::printf("%-34s %s\n", "check id", "default tolerance");
    for (const auto& [id, tol] : extcalc::known_checks()) std::printf("%-34s %g\n", id.c_str(), tol);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extcalc: verifiable calculus for tensor fields with tensor arguments"};
    app.require_subcommand(0, 1);

    bool list_checks_flag = false;
    app.add_flag("--list-checks", list_checks_flag, "print known check ids and exit");

    CLI::App* run = app.add_subcommand("run", "run verification suites against a manifest");
    std::string manifest_path;
    std::vector<std::string> suite_arg;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int probes = -1;
    std::string report_path;
    std::vector<std::string> tol_args;
    bool run_list_checks = false;
    run->add_option("manifest", manifest_path, "path to a JSON manifest")->required();
    run->add_option("--suite", suite_arg,
                    "suites to run (comma separated or repeated); default: all")
        ->delimiter(',');
    run->add_option_function<std::uint64_t>(
           "--seed", [&](const std::uint64_t v) { seed = v; seed_given = true; },
           "seed for probe and test-field generation (default 0)");
    run->add_option("--probes", probes, "probe count per check (default from manifest, else 20)");
    run->add_option("--tol", tol_args, "tolerance override, <check-id>=<value>");
    run->add_option("--report", report_path, "write the JSON report to this path");
    run->add_flag("--list-checks", run_list_checks, "print known check ids and exit");

    CLI::App* list_cmd = app.add_subcommand("list-checks", "print known check ids and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (list_checks_flag || list_cmd->parsed() || run_list_checks) {
        print_checks();
        return 0;
    }
    if (!run->parsed()) {
        std::printf("%s\n", app.help().c_str());
        return 2;
    }

    try {
        const extcalc::Manifest m = extcalc::load_manifest(manifest_path);

        std::map<std::string, double> tol_overrides;
        for (const std::string& t : tol_args) {
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos) {
                std::fprintf(stderr, "error: --tol expects <check-id>=<value>, got '%s'\n",
                             t.c_str());
                return 2;
            }
            tol_overrides[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
        }

        const std::vector<std::string> suites = suite_arg.empty() ? extcalc::all_suites() : suite_arg;
        const std::uint64_t effective_seed = seed_given ? seed : m.seed;
        const int effective_probes = probes > 0 ? probes : m.probes;

        const extcalc::Report report =
            extcalc::run_suites(m, suites, effective_seed, effective_probes, tol_overrides);

        for (const extcalc::SuiteResult& s : report.suites) {
            int failed = 0;
            double worst = 0.0;
            std::string worst_id;
            for (const extcalc::CheckEntry& e : s.entries) {
                if (!e.pass) ++failed;
                if (e.error.empty() && e.residual > worst) {
                    worst = e.residual;
                    worst_id = e.id;
                }
            }
            std::printf("%-18s %4zu checks  %s", s.name.c_str(), s.entries.size(),
                        failed == 0 ? "pass" : "FAIL");
            if (failed != 0) std::printf(" (%d failing)", failed);
            if (!worst_id.empty()) std::printf("  worst %s %.3g", worst_id.c_str(), worst);
            std::printf("  [%.2fs]\n", s.seconds);
        }
        std::printf("overall: %s\n", report.pass() ? "pass" : "FAIL");

        if (!report_path.empty()) extcalc::write_report(report, report_path);
        return report.pass() ? 0 : 1;
    } catch (const extcalc::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const extcalc::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const extcalc::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

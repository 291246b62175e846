#include "qcr/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>

int main(int argc, char** argv) {
    CLI::App app{"Quadric CR experiment runner"};
    std::string sub, scenario_path, out_dir = "results";
    int threads = 0;
    std::uint64_t seed = 0;
    std::string subs;
    for (const auto& s : qcr::subcommand_names()) subs += (subs.empty() ? "" : ", ") + s;
    app.add_option("subcommand", sub, "one of: " + subs)->required();
    app.add_option("--scenario", scenario_path, "scenario file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", seed, "overrides the scenario seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (threads > 0) qcr::set_thread_count(threads);
        qcr::Scenario sc = qcr::load_scenario(scenario_path);
        if (*seed_opt) sc.seed = seed;
        qcr::Report rep = qcr::run_subcommand(sub, sc);
        qcr::write_report(rep, out_dir);
        int failed = 0;
        for (const auto& k : rep.checks) {
            std::printf("%-12s %-28s %-4s value=%s tol=%s%s%s\n", k.case_name.c_str(), k.name.c_str(),
                        k.passed ? "ok" : "FAIL", qcr::fmt(k.value).c_str(), qcr::fmt(k.tolerance).c_str(),
                        k.witness.empty() ? "" : "  at ", k.witness.c_str());
            failed += !k.passed;
        }
        if (failed) {
            std::fprintf(stderr, "%d tolerance violation(s)\n", failed);
            return 4;
        }
        return 0;
    } catch (const qcr::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const qcr::MissingReference& e) {
        std::fprintf(stderr, "missing reference: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

#include "qcr/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

using namespace qcr;

namespace {

struct Requirement {
    std::string case_name;  // empty: every case reporting the check
    std::string check;
    double tolerance;
    bool upper = true;
};

struct Criterion {
    int id;
    std::string title;
    std::string subcommand;
    std::string scenario;
    std::vector<Requirement> reqs;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "plancherel", "plancherel", "plancherel.scenario",
         {{"heis1", "residual", 1e-4},
          {"heis1", "runtime", 120.0},
          {"degenerate", "residual", 1e-3}}},
        {2, "rockland spectrum", "rockland", "rockland.scenario",
         {{"heis1", "eigenvalues", 1e-8},
          {"random2", "eigenvalues", 1e-6},
          {"", "ground_overlap", 1e-8}}},
        {3, "matrix coefficient", "spectral", "spectral.scenario", {{"", "matrix_coefficient", 1e-6}}},
        {4, "F_N isomorphism", "extend", "fn_iso.scenario",
         {{"", "roundtrip", 1e-4}, {"", "product", 1e-4}, {"", "convolution", 1e-4}}},
        {5, "extension", "extend", "extension.scenario",
         {{"", "routes", 1e-5},
          {"", "boundary_A", 1e-6},
          {"", "boundary_B", 1e-6},
          {"", "cr", 1e-5},
          {"", "margin", 1e12}}},
        {6, "spectral support", "crcheck", "crcheck.scenario",
         {{"", "outside_mass", 1e-4}, {"control", "control_residual", 1e-1, false}}},
        {7, "density", "windows", "windows.scenario", {{"", "sandwich", 1e-10}, {"", "l2_final", 1e-3}}},
        {8, "convex layer", "convex", "convex.scenario",
         {{"", "projection_identity", 1e-12},
          {"", "quadrant_constant", 5e-2},
          {"", "bipolar_polytope", 0.5},
          {"", "bipolar_cone", 0.5}}},
        {9, "structure split", "split", "split.scenario",
         {{"split12", "phi_difference", 1e-12},
          {"split12", "normality", 1e-12},
          {"split12", "pairing", 1e-12},
          {"split12", "hk_invariance", 1e-12}}},
    };
    return list;
}

struct Outcome {
    bool passed = true;
    std::string detail;
};

Outcome evaluate(const Criterion& cr, const Report& rep) {
    Outcome out;
    for (const Requirement& r : cr.reqs) {
        bool found = false;
        double worst = r.upper ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        for (const Check& k : rep.checks) {
            if (k.name != r.check || (!r.case_name.empty() && k.case_name != r.case_name)) continue;
            found = true;
            double v = std::isnan(k.value) ? std::numeric_limits<double>::infinity() : k.value;
            worst = r.upper ? std::max(worst, v) : std::min(worst, v);
        }
        bool ok = found && (r.upper ? worst <= r.tolerance : worst >= r.tolerance);
        out.passed = out.passed && ok;
        char buf[256];
        std::snprintf(buf, sizeof buf, " %s%s%s=%.3g(%s%.3g)", r.case_name.c_str(), r.case_name.empty() ? "" : ".",
                      r.check.c_str(), found ? worst : std::nan(""), r.upper ? "<=" : ">=", r.tolerance);
        out.detail += buf;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::filesystem::path dir = QCR_SCENARIO_DIR;
    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    for (const Criterion& cr : criteria()) {
        if (only && cr.id != only) continue;
        // Criterion 1 pins a single-threaded runtime.
        set_thread_count(cr.id == 1 ? 1 : int(std::max(1u, std::thread::hardware_concurrency())));
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            Report rep = run_subcommand(cr.subcommand, load_scenario(dir / cr.scenario));
            o = evaluate(cr, rep);
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail = std::string(" error: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("CRITERION %d %s  [%s]%s  (%.1fs)\n", cr.id, o.passed ? "PASS" : "FAIL", cr.title.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.passed) ++failed;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}

#pragma once

#include "qcr/io.hpp"

namespace qcr {

struct Check {
    std::string case_name;
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool upper = true;  // passes when value <= tolerance, otherwise when value >= tolerance
    bool passed = false;
    bool timing = false;  // wall-clock values go to the JSON summary only
    std::string witness;
};

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Report {
    std::string subcommand;
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<Check> checks;
    std::vector<Table> tables;

    bool passed() const;
    const Check* find(const std::string& case_name, const std::string& name) const;
};

const std::vector<std::string>& subcommand_names();

// Runs every case of the scenario. Throws ParseError / MissingReference on bad input.
Report run_subcommand(const std::string& subcommand, const Scenario& scenario);

// <dir>/<subcommand>.csv (checks), <dir>/<subcommand>_<table>.csv, <dir>/<subcommand>.json.
void write_report(const Report& report, const std::filesystem::path& dir);

// Hermitian coefficients with independent standard normal entries.
QuadraticModel random_model(int n, int m, std::uint64_t seed);

// 17 significant digits.
std::string fmt(double v);

}  // namespace qcr

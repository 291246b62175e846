#pragma once

#include "qcr/paley_wiener.hpp"

#include <filesystem>
#include <map>
#include <optional>

namespace qcr {

// Line-oriented key = value text; '#' starts a comment, "[name]" opens a section.
struct KeyValueSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
};
std::vector<KeyValueSection> parse_key_values(const std::string& text);

// Model: n, m, A1..Am with n*n entries "re,im" in row-major order (';' may separate rows).
QuadraticModel parse_model(const std::string& text);
QuadraticModel load_model(const std::filesystem::path& path);

// Body: m, is_cone, vertices = "x1 y1; x2 y2; ...".
ConvexBody parse_body(const std::string& text);
ConvexBody load_body(const std::filesystem::path& path);

// Profile: body (path relative to the profile file), center, radius, poly, nodes.
SpectralProfile load_profile(const std::filesystem::path& path);

struct ScenarioCase {
    std::string name;
    std::filesystem::path dir;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;
    // "1 0; 0.5 2" -> two vectors of length dim
    std::vector<RVec> vectors(const std::string& key, int dim) const;
    std::vector<std::string> words(const std::string& key) const;
    std::filesystem::path ref(const std::string& key) const;
    double tolerance(const std::string& check, double fallback) const;
};

struct Scenario {
    std::filesystem::path path;
    std::uint64_t seed = 20240601;
    std::vector<ScenarioCase> cases;
};

// Top-level keys are defaults for every section. References are checked on load.
Scenario load_scenario(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace qcr

#include "qcr/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qcr {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    std::string t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
        throw ParseError(what + ": not a number: '" + s + "'");
    return v;
}

int to_int(const std::string& s, const std::string& what) {
    double v = to_double(s, what);
    if (v != std::floor(v)) throw ParseError(what + ": not an integer: '" + s + "'");
    return int(v);
}

bool to_bool(const std::string& s, const std::string& what) {
    std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ParseError(what + ": not a boolean: '" + s + "'");
}

std::map<std::string, std::string> single_section(const std::string& text, const std::string& what) {
    auto secs = parse_key_values(text);
    std::map<std::string, std::string> kv;
    for (const auto& s : secs) {
        if (!s.name.empty() && !s.entries.empty()) throw ParseError(what + ": sections are not allowed");
        for (const auto& [k, v] : s.entries) {
            if (kv.count(k)) throw ParseError(what + ": duplicate key '" + k + "'");
            kv[k] = v;
        }
    }
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key, const std::string& what) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(what + ": missing key '" + key + "'");
    return it->second;
}

RVec parse_vector(const std::string& s, const std::string& what) {
    auto t = tokens(s);
    RVec v(Eigen::Index(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) v(Eigen::Index(i)) = to_double(t[i], what);
    return v;
}

std::filesystem::path resolve(const std::filesystem::path& dir, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_relative()) p = dir / p;
    if (!std::filesystem::exists(p)) throw MissingReference("missing file: " + p.string());
    return p;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingReference("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<KeyValueSection> parse_key_values(const std::string& text) {
    std::vector<KeyValueSection> out(1);
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ParseError("line " + std::to_string(lineno) + ": malformed section header");
            out.push_back({trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
        out.back().entries.push_back({key, val});
    }
    return out;
}

QuadraticModel parse_model(const std::string& text) {
    auto kv = single_section(text, "model");
    int n = to_int(need(kv, "n", "model"), "model n");
    int m = to_int(need(kv, "m", "model"), "model m");
    if (n < 1 || m < 1) throw ParseError("model: n and m must be positive");
    std::vector<CMat> A;
    for (int k = 1; k <= m; ++k) {
        std::string raw = need(kv, "A" + std::to_string(k), "model");
        for (char& c : raw)
            if (c == ';') c = ' ';
        auto t = tokens(raw);
        if (int(t.size()) != n * n) throw ParseError("model: A" + std::to_string(k) + " needs n*n entries");
        CMat M(n, n);
        for (int i = 0; i < n * n; ++i) {
            auto parts = split_on(t[i], ',');
            if (parts.size() == 1) parts.push_back("0");
            if (parts.size() != 2) throw ParseError("model: entry '" + t[i] + "' must be re,im");
            M(i / n, i % n) = cplx(to_double(parts[0], "model entry"), to_double(parts[1], "model entry"));
        }
        A.push_back(M);
    }
    for (const auto& [k, v] : kv) {
        if (k == "n" || k == "m") continue;
        if (k.size() > 1 && k[0] == 'A') {
            int idx = to_int(k.substr(1), "model key");
            if (idx >= 1 && idx <= m) continue;
        }
        throw ParseError("model: unknown key '" + k + "'");
    }
    try {
        return QuadraticModel(n, A);
    } catch (const ContractViolation& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

QuadraticModel load_model(const std::filesystem::path& path) { return parse_model(read_text(path)); }

ConvexBody parse_body(const std::string& text) {
    auto kv = single_section(text, "body");
    int m = to_int(need(kv, "m", "body"), "body m");
    bool cone = kv.count("is_cone") ? to_bool(kv.at("is_cone"), "body is_cone") : false;
    std::vector<RVec> pts;
    if (kv.count("vertices") && !trim(kv.at("vertices")).empty()) {
        for (const auto& item : split_on(kv.at("vertices"), ';')) {
            RVec v = parse_vector(item, "body vertex");
            if (v.size() != m) throw ParseError("body: vertex dimension differs from m");
            pts.push_back(v);
        }
    }
    for (const auto& [k, v] : kv)
        if (k != "m" && k != "is_cone" && k != "vertices") throw ParseError("body: unknown key '" + k + "'");
    if (pts.empty()) return ConvexBody::empty(m);
    return cone ? ConvexBody::cone(pts) : ConvexBody::polytope(pts);
}

ConvexBody load_body(const std::filesystem::path& path) { return parse_body(read_text(path)); }

SpectralProfile load_profile(const std::filesystem::path& path) {
    auto kv = single_section(read_text(path), "profile");
    ConvexBody K = load_body(resolve(path.parent_path(), need(kv, "body", "profile")));
    std::string kind = kv.count("kind") ? kv.at("kind") : "bump";
    for (const auto& [k, v] : kv)
        if (k != "body" && k != "kind" && k != "center" && k != "radius" && k != "poly" && k != "nodes")
            throw ParseError("profile: unknown key '" + k + "'");
    SpectralProfile p;
    if (kind == "zero") {
        p = zero_profile(K);
    } else if (kind == "bump") {
        RVec c = parse_vector(need(kv, "center", "profile"), "profile center");
        if (c.size() != K.dim()) throw ParseError("profile: center dimension");
        double r = to_double(need(kv, "radius", "profile"), "profile radius");
        std::vector<double> poly{1.0};
        if (kv.count("poly")) {
            RVec pv = parse_vector(kv.at("poly"), "profile poly");
            poly.assign(pv.data(), pv.data() + pv.size());
        }
        try {
            p = bump_profile(K, c, r, poly);
        } catch (const ContractViolation& e) {
            throw ParseError(std::string("profile: ") + e.what());
        }
    } else {
        throw ParseError("profile: unknown kind '" + kind + "'");
    }
    if (kv.count("nodes")) p.nodes = to_int(kv.at("nodes"), "profile nodes");
    if (p.nodes < 2) throw ParseError("profile: nodes must be at least 2");
    return p;
}

bool ScenarioCase::has(const std::string& key) const { return values.count(key) > 0; }

std::string ScenarioCase::str(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double ScenarioCase::num(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : to_double(it->second, name + "." + key);
}

int ScenarioCase::integer(const std::string& key, int fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : to_int(it->second, name + "." + key);
}

std::vector<double> ScenarioCase::list(const std::string& key, std::vector<double> fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::string raw = it->second;
    for (char& ch : raw)
        if (ch == ';') ch = ' ';
    std::vector<double> out;
    for (const auto& item : tokens(raw)) out.push_back(to_double(item, name + "." + key));
    return out;
}

std::vector<RVec> ScenarioCase::vectors(const std::string& key, int dim) const {
    std::vector<RVec> out;
    auto it = values.find(key);
    if (it == values.end()) return out;
    for (const auto& item : split_on(it->second, ';')) {
        if (item.empty()) continue;
        RVec v = parse_vector(item, name + "." + key);
        if (v.size() != dim) throw ParseError(name + "." + key + ": expected vectors of length " + std::to_string(dim));
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> ScenarioCase::words(const std::string& key) const {
    std::vector<std::string> out;
    auto it = values.find(key);
    if (it == values.end()) return out;
    for (const auto& item : split_on(it->second, ';'))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::filesystem::path ScenarioCase::ref(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ParseError(name + ": missing reference key '" + key + "'");
    return resolve(dir, it->second);
}

double ScenarioCase::tolerance(const std::string& check, double fallback) const {
    return num("tol." + check, fallback);
}

Scenario load_scenario(const std::filesystem::path& path) {
    Scenario sc;
    sc.path = path;
    auto secs = parse_key_values(read_text(path));
    std::map<std::string, std::string> defaults;
    for (const auto& [k, v] : secs.front().entries) {
        if (k == "seed") {
            double s = to_double(v, "seed");
            if (s < 0 || s != std::floor(s)) throw ParseError("seed must be a non-negative integer");
            sc.seed = std::uint64_t(s);
            continue;
        }
        defaults[k] = v;
    }
    const auto dir = path.parent_path();
    for (std::size_t i = 1; i < secs.size(); ++i) {
        ScenarioCase c;
        c.name = secs[i].name;
        c.dir = dir;
        c.values = defaults;
        for (const auto& [k, v] : secs[i].entries) c.values[k] = v;
        for (const auto& [k, v] : c.values) {
            if (k.rfind("tol.", 0) == 0 && !(to_double(v, c.name + "." + k) > 0.0))
                throw ParseError(c.name + ": tolerance '" + k + "' must be positive");
            if (k == "model" || k == "body" || k == "profile" || k == "profile2" || k == "control_profile") {
                auto p = resolve(dir, v);
                if (k == "model") load_model(p);
                else if (k == "body") load_body(p);
                else load_profile(p);
            }
        }
        sc.cases.push_back(std::move(c));
    }
    return sc;
}

}  // namespace qcr

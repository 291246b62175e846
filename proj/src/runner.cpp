#include "qcr/runner.hpp"

#include "qcr/rockland.hpp"
#include "qcr/split.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>

namespace qcr {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* Report::find(const std::string& case_name, const std::string& name) const {
    for (const auto& c : checks)
        if (c.case_name == case_name && c.name == name) return &c;
    return nullptr;
}

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"spectral", "plancherel", "rockland", "extend",
                                                "crcheck",  "windows",    "split",    "convex"};
    return names;
}

QuadraticModel random_model(int n, int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<CMat> A;
    for (int k = 0; k < m; ++k) {
        CMat G(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G(i, j) = cplx(nd(rng), nd(rng));
        A.push_back(0.5 * (G + G.adjoint()));
    }
    return QuadraticModel(n, A);
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t case_seed(std::uint64_t seed, std::size_t idx) { return seed + 0x9E3779B97F4A7C15ull * (idx + 1); }

std::string vec_str(const RVec& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v(i));
    return s;
}

std::string vec_str(const CVec& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v(i).real()) + (v(i).imag() < 0 ? "" : "+") + fmt(v(i).imag()) + "i";
    return s;
}

std::string point_str(const GroupPoint& p) { return "zeta=" + vec_str(p.zeta) + " x=" + vec_str(p.x); }
std::string point_str(const AmbientPoint& a) { return "zeta=" + vec_str(a.zeta) + " z=" + vec_str(a.z); }

struct Ctx {
    Report& rep;
    const ScenarioCase& c;
    std::uint64_t seed;

    Check& check(const std::string& name, double value, double default_tol, bool upper = true,
                 const std::string& witness = "") {
        Check k;
        k.case_name = c.name;
        k.name = name;
        k.value = value;
        k.tolerance = c.tolerance(name, default_tol);
        k.upper = upper;
        k.passed = upper ? value <= k.tolerance : value >= k.tolerance;
        k.witness = witness;
        rep.checks.push_back(k);
        return rep.checks.back();
    }

    Table& table(const std::string& name, std::vector<std::string> header) {
        for (auto& t : rep.tables)
            if (t.name == name) return t;
        header.insert(header.begin(), "case");
        rep.tables.push_back({name, std::move(header), {}});
        return rep.tables.back();
    }

    void row(Table& t, std::vector<std::string> cells) {
        cells.insert(cells.begin(), c.name);
        t.rows.push_back(std::move(cells));
    }
};

QuadraticModel case_model(const ScenarioCase& c, std::uint64_t seed) {
    if (c.has("model")) return load_model(c.ref("model"));
    if (c.has("random_model_n"))
        return random_model(c.integer("random_model_n", 2), c.integer("random_model_m", 1), seed ^ 0x5bd1e995ull);
    throw ParseError(c.name + ": needs 'model' or 'random_model_n'");
}

GridSpec case_grid(const ScenarioCase& c, GridSpec g, const std::string& prefix = "") {
    g.L_E = c.num(prefix + "L_E", g.L_E);
    g.L_F = c.num(prefix + "L_F", g.L_F);
    g.n_E = c.integer(prefix + "n_E", g.n_E);
    g.n_F = c.integer(prefix + "n_F", g.n_F);
    try {
        g.validate();
    } catch (const ContractViolation& e) {
        throw ParseError(c.name + ": " + e.what());
    }
    return g;
}

SpectralProfile case_profile(const ScenarioCase& c, const std::string& key = "profile") {
    return load_profile(c.ref(key));
}

struct Sampler {
    std::mt19937_64 rng;
    std::normal_distribution<double> nd{0.0, 1.0};
    std::uniform_real_distribution<double> ud{0.0, 1.0};

    explicit Sampler(std::uint64_t s) : rng(s) {}

    double uniform(double a, double b) { return a + (b - a) * ud(rng); }

    CVec ball(int n, double radius) {
        CVec z(n);
        for (int j = 0; j < n; ++j) z(j) = cplx(nd(rng), nd(rng));
        double r = radius * std::pow(ud(rng), 1.0 / (2.0 * n));
        return z.norm() > 0.0 ? CVec(z * (r / z.norm())) : CVec(CVec::Zero(n));
    }

    RVec normal(int m) {
        RVec v(m);
        for (int i = 0; i < m; ++i) v(i) = nd(rng);
        return v;
    }

    RVec box(int m, double half) {
        RVec v(m);
        for (int i = 0; i < m; ++i) v(i) = uniform(-half, half);
        return v;
    }

    GroupPoint group(const QuadraticModel& model, double zeta_max, double x_max) {
        GroupPoint p;
        p.zeta = ball(model.n(), zeta_max);
        p.x = box(model.m(), x_max);
        return p;
    }
};

std::vector<GroupPoint> group_points(const QuadraticModel& model, int count, double zeta_max, double x_max,
                                     std::uint64_t seed) {
    Sampler s(seed);
    std::vector<GroupPoint> pts;
    for (int i = 0; i < count; ++i) pts.push_back(s.group(model, zeta_max, x_max));
    return pts;
}

std::pair<double, std::size_t> arg_max(const std::vector<double>& v) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[k])) k = i;
    return {v.empty() ? 0.0 : v[k], k};
}

// spectral: matrix coefficient <pi(p) e0, e0> against its closed form, Phi_lambda closed vs direct.
void run_spectral(Ctx& cx) {
    const auto& c = cx.c;
    QuadraticModel model = case_model(c, cx.seed);
    const int n = model.n(), m = model.m();
    Sampler s(cx.seed);
    std::vector<RVec> lams = c.vectors("lambdas", m);
    for (int i = 0, k = c.integer("random_lambdas", lams.empty() ? 3 : 0); i < k; ++i) lams.push_back(s.normal(m));
    const int points = c.integer("points", 100);
    const double zmax = c.num("zeta_max", 1.0), xmax = c.num("x_max", 3.0);
    const int gh = c.integer("gh_nodes", 56);

    Table& tab = cx.table("lambdas", {"lambda", "d_lambda", "pfaffian", "mu"});
    double worst = 0.0, worst_phi = 0.0;
    std::string wit, wit_phi;
    for (const RVec& lam : lams) {
        SpectralData sd = spectral_data(model, lam);
        RVec mu = sd.mu;
        cx.row(tab, {vec_str(lam), std::to_string(sd.d_lambda), fmt(sd.pfaffian), vec_str(mu)});
        FockTruncation tr = fock_basis(sd, 2);
        std::vector<GroupPoint> pts;
        std::vector<RVec> taus;
        for (int i = 0; i < points; ++i) {
            pts.push_back(s.group(model, zmax, xmax));
            taus.push_back(s.normal(2 * sd.d_lambda));
        }
        std::vector<double> err(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            const GroupPoint& p = pts[i];
            cplx got = rep_apply(tr, taus[i], p, gh)(0, 0);
            double arg = -lam.dot(p.x);
            CVec t = sd.radical_coords(p.zeta);
            for (int l = 0; l < sd.d_lambda; ++l) arg -= taus[i](2 * l) * t(l).real() + taus[i](2 * l + 1) * t(l).imag();
            cplx want = std::exp(cplx(-sd.phi_lambda(p.zeta), arg));
            err[i] = std::abs(got - want);
        });
        auto [e, k] = arg_max(err);
        if (!(e <= worst)) {
            worst = e;
            wit = "lambda=" + vec_str(lam) + " " + point_str(pts[k]) + " tau=" + vec_str(taus[k]);
        }
        for (int i = 0; i < 20; ++i) {
            CVec z = s.ball(n, 1.0), w = s.ball(n, 1.0);
            double d = std::abs(sd.phi_lambda(z, w) - phi_lambda_direct(model, sd, z, w));
            if (!(d <= worst_phi)) {
                worst_phi = d;
                wit_phi = "lambda=" + vec_str(lam);
            }
        }
    }
    cx.check("matrix_coefficient", worst, 1e-6, true, wit);
    cx.check("phi_lambda_closed_vs_direct", worst_phi, 1e-12, true, wit_phi);
}

// plancherel: ||f||^2 against the Plancherel integral of ||pi(f)||_HS^2.
void run_plancherel(Ctx& cx) {
    const auto& c = cx.c;
    QuadraticModel model = case_model(c, cx.seed);
    const int m = model.m();
    const double a = c.num("x_decay", 1.0);
    std::vector<double> om = c.list("omega", std::vector<double>(std::size_t(m), 0.0));
    if (int(om.size()) != m) throw ParseError(c.name + ": omega needs m entries");
    RVec omega = Eigen::Map<RVec>(om.data(), m);
    GridSpec g = case_grid(c, GridSpec{6.0, 6.0, 49, 49});
    SampledFunction f(
        model.n(), m,
        [a, omega](const CVec& z, const RVec& x) { return std::exp(cplx(-z.squaredNorm() - a * x.squaredNorm(), omega.dot(x))); },
        g);
    const int D = c.integer("D", 12);
    const double lh = c.num("lambda_half", 8.0), th = c.num("tau_half", 8.0);
    const int ln = c.integer("lambda_nodes", 161), tn = c.integer("tau_nodes", 17);
    if (ln % 2 == 0 || tn % 2 == 0) throw ParseError(c.name + ": node counts must be odd (Simpson rule)");
    auto t0 = Clock::now();
    PlancherelResult r = plancherel_residual(model, f, simpson(ln, -lh, lh), simpson(tn, -th, th), D);
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    Table& tab = cx.table("plancherel", {"D", "lambda_nodes", "lhs", "rhs", "residual", "constant", "generic_d", "tail_fraction"});
    cx.row(tab, {std::to_string(D), std::to_string(ln), fmt(r.lhs), fmt(r.rhs), fmt(r.residual), fmt(r.constant),
                 std::to_string(r.generic_d), fmt(r.tail_fraction)});
    cx.check("residual", r.residual, 1e-4, true,
             "lhs=" + fmt(r.lhs) + " rhs=" + fmt(r.rhs) + (r.tail_warning ? " tail-warning" : ""));
    cx.check("runtime", secs, 120.0, true, "seconds, threads=" + std::to_string(thread_count())).timing = true;
}

// rockland: assembled dpi(L) against the closed-form spectrum.
void run_rockland(Ctx& cx) {
    const auto& c = cx.c;
    QuadraticModel model = case_model(c, cx.seed);
    const int m = model.m();
    std::vector<RVec> lams = c.vectors("lambdas", m);
    if (lams.empty()) lams.push_back(RVec::Ones(m));
    std::vector<double> tau_in = c.list("tau", {});
    const int D = c.integer("D", 8);
    const double t = c.num("scale_t", 2.0);

    Table& tab = cx.table("spectrum", {"lambda", "index", "assembled", "closed_form"});
    double worst = 0.0, worst_overlap = 0.0, worst_scale = 0.0, min_eig = std::numeric_limits<double>::infinity();
    std::string wit, wit_scale;
    for (const RVec& lam : lams) {
        SpectralData sd = spectral_data(model, lam);
        RVec tau = RVec::Zero(2 * sd.d_lambda);
        if (!tau_in.empty()) {
            if (int(tau_in.size()) != 2 * sd.d_lambda) throw ParseError(c.name + ": tau needs 2 d_lambda entries");
            tau = Eigen::Map<RVec>(tau_in.data(), Eigen::Index(tau_in.size()));
        }
        FockTruncation tr = fock_basis(sd, D);
        RocklandSpectrum rs = rockland_spectrum(tr, tau);
        std::vector<double> closed;
        for (const auto& al : multi_indices(tr.k(), D / 2)) closed.push_back(closed_form_eigenvalue(sd, tau, al));
        std::sort(closed.begin(), closed.end());
        if (closed.size() != rs.eigenvalues.size()) throw NumericalConsistencyError("rockland: block size mismatch");
        for (std::size_t i = 0; i < closed.size(); ++i) {
            double e = std::abs(rs.eigenvalues[i] - closed[i]) / std::abs(closed[i]);
            if (!(e <= worst)) {
                worst = e;
                wit = "lambda=" + vec_str(lam) + " index=" + std::to_string(i);
            }
            cx.row(tab, {vec_str(lam), std::to_string(i), fmt(rs.eigenvalues[i]), fmt(closed[i])});
        }
        worst_overlap = std::max(worst_overlap, 1.0 - std::norm(rs.ground_vector(0)));
        min_eig = std::min(min_eig, rs.eigenvalues.front());

        RVec lam2 = t * t * lam, tau2 = t * tau;
        RocklandSpectrum r2 = rockland_spectrum(fock_basis(spectral_data(model, lam2), D), tau2);
        const double t4 = t * t * t * t;
        for (std::size_t i = 0; i < r2.eigenvalues.size(); ++i) {
            double e = std::abs(r2.eigenvalues[i] - t4 * rs.eigenvalues[i]) / (t4 * std::abs(rs.eigenvalues[i]));
            if (!(e <= worst_scale)) {
                worst_scale = e;
                wit_scale = "lambda=" + vec_str(lam) + " index=" + std::to_string(i);
            }
        }
    }
    cx.check("eigenvalues", worst, 1e-8, true, wit);
    cx.check("ground_overlap", worst_overlap, 1e-8);
    cx.check("positivity", min_eig, 1e-12, false);
    cx.check("scaling", worst_scale, 1e-8, true, wit_scale);
}

std::vector<RVec> lambda_line(const RVec& lo, const RVec& hi, int count) {
    std::vector<RVec> out;
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * (count == 1 ? 0.0 : double(i) / (count - 1)));
    return out;
}

// phi1 phi2 sampled line by line from both factors.
SampledFunction product_function(const SampledFunction& a, const SampledFunction& b, GridSpec g) {
    auto eval = [a, b](const CVec& z, const RVec& x) { return a(z, x) * b(z, x); };
    auto xeval = [a, b](const CVec& z, const XGrid& xg, cplx* out) {
        std::vector<cplx> tmp(xg.size());
        a.sample_x(z, xg, out);
        b.sample_x(z, xg, tmp.data());
        for (std::size_t i = 0; i < xg.size(); ++i) out[i] *= tmp[i];
    };
    return SampledFunction(a.n(), a.m(), eval, g, xeval);
}

// extend: F_N round trip, product and convolution rules, extension routes, boundary values, margins, decay.
void run_extend(Ctx& cx) {
    const auto& c = cx.c;
    QuadraticModel model = case_model(c, cx.seed);
    const int m = model.m();
    SpectralProfile prof = case_profile(c);
    GridSpec grid = case_grid(c, GridSpec{5.2, 400.0, 27, 401});
    InverseFN inv = inverse_FN(model, prof, grid);
    if (!inv.cr_guaranteed) throw ContractViolation(c.name + ": " + inv.warning);
    std::vector<std::string> checks = c.words("checks");
    if (checks.empty()) checks = {"roundtrip", "routes", "boundary", "cr", "margin"};
    const double fc = std::pow(2.0, model.n() - m) / std::pow(kPi, model.n() + m);
    auto has = [&](const std::string& k) { return std::find(checks.begin(), checks.end(), k) != checks.end(); };
    for (const auto& k : checks)
        if (k != "roundtrip" && k != "product" && k != "convolution" && k != "routes" && k != "boundary" &&
            k != "cr" && k != "margin" && k != "decay")
            throw ParseError(c.name + ": unknown check '" + k + "'");

    if (has("roundtrip")) {
        const double pad = c.num("lambda_pad", 0.1);
        auto lams = lambda_line(prof.lo.array() - pad, prof.hi.array() + pad, c.integer("lambda_count", 13));
        ForwardResult fw = forward_FN(model, inv.f, lams);
        Table& tab = cx.table("roundtrip", {"lambda", "forward_re", "forward_im", "psi"});
        std::vector<double> err(lams.size(), 0.0);
        for (std::size_t i = 0; i < lams.size(); ++i) {
            cplx want = prof.psi(lams[i]);
            err[i] = fw.used[i] ? std::abs(fw.values[i] - want) : 0.0;
            cx.row(tab, {vec_str(lams[i]), fmt(fw.values[i].real()), fmt(fw.values[i].imag()), fmt(want.real())});
        }
        auto [e, k] = arg_max(err);
        cx.check("roundtrip", e, 1e-4, true, "lambda=" + vec_str(lams[k]) + " tail=" + fmt(fw.tail_fraction));
    }

    if (has("product") || has("convolution")) {
        require(m == 1, "product and convolution checks are one-dimensional in lambda");
        SpectralProfile prof2 = c.has("profile2") ? case_profile(c, "profile2") : prof;
        InverseFN inv2 = inverse_FN(model, prof2, grid);
        auto pf = [&](double l) { return l == 0.0 ? 0.0 : spectral_data(model, RVec::Constant(1, l)).pfaffian; };
        if (has("product")) {
            const double lo = prof.lo(0) + prof2.lo(0), hi = prof.hi(0) + prof2.hi(0);
            auto lams = lambda_line(RVec::Constant(1, lo), RVec::Constant(1, hi), c.integer("lambda_count", 13));
            ForwardResult fw = forward_FN(model, product_function(inv.f, inv2.f, case_grid(c, grid, "product_")), lams);
            // oracle: c * int (psi1 |Pf|)(lambda - mu) (psi2 |Pf|)(mu) d mu
            Rule r = gauss_legendre(400, prof2.lo(0), prof2.hi(0));
            std::vector<double> err(lams.size());
            Table& tab = cx.table("product", {"lambda", "lhs_re", "lhs_im", "oracle"});
            for (std::size_t i = 0; i < lams.size(); ++i) {
                const double l = lams[i](0);
                std::vector<cplx> terms(r.size());
                for (std::size_t j = 0; j < r.size(); ++j) {
                    const double mu = r.nodes[j];
                    terms[j] = r.weights[j] * prof.psi(RVec::Constant(1, l - mu)) * pf(l - mu) *
                               prof2.psi(RVec::Constant(1, mu)) * pf(mu);
                }
                cplx want = fc * pairwise_sum(terms);
                cplx got = fw.values[i] * pf(l);
                err[i] = std::abs(got - want);
                cx.row(tab, {fmt(l), fmt(got.real()), fmt(got.imag()), fmt(want.real())});
            }
            auto [e, k] = arg_max(err);
            cx.check("product", e, 1e-4, true, "lambda=" + vec_str(lams[k]));
        }
        if (has("convolution")) {
            SampledFunction conv = group_convolve(model, inv.f, inv2.f);
            SpectralProfile pp = multiply_profile(prof, prof2.psi, "product");
            InverseFN target = inverse_FN(model, pp, grid);
            auto pts = group_points(model, c.integer("convolution_points", 6), 0.5, 2.0, cx.seed + 11);
            std::vector<double> err(pts.size()), mag(pts.size());
            parallel_for(pts.size(), [&](std::size_t i) {
                cplx want = target.f(pts[i]);
                err[i] = std::abs(conv(pts[i]) - want);
                mag[i] = std::abs(want);
            });
            auto [e, k] = arg_max(err);
            double scale = *std::max_element(mag.begin(), mag.end());
            cx.check("convolution", scale > 0.0 ? e / scale : e, 1e-4, true, point_str(pts[k]));
        }
    }

    std::optional<ExtensionResult> extA, extB;
    auto ext = [&](Route r) -> const ExtensionResult& {
        auto& slot = r == Route::A ? extA : extB;
        if (!slot) slot = make_extension(model, prof, r, RouteASpec{c.num("route_a_x_half", 400.0), c.num("route_a_x_step", 1.0)});
        return *slot;
    };

    if (has("routes")) {
        SweepBox box{c.num("route_zeta_max", 1.0), c.num("route_re_z_max", 5.0), c.num("route_rho_lo", -1.0),
                     c.num("route_rho_hi", 1.0), true};
        auto pts = sweep_points(model, box, c.integer("route_points", 200), cx.seed + 21);
        const auto& A = ext(Route::A);
        const auto& B = ext(Route::B);
        std::vector<double> err(pts.size()), mag(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            cplx b = B.f(pts[i].zeta, pts[i].z);
            err[i] = std::abs(A.f(pts[i].zeta, pts[i].z) - b);
            mag[i] = std::abs(b);
        });
        auto [e, k] = arg_max(err);
        double scale = *std::max_element(mag.begin(), mag.end());
        cx.check("routes", scale > 0.0 ? e / scale : e, 1e-5, true, point_str(pts[k]));
    }

    if (has("boundary") || has("cr")) {
        auto pts = group_points(model, c.integer("boundary_points", 50), 1.0, 5.0, cx.seed + 31);
        if (has("boundary")) {
            for (Route r : {Route::A, Route::B}) {
                const auto& E = ext(r);
                std::vector<double> err(pts.size()), mag(pts.size());
                parallel_for(pts.size(), [&](std::size_t i) {
                    AmbientPoint a = embed(model, pts[i]);
                    cplx want = inv.f(pts[i]);
                    err[i] = std::abs(E.f(a.zeta, a.z) - want);
                    mag[i] = std::abs(want);
                });
                auto [e, k] = arg_max(err);
                double scale = *std::max_element(mag.begin(), mag.end());
                cx.check(r == Route::A ? "boundary_A" : "boundary_B", scale > 0.0 ? e / scale : e, 1e-6, true,
                         point_str(pts[k]));
            }
        }
        if (has("cr")) cx.check("cr", cr_residual(model, inv.f, pts, c.num("h", 1e-4)), 1e-5);
    }

    if (has("margin")) {
        SweepBox box{c.num("margin_zeta_max", 3.0), c.num("margin_re_z_max", 5.0), c.num("margin_im_lo", -4.0),
                     c.num("margin_im_hi", 4.0), false};
        auto pts = sweep_points(model, box, c.integer("margin_points", 400), cx.seed + 41);
        const int N = c.integer("margin_N", 3);
        MarginResult mr = pw_margin(model, ext(Route::B).f, prof.K, N, pts);
        Table& tab = cx.table("margin", {"N", "margin", "margin_linear", "clamped"});
        cx.row(tab, {std::to_string(N), fmt(mr.margin), fmt(mr.margin_linear), std::to_string(mr.clamped)});
        cx.check("margin", mr.finite ? mr.margin : std::numeric_limits<double>::infinity(), 1e12, true,
                 point_str(mr.witness));
    }

    if (has("decay")) {
        std::vector<double> hv = c.list("decay_h", std::vector<double>(std::size_t(m), 0.5));
        RVec h = Eigen::Map<RVec>(hv.data(), Eigen::Index(hv.size()));
        auto pts = group_points(model, c.integer("decay_points", 40), 1.0, 5.0, cx.seed + 51);
        const int count = c.integer("decay_count", 4);
        auto seq = decay_sequence(model, prof, h, c.integer("decay_N1", 2), c.integer("decay_N3", 2), count, pts);
        Table& tab = cx.table("decay", {"j", "sup"});
        double rise = 0.0;
        for (std::size_t j = 0; j < seq.size(); ++j) {
            cx.row(tab, {std::to_string(j), fmt(seq[j])});
            if (j > 0) rise = std::max(rise, (seq[j] - seq[j - 1]) / seq[0]);
            if (!std::isfinite(seq[j])) rise = std::numeric_limits<double>::infinity();
        }
        cx.check("decay_nonincreasing", rise, 1e-9);
    }
}

// g(zeta, x) = exp(-|zeta|^2) (2 pi)^{-1} int psi(lambda) e^{i lambda x} d lambda; not CR.
SampledFunction euclidean_control(const QuadraticModel& model, const SpectralProfile& p, GridSpec g) {
    require(model.m() == 1, "euclidean control: m = 1 only");
    Rule r = gauss_legendre(512, p.lo(0), p.hi(0));
    std::vector<cplx> w(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = r.weights[i] * p.psi(RVec::Constant(1, r.nodes[i])) / (2.0 * kPi);
    std::vector<double> nodes = r.nodes;
    auto line = [w, nodes](double x) {
        std::vector<cplx> t(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) t[i] = w[i] * std::polar(1.0, nodes[i] * x);
        return pairwise_sum(t);
    };
    auto eval = [line](const CVec& z, const RVec& x) { return std::exp(-z.squaredNorm()) * line(x(0)); };
    return SampledFunction(model.n(), 1, eval, g);
}

// crcheck: outside-P spectral mass of CR examples, and the non-CR control.
void run_crcheck(Ctx& cx) {
    const auto& c = cx.c;
    QuadraticModel model = case_model(c, cx.seed);
    const int m = model.m();
    SpectralProfile prof = case_profile(c);
    GridSpec grid = case_grid(c, GridSpec{5.2, 400.0, 27, 401});
    const std::string expect = c.str("expect", "cr");
    const double lh = c.num("lambda_half", 4.0);
    Rule axis = simpson(c.integer("lambda_nodes", 161), -lh, lh);
    std::vector<CVec> stencil;
    {
        Sampler s(cx.seed);
        stencil.push_back(CVec::Zero(model.n()));
        for (int i = 0, k = c.integer("stencil", 3); i < k; ++i) stencil.push_back(s.ball(model.n(), 1.0));
    }
    const double xh = c.num("x_half", 400.0), xs = c.num("x_step", 1.0);
    auto inP = [&model](const RVec& l) { return P_contains(model, l); };
    auto pts = group_points(model, c.integer("points", 50), 1.0, 5.0, cx.seed + 61);
    const double h = c.num("h", 1e-4);
    Table& tab = cx.table("support", {"expect", "outside_fraction", "cr_residual"});
    if (expect == "cr") {
        InverseFN inv = inverse_FN(model, prof, grid);
        SupportProfile sp = spectrum_support(model, inv.f, axis, stencil, inP, xh, xs);
        double res = cr_residual(model, inv.f, pts, h);
        cx.row(tab, {expect, fmt(sp.outside_fraction), fmt(res)});
        cx.check("outside_mass", sp.outside_fraction, 1e-4);
        cx.check("cr", res, 1e-5);
    } else if (expect == "control") {
        SampledFunction g = euclidean_control(model, prof, grid);
        SupportProfile sp = spectrum_support(model, g, axis, stencil, inP, xh, xs);
        double res = cr_residual(model, g, pts, h);
        cx.row(tab, {expect, fmt(sp.outside_fraction), fmt(res)});
        cx.check("control_residual", res, 1e-1, false);
        cx.check("control_outside_mass", sp.outside_fraction, 0.5, false);
        // Euclidean Paley-Wiener bound along x at the stencil points
        const int N = c.integer("margin_N", 3);
        double worst = 0.0;
        const int cnt = int(std::lround(2.0 * xh / xs)) + 1;
        for (const auto& z : stencil)
            for (int i = 0; i < cnt; ++i) {
                RVec x = RVec::Constant(m, -xh + xs * i);
                worst = std::max(worst, std::abs(g(z, x)) * std::pow(1.0 + x.norm(), N));
            }
        cx.check("control_margin", std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity(), 1e12);
    } else {
        throw ParseError(c.name + ": expect must be 'cr' or 'control'");
    }
}

double unit_bump_peak_over_mass() {
    Rule r = gauss_legendre(800, -1.0, 1.0);
    std::vector<double> t(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        double s = r.nodes[i] * r.nodes[i];
        t[i] = r.weights[i] * std::exp(-1.0 / (1.0 - s));
    }
    return std::exp(-1.0) / pairwise_sum(t);
}

double grid_l2_sq(const SampledFunction& f) {
    const GridSpec& g = f.grid();
    const int n = f.n(), m = f.m();
    Rule ax = grid_axis(g.L_E, g.n_E), fx = grid_axis(g.L_F, g.n_F);
    XGrid xg;
    xg.origin = RVec::Constant(m, -g.L_F);
    xg.step = RVec::Constant(m, fx.nodes.size() > 1 ? fx.nodes[1] - fx.nodes[0] : 1.0);
    xg.counts.assign(std::size_t(m), g.n_F);
    std::vector<double> wx(xg.size(), 1.0);
    for (std::size_t t = 0; t < xg.size(); ++t) {
        std::size_t r = t;
        for (int d = m - 1; d >= 0; --d) {
            wx[t] *= fx.weights[r % g.n_F];
            r /= g.n_F;
        }
    }
    std::size_t nz = 1;
    for (int a = 0; a < 2 * n; ++a) nz *= std::size_t(g.n_E);
    std::vector<double> parts(nz);
    parallel_for(nz, [&](std::size_t zi) {
        std::size_t r = zi;
        CVec z(n);
        double w = 1.0;
        std::vector<double> re(2 * n);
        for (int a = 2 * n - 1; a >= 0; --a) {
            re[a] = ax.nodes[r % g.n_E];
            w *= ax.weights[r % g.n_E];
            r /= g.n_E;
        }
        for (int j = 0; j < n; ++j) z(j) = cplx(re[2 * j], re[2 * j + 1]);
        std::vector<cplx> v(xg.size());
        f.sample_x(z, xg, v.data());
        std::vector<double> t(xg.size());
        for (std::size_t i = 0; i < xg.size(); ++i) t[i] = wx[i] * std::norm(v[i]);
        parts[zi] = w * pairwise_sum(t);
    });
    return pairwise_sum(parts);
}

// windows: sandwich, empty erosion, derivative bound, L2 convergence of f_eps, bandlimit projection.
void run_windows(Ctx& cx) {
    const auto& c = cx.c;
    ConvexBody K = load_body(c.ref("body"));
    const int m = K.dim();
    std::vector<double> eps = c.list("eps", {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125});
    const int samples = c.integer("samples", m == 1 ? 4001 : 101);
    Table& tab = cx.table("windows", {"eps", "kind", "sandwich_violation", "derivative_ratio", "l2_relative"});

    double worst_sw = 0.0, worst_ratio = 0.0;
    std::string wit_sw;
    std::vector<double> l2;
    const bool do_l2 = c.has("profile");
    std::optional<SpectralProfile> prof;
    std::optional<QuadraticModel> model;
    double base = 0.0;
    GridSpec grid = case_grid(c, GridSpec{5.2, 400.0, 27, 401});
    if (do_l2) {
        prof = case_profile(c);
        model = case_model(c, cx.seed);
        base = grid_l2_sq(inverse_FN(*model, *prof, grid).f);
    }
    const double peak = unit_bump_peak_over_mass();
    for (double e : eps) {
        SpectralProfile w = spectral_window(K, e);
        double v = window_sandwich_violation(K, e, w, samples);
        if (!(v <= worst_sw)) {
            worst_sw = v;
            wit_sw = "eps=" + fmt(e);
        }
        double ratio = 0.0;
        if (m == 1 && w.kind == "window") {
            // max |tau'| by central differences against (4/eps) ||psi_1'||_1 = (4/eps) 2 psi_1(0)
            const int q = 20001;
            const double lo = w.lo(0), hi = w.hi(0), dx = (hi - lo) / (q - 1), hd = 1e-3 * dx;
            double best = 0.0;
            for (int i = 0; i < q; ++i) {
                double l = lo + dx * i;
                double d = (w.psi(RVec::Constant(1, l + hd)).real() - w.psi(RVec::Constant(1, l - hd)).real()) / (2 * hd);
                best = std::max(best, std::abs(d));
            }
            ratio = best / ((4.0 / e) * 2.0 * peak);
            worst_ratio = std::max(worst_ratio, ratio);
        }
        double rel = std::numeric_limits<double>::quiet_NaN();
        if (do_l2) {
            SpectralProfile diff = multiply_profile(*prof, [w](const RVec& l) { return w.psi(l) - 1.0; }, "window-defect");
            rel = std::sqrt(grid_l2_sq(inverse_FN(*model, diff, grid).f) / base);
            l2.push_back(rel);
        }
        cx.row(tab, {fmt(e), w.kind, fmt(v), fmt(ratio), fmt(rel)});
    }
    cx.check("sandwich", worst_sw, 1e-10, true, wit_sw);

    // erosion past the inradius leaves the empty window
    for (double e : c.list("empty_eps", {})) {
        SpectralProfile w = spectral_window(K, e);
        double mx = 0.0;
        RVec lo = K.bbox_lo(), hi = K.bbox_hi();
        Sampler s(cx.seed + 71);
        for (int i = 0; i < 1000; ++i) {
            RVec l(m);
            for (int d = 0; d < m; ++d) l(d) = s.uniform(lo(d), hi(d));
            mx = std::max(mx, std::abs(w.psi(l)));
        }
        cx.check("empty_window", mx, 1e-300, true, "eps=" + fmt(e) + " kind=" + w.kind);
    }
    if (m == 1) cx.check("derivative_ratio", worst_ratio, 1.01);
    if (do_l2) {
        double rise = 0.0;
        for (std::size_t i = 1; i < l2.size(); ++i) rise = std::max(rise, l2[i] - l2[i - 1]);
        cx.check("l2_decreasing", rise, 1e-12);
        cx.check("l2_final", l2.back(), 1e-3);
    }
    if (c.has("narrow_profile")) {
        // f with spectrum where the window equals 1 is fixed by the projection
        QuadraticModel md = case_model(c, cx.seed);
        SpectralProfile narrow = case_profile(c, "narrow_profile");
        GridSpec g2 = case_grid(c, GridSpec{5.2, 1000.0, 27, 801}, "bl_");
        SampledFunction f = inverse_FN(md, narrow, g2).f;
        SampledFunction fe = bandlimit_project(md, f, spectral_window(K, c.num("bandlimit_eps", 0.4)), g2);
        auto pts = group_points(md, c.integer("bandlimit_points", 3), 0.5, 2.0, cx.seed + 81);
        std::vector<double> err(pts.size()), mag(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            cplx want = f(pts[i]);
            err[i] = std::abs(fe(pts[i]) - want);
            mag[i] = std::abs(want);
        });
        auto [e, k] = arg_max(err);
        double scale = *std::max_element(mag.begin(), mag.end());
        cx.check("bandlimit", scale > 0.0 ? e / scale : e, 1e-4, true, point_str(pts[k]));
    }
}

RMat random_orthonormal(Sampler& s, int rows, int cols) {
    RMat G(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) G(i, j) = s.nd(s.rng);
    Eigen::HouseholderQR<RMat> qr(G);
    return qr.householderQ() * RMat::Identity(rows, cols);
}

// convex: projection identity, cone constants, bipolar membership.
void run_convex(Ctx& cx) {
    const auto& c = cx.c;
    Sampler s(cx.seed);
    const std::string kind = c.str("kind", "all");
    auto want = [&](const std::string& k) { return kind == "all" || kind == k; };
    if (want("projection")) {
        const int m = c.integer("dim", 3), r = c.integer("subspace_dim", 2);
        double worst = 0.0;
        for (int trial = 0; trial < c.integer("trials", 10); ++trial) {
            std::vector<RVec> v;
            for (int i = 0; i < c.integer("vertices", 10); ++i) v.push_back(s.normal(m));
            ConvexBody K = ConvexBody::polytope(v);
            RMat B = random_orthonormal(s, m, r);
            ConvexBody K1 = project_body(K, B);
            for (int i = 0; i < 100; ++i) {
                RVec cc = s.normal(r);
                worst = std::max(worst, std::abs(support_function(K, B * cc) - support_function(K1, cc)));
            }
        }
        cx.check("projection_identity", worst, 1e-12);
    }
    if (want("cone")) {
        const int samples = c.integer("samples", 10000);
        ConvexBody quad = ConvexBody::cone({RVec::Unit(2, 0), RVec::Unit(2, 1)});
        ConvexBody ray = ConvexBody::cone({RVec::Ones(1)});
        double Cq = cone_inequality_constant(quad, samples, cx.seed + 1);
        double Cr = cone_inequality_constant(ray, samples, cx.seed + 2);
        Table& tab = cx.table("cone_constants", {"cone", "constant"});
        cx.row(tab, {"quadrant", fmt(Cq)});
        cx.row(tab, {"ray", fmt(Cr)});
        cx.check("quadrant_constant", std::abs(Cq - c.num("quadrant_expected", 1.0 / std::sqrt(2.0))), 5e-2, true,
                 "C=" + fmt(Cq));
        cx.check("quadrant_constant_positive", Cq, 1e-12, false);
        cx.check("ray_constant", std::abs(Cr - 1.0), 1e-12, true, "C=" + fmt(Cr));
    }
    if (want("bipolar")) {
        const int samples = c.integer("samples_bipolar", 1000);
        // polytope containing 0 in its interior
        std::vector<RVec> A;
        for (int i = 0; i < 12; ++i) A.push_back(s.normal(3));
        for (int i = 0; i < 3; ++i) {
            A.push_back(RVec::Unit(3, i));
            A.push_back(-RVec::Unit(3, i));
        }
        ConvexBody hull = ConvexBody::polytope(A);
        PolarBody twice = polar(polar_vertices(A), false);
        int bad = 0;
        RVec lo = hull.bbox_lo() * 1.2, hi = hull.bbox_hi() * 1.2;
        for (int i = 0; i < samples; ++i) {
            RVec v(3);
            for (int d = 0; d < 3; ++d) v(d) = s.uniform(lo(d), hi(d));
            if (hull.contains(v, 1e-12) != twice.contains(v, 1e-12)) ++bad;
        }
        cx.check("bipolar_polytope", bad, 0.5, true, "disagreements of " + std::to_string(samples));
        std::vector<RVec> G;
        for (int i = 0; i < 5; ++i) G.push_back(s.normal(3).cwiseAbs() + RVec::Constant(3, 0.1));
        ConvexBody cone = ConvexBody::cone(G);
        PolarBody ctwice = polar(polar(G, true).cone_generators(), true);
        int cbad = 0;
        for (int i = 0; i < samples; ++i) {
            RVec v = s.normal(3);
            if (cone.contains(v, 1e-12) != ctwice.contains(v, 1e-12)) ++cbad;
        }
        cx.check("bipolar_cone", cbad, 0.5, true, "disagreements of " + std::to_string(samples));
    }
}

RVec centroid_of(const ConvexBody& K) {
    RVec s = RVec::Zero(K.dim());
    for (const auto& v : K.vertices()) s += v;
    return s / double(K.vertices().size());
}

// split: SplitData invariants, the reduced model, flat embedding, growth along the flat directions.
void run_split(Ctx& cx) {
    const auto& c = cx.c;
    QuadraticModel model = case_model(c, cx.seed);
    ConvexBody K = load_body(c.ref("body"));
    SplitData s = split(model, K);
    SplitInvariants inv = check_split(model, K, s, c.integer("samples", 200), cx.seed);
    cx.check("phi_difference", inv.phi_difference, 1e-12);
    cx.check("normality", inv.normality, 1e-12);
    cx.check("pairing", inv.pairing, 1e-12);
    cx.check("hk_invariance", inv.hk_invariance, 1e-12);

    std::vector<double> dims{double(s.F1_basis.cols()), double(s.F2_basis.cols()), double(s.E1_basis.cols()),
                             double(s.E2_basis.cols())};
    Table& tab = cx.table("split", {"dim_F1", "dim_F2", "dim_E1", "dim_E2"});
    cx.row(tab, {fmt(dims[0]), fmt(dims[1]), fmt(dims[2]), fmt(dims[3])});
    if (c.has("expect_dims")) {
        auto ex = c.list("expect_dims", {});
        if (ex.size() != 4) throw ParseError(c.name + ": expect_dims needs 4 entries");
        double bad = 0;
        for (int i = 0; i < 4; ++i) bad += std::abs(ex[i] - dims[i]);
        cx.check("dimensions", bad, 0.5);
    }

    // K in the reduced coordinates meets Lambda_+ of the reduced model
    RVec l0 = s.F2_basis.transpose() * centroid_of(K);
    bool ok = lambda_plus_contains(s.phi2, l0);
    for (const auto& v : K.vertices()) ok = ok && P_contains(s.phi2, s.F2_basis.transpose() * v);
    cx.check("reduced_lambda_plus", ok ? 0.0 : 1.0, 0.5);

    // e^{i <l0, z2>} on N_2, pulled back
    const QuadraticModel& m2 = s.phi2;
    SampledFunction f2(
        m2.n(), m2.m(),
        [m2, l0](const CVec& z, const RVec& x) { return std::exp(cplx(-l0.dot(m2.phi(z)), l0.dot(x))); });
    SampledFunction f = embed_flat(s, f2);
    auto pts = group_points(model, c.integer("points", 50), 1.0, 3.0, cx.seed + 91);
    cx.check("embed_cr", cr_residual(model, f, pts, c.num("h", 1e-4)), 1e-6);

    AmbientEval g2 = [l0](const CVec&, const CVec& z) {
        cplx a = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) a += l0(i) * z(i);
        return std::exp(kI * a);
    };
    AmbientEval g = embed_flat(s, g2);
    const int degree = c.integer("growth_degree", 0);
    if (degree == 1) {
        require(s.E1_basis.cols() > 0, "growth_degree 1 needs a nonzero E_{K,1}");
        CVec u = s.E1_basis.col(0);
        g = [g, u](const CVec& z, const CVec& w) { return g(z, w) * u.dot(z); };
    } else if (degree != 0) {
        throw ParseError(c.name + ": growth_degree must be 0 or 1");
    }
    auto base = sweep_points(model, SweepBox{0.5, 1.0, -0.5, 0.5, false}, c.integer("growth_base", 4), cx.seed + 101);
    std::vector<double> radii = c.list("growth_radii", {2.0, 4.0, 8.0, 16.0, 32.0});
    GrowthReport gr = verify_split_growth(model, s, g, base, radii, degree);
    Table& gt = cx.table("growth", {"radius", "max_abs"});
    for (std::size_t i = 0; i < gr.radii.size(); ++i) cx.row(gt, {fmt(gr.radii[i]), fmt(gr.max_abs[i])});
    cx.check("growth_slope", std::abs(gr.slope - degree), 0.25, true, "slope=" + fmt(gr.slope));
    cx.check("growth_exponential", gr.exponential ? 1.0 : 0.0, 0.5);
}

}  // namespace

Report run_subcommand(const std::string& subcommand, const Scenario& scenario) {
    Report rep;
    rep.subcommand = subcommand;
    rep.scenario = scenario.path.string();
    rep.seed = scenario.seed;
    std::function<void(Ctx&)> fn;
    if (subcommand == "spectral") fn = run_spectral;
    else if (subcommand == "plancherel") fn = run_plancherel;
    else if (subcommand == "rockland") fn = run_rockland;
    else if (subcommand == "extend") fn = run_extend;
    else if (subcommand == "crcheck") fn = run_crcheck;
    else if (subcommand == "windows") fn = run_windows;
    else if (subcommand == "split") fn = run_split;
    else if (subcommand == "convex") fn = run_convex;
    else throw ParseError("unknown subcommand '" + subcommand + "'");
    for (std::size_t i = 0; i < scenario.cases.size(); ++i) {
        Ctx cx{rep, scenario.cases[i], case_seed(scenario.seed, i)};
        fn(cx);
    }
    return rep;
}

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

void write_csv(const std::filesystem::path& p, std::uint64_t seed, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << "# seed=" << seed << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_cell(header[i]);
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_cell(r[i]);
        out << "\n";
    }
}

}  // namespace

void write_report(const Report& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::vector<std::string>> rows;
    for (const auto& k : report.checks) {
        if (k.timing) continue;
        rows.push_back({k.case_name, k.name, fmt(k.value), fmt(k.tolerance), k.upper ? "upper" : "lower",
                        k.passed ? "pass" : "fail", k.witness});
    }
    write_csv(dir / (report.subcommand + ".csv"), report.seed,
              {"case", "check", "value", "tolerance", "bound", "status", "witness"}, rows);
    for (const auto& t : report.tables)
        write_csv(dir / (report.subcommand + "_" + t.name + ".csv"), report.seed, t.header, t.rows);

    nlohmann::ordered_json j;
    j["subcommand"] = report.subcommand;
    j["scenario"] = report.scenario;
    j["seed"] = report.seed;
    j["passed"] = report.passed();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& k : report.checks) {
        nlohmann::ordered_json e;
        e["case"] = k.case_name;
        e["check"] = k.name;
        e["value"] = std::isfinite(k.value) ? nlohmann::ordered_json(k.value) : nlohmann::ordered_json(fmt(k.value));
        e["tolerance"] = k.tolerance;
        e["bound"] = k.upper ? "upper" : "lower";
        e["passed"] = k.passed;
        if (!k.witness.empty()) e["witness"] = k.witness;
        j["checks"].push_back(e);
    }
    std::ofstream out(dir / (report.subcommand + ".json"), std::ios::binary);
    if (!out) throw Error("cannot write JSON summary");
    out << j.dump(2) << "\n";
}

}  // namespace qcr

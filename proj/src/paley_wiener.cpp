#include "qcr/paley_wiener.hpp"

#include "qcr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

namespace qcr {

namespace {

constexpr std::size_t kNodeCap = std::size_t(1) << 14;
constexpr double kAdaptTol = 1e-8;
constexpr double kHClamp = 40.0;

double bump_core(double s) { return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0; }

// Tensor Gauss-Legendre levels over a box, masked to a support predicate, with
// per-node weight factors; levels are built on first use.
class LevelRules {
public:
    struct Level {
        std::vector<RVec> lambdas;
        std::vector<cplx> W;
        std::vector<CMat> B;  // sqrt(mu)-scaled E_lambda basis: Phi_lambda(zeta) = |B^H zeta|^2
    };
    using Weight = std::function<cplx(const RVec&, double gl_weight)>;

    LevelRules(RVec lo, RVec hi, int base, Weight weight, std::function<bool(const RVec&)> mask,
               const QuadraticModel* model_for_phi)
        : lo_(std::move(lo)), hi_(std::move(hi)), base_(base), weight_(std::move(weight)), mask_(std::move(mask)) {
        if (model_for_phi) model_.emplace_back(*model_for_phi);
        const int m = int(lo_.size());
        max_level_ = 0;
        for (int j = 1; j < 20; ++j) {
            double total = std::pow(double(base_ << j), m);
            if (total > double(kNodeCap)) break;
            max_level_ = j;
        }
        levels_.resize(max_level_ + 1);
    }

    int max_level() const { return max_level_; }
    int dim() const { return int(lo_.size()); }
    double half(int d) const { return 0.5 * (hi_(d) - lo_(d)); }

    int start_level(double rate) const {
        double need = rate + 32.0;
        int j = 0;
        while (j < max_level_ && double(base_ << j) < need) ++j;
        return j;
    }

    const Level& level(int j) {
        std::lock_guard<std::mutex> lock(mu_);
        if (!levels_[j]) levels_[j] = std::make_unique<Level>(build(j));
        return *levels_[j];
    }

private:
    Level build(int j) const {
        const int m = dim();
        const int q = base_ << j;
        std::vector<Rule> axes;
        for (int d = 0; d < m; ++d) axes.push_back(gauss_legendre(q, lo_(d), hi_(d)));
        std::size_t total = 1;
        for (int d = 0; d < m; ++d) total *= std::size_t(q);
        Level L;
        for (std::size_t t = 0; t < total; ++t) {
            std::size_t r = t;
            RVec lam(m);
            double w = 1.0;
            for (int d = m - 1; d >= 0; --d) {
                int k = int(r % q);
                r /= q;
                lam(d) = axes[d].nodes[k];
                w *= axes[d].weights[k];
            }
            if (!mask_(lam)) continue;
            cplx W = weight_(lam, w);
            if (W == cplx(0.0)) continue;
            L.lambdas.push_back(lam);
            L.W.push_back(W);
            if (!model_.empty()) {
                SpectralData sd = spectral_data(model_.front(), lam);
                CMat B = sd.basis;
                for (int c = 0; c < sd.k(); ++c) B.col(c) *= std::sqrt(sd.mu(c));
                L.B.push_back(B);
            }
        }
        return L;
    }

    RVec lo_, hi_;
    int base_;
    Weight weight_;
    std::function<bool(const RVec&)> mask_;
    std::vector<QuadraticModel> model_;
    int max_level_ = 0;
    std::mutex mu_;
    std::vector<std::unique_ptr<Level>> levels_;
};

// Sum over a level of W_i g(i), with the L^1 scale sum |W_i g(i)|.
template <class G>
std::pair<cplx, double> level_sum(const LevelRules::Level& L, G&& g) {
    std::vector<cplx> terms(L.W.size());
    std::vector<double> mags(L.W.size());
    for (std::size_t i = 0; i < L.W.size(); ++i) {
        terms[i] = L.W[i] * g(L, i);
        mags[i] = std::abs(terms[i]);
    }
    return {pairwise_sum(terms), pairwise_sum(mags)};
}

// Doubles the level until successive values agree to kAdaptTol times the L^1 scale.
template <class G>
cplx adaptive_sum(LevelRules& rules, double rate, G&& g, int* level_out = nullptr) {
    int j = rules.start_level(rate);
    auto [v0, s0] = level_sum(rules.level(j), g);
    while (j < rules.max_level()) {
        auto [v1, s1] = level_sum(rules.level(j + 1), g);
        ++j;
        if (std::abs(v1 - v0) <= kAdaptTol * std::max(s0, s1)) {
            v0 = v1;
            break;
        }
        v0 = v1;
        s0 = s1;
    }
    if (level_out) *level_out = j;
    return v0;
}

double pfaffian_of(const QuadraticModel& model, const RVec& lam) { return spectral_data(model, lam).pfaffian; }

double fn_constant(const QuadraticModel& model) {
    return std::pow(2.0, model.n() - model.m()) / std::pow(kPi, model.n() + model.m());
}

std::shared_ptr<LevelRules> profile_rules(const QuadraticModel& model, const SpectralProfile& p, bool with_phi) {
    const double c = fn_constant(model);
    auto psi = p.psi;
    QuadraticModel mdl = model;
    auto weight = [mdl, psi, c](const RVec& lam, double w) -> cplx {
        cplx v = psi(lam);
        if (v == cplx(0.0)) return 0.0;
        return c * w * v * pfaffian_of(mdl, lam);
    };
    auto mask = [](const RVec&) { return true; };
    return std::make_shared<LevelRules>(p.lo, p.hi, p.nodes, weight, mask, with_phi ? &model : nullptr);
}

double max_rate(const LevelRules& R, const RVec& a, const RVec& b = RVec(), const RVec& c = RVec()) {
    double rate = 0.0;
    for (int d = 0; d < R.dim(); ++d) {
        double s = std::abs(a(d));
        if (b.size()) s += std::abs(b(d));
        if (c.size()) s += std::abs(c(d));
        rate = std::max(rate, R.half(d) * s);
    }
    return rate;
}

XGrid symmetric_grid(int m, double half, double step) {
    XGrid g;
    int count = int(std::llround(2.0 * half / step)) + 1;
    g.origin = RVec::Constant(m, -half);
    g.step = RVec::Constant(m, step);
    g.counts.assign(m, count);
    return g;
}

std::vector<double> grid_weights(const XGrid& g) {
    const int m = int(g.counts.size());
    std::vector<double> w(g.size(), 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::size_t r = i;
        for (int d = m - 1; d >= 0; --d) {
            std::size_t k = r % std::size_t(g.counts[d]);
            r /= std::size_t(g.counts[d]);
            double wd = std::abs(g.step(d));
            if (k == 0 || k + 1 == std::size_t(g.counts[d])) wd *= 0.5;
            w[i] *= wd;
        }
    }
    return w;
}

// out[idx] += base * exp(i sign <lambda, x_idx>) over a tensor grid, by per-axis recurrences.
void accumulate_exponential(const RVec& lam, cplx base, const XGrid& g, double sign, cplx* out) {
    const int m = int(g.counts.size());
    if (m == 1) {
        cplx cur = base * std::polar(1.0, sign * lam(0) * g.origin(0));
        const cplx rot = std::polar(1.0, sign * lam(0) * g.step(0));
        for (int k = 0; k < g.counts[0]; ++k) {
            out[k] += cur;
            cur *= rot;
        }
        return;
    }
    std::vector<cplx> acc(1, base);
    for (int d = 0; d < m; ++d) {
        std::vector<cplx> T(g.counts[d]);
        cplx cur = std::polar(1.0, sign * lam(d) * g.origin(d));
        const cplx rot = std::polar(1.0, sign * lam(d) * g.step(d));
        for (int k = 0; k < g.counts[d]; ++k) {
            T[k] = cur;
            cur *= rot;
        }
        std::vector<cplx> next(acc.size() * T.size());
        for (std::size_t a = 0; a < acc.size(); ++a)
            for (std::size_t k = 0; k < T.size(); ++k) next[a * T.size() + k] = acc[a] * T[k];
        acc.swap(next);
    }
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] += acc[i];
}

// sum_x w_x g(x) exp(-i <lambda, x>) for grid samples g.
cplx euclidean_ft(const RVec& lam, const XGrid& g, const std::vector<double>& w, const std::vector<cplx>& samples) {
    const int m = int(g.counts.size());
    if (m == 1) {
        cplx cur = std::polar(1.0, -lam(0) * g.origin(0));
        const cplx rot = std::polar(1.0, -lam(0) * g.step(0));
        std::vector<cplx> terms(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k) {
            terms[k] = w[k] * samples[k] * cur;
            cur *= rot;
        }
        return pairwise_sum(terms);
    }
    std::vector<cplx> kernel(g.size(), 0.0);
    accumulate_exponential(lam, 1.0, g, -1.0, kernel.data());
    std::vector<cplx> terms(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) terms[k] = w[k] * samples[k] * kernel[k];
    return pairwise_sum(terms);
}

bool all_in_P(const QuadraticModel& model, const ConvexBody& K) {
    for (const auto& v : K.vertices())
        if (!P_contains(model, v)) return false;
    return true;
}

RVec centroid(const ConvexBody& K) {
    RVec c = RVec::Zero(K.dim());
    for (const auto& v : K.vertices()) c += v;
    return c / double(K.vertices().size());
}

}  // namespace

SpectralProfile bump_profile(const ConvexBody& K, const RVec& center, double radius, std::vector<double> poly) {
    require(radius > 0.0, "bump profile: radius > 0");
    require(center.size() == K.dim(), "bump profile: center dimension");
    require(!K.is_empty() && K.has_interior() && !K.is_cone(), "bump profile: K must be a polytope with interior");
    require(boundary_distance(K, center) >= radius * (1.0 - 1e-12), "bump profile: ball must lie in K");
    require(!poly.empty(), "bump profile: empty polynomial");
    SpectralProfile p;
    p.K = K;
    p.lo = center.array() - radius;
    p.hi = center.array() + radius;
    p.kind = "bump";
    p.psi = [center, radius, poly](const RVec& lam) -> cplx {
        double s = (lam - center).squaredNorm() / (radius * radius);
        if (s >= 1.0) return 0.0;
        double P = 0.0;
        for (auto it = poly.rbegin(); it != poly.rend(); ++it) P = P * s + *it;
        return P * bump_core(s);
    };
    return p;
}

SpectralProfile zero_profile(const ConvexBody& K) {
    SpectralProfile p;
    p.K = K;
    p.lo = RVec::Zero(K.dim());
    p.hi = RVec::Ones(K.dim());
    p.kind = "zero";
    p.psi = [](const RVec&) { return cplx(0.0); };
    return p;
}

SpectralProfile multiply_profile(const SpectralProfile& p, std::function<cplx(const RVec&)> factor, std::string kind) {
    SpectralProfile q = p;
    auto psi = p.psi;
    q.psi = [psi, factor](const RVec& lam) {
        cplx v = psi(lam);
        return v == cplx(0.0) ? v : v * factor(lam);
    };
    q.kind = std::move(kind);
    return q;
}

ProfileCheck validate_profile(const SpectralProfile& p, int samples_per_dim) {
    ProfileCheck r;
    const int m = int(p.lo.size());
    RVec lo = p.lo, hi = p.hi;
    if (!p.K.is_empty() && !p.K.is_cone()) {
        lo = lo.cwiseMin(p.K.bbox_lo());
        hi = hi.cwiseMax(p.K.bbox_hi());
    }
    RVec pad = 0.1 * (hi - lo) + RVec::Constant(m, 1e-3);
    lo -= pad;
    hi += pad;
    const int q = samples_per_dim;
    std::size_t total = 1;
    for (int d = 0; d < m; ++d) total *= q;
    RVec step = (hi - lo) / double(q - 1);
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t rr = t;
        RVec lam(m);
        for (int d = m - 1; d >= 0; --d) {
            lam(d) = lo(d) + step(d) * double(rr % q);
            rr /= q;
        }
        cplx v = p.psi(lam);
        if (!std::isfinite(std::abs(v))) {
            r.max_derivative = std::numeric_limits<double>::infinity();
            continue;
        }
        if (p.K.is_empty() || !p.K.contains(lam)) r.max_outside = std::max(r.max_outside, std::abs(v));
        for (int d = 0; d < m; ++d) {
            RVec l2 = lam;
            l2(d) += step(d);
            r.max_derivative = std::max(r.max_derivative, std::abs(p.psi(l2) - v) / step(d));
        }
    }
    r.ok = r.max_outside <= 1e-14 && std::isfinite(r.max_derivative);
    return r;
}

bool profile_in_closed_cone(const QuadraticModel& model, const ConvexBody& K) {
    if (K.is_empty() || !K.has_interior()) return false;
    if (!all_in_P(model, K)) return false;
    if (K.is_cone()) {
        RVec s = RVec::Zero(K.dim());
        for (const auto& g : K.vertices()) s += g.normalized();
        return lambda_plus_contains(model, s);
    }
    return lambda_plus_contains(model, centroid(K));
}

InverseFN inverse_FN(const QuadraticModel& model, const SpectralProfile& profile, GridSpec grid) {
    require(profile.lo.size() == model.m() && profile.hi.size() == model.m(), "inverse_FN: profile dimension");
    InverseFN out;
    out.cr_guaranteed = profile_in_closed_cone(model, profile.K);
    if (!out.cr_guaranteed) out.warning = "K is not contained in the closure of Lambda_+ or misses Lambda_+";
    auto rules = profile_rules(model, profile, false);
    QuadraticModel mdl = model;
    auto eval = [rules, mdl](const CVec& zeta, const RVec& x) -> cplx {
        RVec ph = mdl.phi(zeta);
        return adaptive_sum(*rules, max_rate(*rules, x, ph), [&](const LevelRules::Level& L, std::size_t i) {
            const RVec& lam = L.lambdas[i];
            return std::exp(cplx(-lam.dot(ph), lam.dot(x)));
        });
    };
    auto xeval = [rules, mdl](const CVec& zeta, const XGrid& g, cplx* out) {
        const int m = mdl.m();
        RVec ph = mdl.phi(zeta);
        RVec corner(m);
        for (int d = 0; d < m; ++d) {
            double a = g.origin(d), b = g.origin(d) + g.step(d) * (g.counts[d] - 1);
            corner(d) = std::abs(a) > std::abs(b) ? a : b;
        }
        int level = 0;
        adaptive_sum(
            *rules, max_rate(*rules, corner, ph),
            [&](const LevelRules::Level& L, std::size_t i) {
                const RVec& lam = L.lambdas[i];
                return std::exp(cplx(-lam.dot(ph), lam.dot(corner)));
            },
            &level);
        const auto& L = rules->level(level);
        std::fill(out, out + g.size(), cplx(0.0));
        for (std::size_t i = 0; i < L.W.size(); ++i)
            accumulate_exponential(L.lambdas[i], L.W[i] * std::exp(-L.lambdas[i].dot(ph)), g, 1.0, out);
    };
    out.f = SampledFunction(model.n(), model.m(), eval, grid, xeval);
    return out;
}

ForwardResult forward_FN(const QuadraticModel& model, const SampledFunction& phi, const std::vector<RVec>& lambdas,
                         int D) {
    Rule tau0{{0.0}, {1.0}};
    FourierBatch fb = pi_of_f_batch(model, phi, lambdas, tau0, D);
    ForwardResult r;
    r.lambdas = lambdas;
    r.used = fb.used;
    r.tail_fraction = fb.tail_fraction;
    r.values.assign(lambdas.size(), 0.0);
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        if (fb.used[i]) r.values[i] = fb.pi[i][0].trace();
    return r;
}

ExtensionResult make_extension(const QuadraticModel& model, const SpectralProfile& profile, Route route,
                               RouteASpec spec) {
    ExtensionResult res;
    res.K = profile.K;
    res.route = route;
    QuadraticModel mdl = model;
    if (route == Route::B) {
        require(profile_in_closed_cone(model, profile.K), "route B needs K inside the closure of Lambda_+");
        auto rules = profile_rules(model, profile, true);
        res.quadrature = "tensor Gauss-Legendre on the profile box, adaptive doubling";
        res.f = [rules, mdl](const CVec& zeta, const CVec& z) -> cplx {
            RVec ph = mdl.phi(zeta);
            RVec x = z.real(), y = z.imag();
            return adaptive_sum(*rules, max_rate(*rules, x, y, ph), [&](const LevelRules::Level& L, std::size_t i) {
                const RVec& lam = L.lambdas[i];
                double phil = (L.B[i].adjoint() * zeta).squaredNorm();
                return std::exp(cplx(-phil + lam.dot(ph) - lam.dot(y), lam.dot(x)));
            });
        };
        return res;
    }
    require(!profile.K.is_empty() && !profile.K.is_cone(), "route A needs a compact nonempty K");
    require(spec.x_half > 0.0 && spec.x_step > 0.0, "route A: x grid must be positive");
    SampledFunction f0 = inverse_FN(model, profile).f;
    const int m = model.m();
    const double norm = 1.0 / std::pow(2.0 * kPi, m);
    const ConvexBody K = profile.K;
    auto mask = [K](const RVec& lam) { return K.contains(lam); };
    auto weight = [norm](const RVec&, double w) -> cplx { return norm * w; };
    auto rules = std::make_shared<LevelRules>(K.bbox_lo(), K.bbox_hi(), profile.nodes, weight, mask, nullptr);
    const XGrid xg = symmetric_grid(m, spec.x_half, spec.x_step);
    const std::vector<double> wx = grid_weights(xg);
    res.quadrature = "trapezoid x-grid for F_F, tensor Gauss-Legendre on the box of K, adaptive doubling";
    res.f = [rules, mdl, f0, xg, wx](const CVec& zeta, const CVec& z) -> cplx {
        std::vector<cplx> samples(xg.size());
        f0.sample_x(zeta, xg, samples.data());
        RVec ph = mdl.phi(zeta);
        RVec x = z.real();
        RVec r = z.imag() - ph;
        // F_F values are cached per level node for this zeta
        std::vector<std::vector<cplx>> cache(rules->max_level() + 1);
        std::vector<const LevelRules::Level*> owner(rules->max_level() + 1, nullptr);
        return adaptive_sum(*rules, max_rate(*rules, x, z.imag(), ph), [&](const LevelRules::Level& L, std::size_t i) {
            int lv = -1;
            for (std::size_t k = 0; k < owner.size(); ++k)
                if (owner[k] == &L) lv = int(k);
            if (lv < 0) {
                for (std::size_t k = 0; k < owner.size(); ++k)
                    if (!owner[k]) {
                        owner[k] = &L;
                        cache[k].assign(L.W.size(), cplx(std::numeric_limits<double>::quiet_NaN()));
                        lv = int(k);
                        break;
                    }
            }
            cplx& F = cache[lv][i];
            if (std::isnan(F.real())) F = euclidean_ft(L.lambdas[i], xg, wx, samples);
            const RVec& lam = L.lambdas[i];
            return F * std::exp(cplx(-lam.dot(r), lam.dot(x)));
        });
    };
    return res;
}

cplx extend(const QuadraticModel& model, const SpectralProfile& profile, const AmbientPoint& a, Route route) {
    model.check(a);
    return make_extension(model, profile, route).f(a.zeta, a.z);
}

std::vector<AmbientPoint> sweep_points(const QuadraticModel& model, const SweepBox& box, int count,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const int n = model.n(), m = model.m();
    std::vector<AmbientPoint> pts;
    for (int s = 0; s < count; ++s) {
        CVec zeta(n);
        for (int j = 0; j < n; ++j) zeta(j) = cplx(nd(rng), nd(rng));
        double nz = zeta.norm();
        double rad = box.zeta_max * std::pow(ud(rng), 1.0 / (2.0 * n));
        if (nz > 0.0) zeta *= rad / nz;
        CVec z(m);
        RVec ph = model.phi(zeta);
        for (int k = 0; k < m; ++k) {
            double re = box.re_z_max * (2.0 * ud(rng) - 1.0);
            double im = box.im_lo + (box.im_hi - box.im_lo) * ud(rng);
            if (box.im_is_rho) im += ph(k);
            z(k) = cplx(re, im);
        }
        pts.push_back({zeta, z});
    }
    return pts;
}

MarginResult pw_margin(const QuadraticModel& model, const AmbientEval& f, const ConvexBody& K, int N,
                       const std::vector<AmbientPoint>& pts) {
    require(N >= 0, "pw_margin: N >= 0");
    MarginResult r;
    std::vector<double> vals(pts.size()), lin(pts.size());
    std::vector<int> clamped(pts.size(), 0);
    parallel_for(pts.size(), [&](std::size_t i) {
        const auto& a = pts[i];
        double v = std::abs(f(a.zeta, a.z));
        double H = support_function(K, rho(model, a));
        if (H > kHClamp) {
            H = kHClamp;
            clamped[i] = 1;
        }
        double wq = std::pow(1.0 + a.zeta.squaredNorm() + a.z.norm(), N);
        double wl = std::pow(1.0 + a.zeta.norm() + a.z.norm(), N);
        if (v == 0.0) {
            vals[i] = lin[i] = 0.0;
        } else {
            vals[i] = v * wq * std::exp(-H);
            lin[i] = v * wl * std::exp(-H);
        }
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        r.clamped += clamped[i];
        if (!std::isfinite(vals[i])) {
            if (r.finite) r.witness = pts[i];
            r.finite = false;
            continue;
        }
        if (r.finite && vals[i] >= r.margin) {
            r.margin = vals[i];
            r.witness = pts[i];
        }
        r.margin_linear = std::max(r.margin_linear, lin[i]);
    }
    if (!r.finite) r.margin = std::numeric_limits<double>::infinity();
    return r;
}

double cr_residual(const QuadraticModel& model, const SampledFunction& f, const std::vector<GroupPoint>& pts, double h) {
    const int n = model.n();
    std::vector<double> res(pts.size()), mag(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        mag[i] = std::abs(f(pts[i]));
        double best = 0.0;
        for (int j = 0; j < n; ++j)
            best = std::max(best, std::abs(apply_cr_field(model, CVec::Unit(n, j), f, pts[i], true, h)));
        res[i] = best;
    });
    double fm = *std::max_element(mag.begin(), mag.end());
    double rm = *std::max_element(res.begin(), res.end());
    return fm > 0.0 ? rm / fm : 0.0;
}

namespace {

const double& unit_bump_mass() {
    static const double z = [] {
        Rule r = gauss_legendre(400, -1.0, 1.0);
        std::vector<double> t(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) t[i] = r.weights[i] * bump_core(r.nodes[i] * r.nodes[i]);
        return pairwise_sum(t);
    }();
    return z;
}

// Distribution function of the normalized one-dimensional bump.
double bump_cdf(double t) {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    Rule r = gauss_legendre(200, -1.0, t);
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = r.weights[i] * bump_core(r.nodes[i] * r.nodes[i]);
    return std::clamp(pairwise_sum(v) / unit_bump_mass(), 0.0, 1.0);
}

}  // namespace

SpectralProfile spectral_window(const ConvexBody& K, double eps) {
    require(eps > 0.0, "spectral window: eps > 0");
    require(!K.is_cone() && !K.is_empty() && K.has_interior(), "spectral window: K must be a polytope with interior");
    const int m = K.dim();
    ConvexBody inner = erode(K, 0.5 * eps);
    if (inner.is_empty()) {
        SpectralProfile z = zero_profile(K);
        z.kind = "window-empty";
        return z;
    }
    const double r = 0.25 * eps;
    SpectralProfile p;
    p.K = K;
    p.lo = inner.bbox_lo().array() - r;
    p.hi = inner.bbox_hi().array() + r;
    p.kind = "window";
    if (m == 1) {
        double a = inner.bbox_lo()(0), b = inner.bbox_hi()(0);
        p.psi = [a, b, r](const RVec& lam) -> cplx {
            double v = bump_cdf((lam(0) - a) / r) - bump_cdf((lam(0) - b) / r);
            return std::max(v, 0.0);
        };
        return p;
    }
    // ball rule for the mollifier, weights normalized to total 1
    const int q = 16;
    const Rule& gl = gauss_legendre(q);
    std::vector<RVec> shifts;
    std::vector<double> w;
    std::size_t total = 1;
    for (int d = 0; d < m; ++d) total *= q;
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t rr = t;
        RVec s(m);
        double wt = 1.0;
        for (int d = m - 1; d >= 0; --d) {
            s(d) = gl.nodes[rr % q];
            wt *= gl.weights[rr % q];
            rr /= q;
        }
        double b = bump_core(s.squaredNorm());
        if (b == 0.0) continue;
        shifts.push_back(r * s);
        w.push_back(wt * b);
    }
    double sw = pairwise_sum(w);
    for (double& v : w) v /= sw;
    p.psi = [inner, shifts, w](const RVec& lam) -> cplx {
        std::vector<double> t(w.size(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i)
            if (inner.contains(lam - shifts[i])) t[i] = w[i];
        return pairwise_sum(t);
    };
    return p;
}

double window_sandwich_violation(const ConvexBody& K, double eps, const SpectralProfile& window, int samples_per_dim) {
    const int m = K.dim();
    ConvexBody lower = erode(K, eps);
    ConvexBody upper = erode(K, 0.25 * eps);
    RVec lo = K.bbox_lo().array() - eps, hi = K.bbox_hi().array() + eps;
    const int q = samples_per_dim;
    std::size_t total = 1;
    for (int d = 0; d < m; ++d) total *= q;
    RVec step = (hi - lo) / double(q - 1);
    double worst = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t rr = t;
        RVec lam(m);
        for (int d = m - 1; d >= 0; --d) {
            lam(d) = lo(d) + step(d) * double(rr % q);
            rr /= q;
        }
        double tv = window.psi(lam).real();
        double a = !lower.is_empty() && lower.contains(lam) ? 1.0 : 0.0;
        double b = !upper.is_empty() && upper.contains(lam) ? 1.0 : 0.0;
        worst = std::max({worst, a - tv, tv - b, std::abs(window.psi(lam).imag())});
    }
    return worst;
}

SampledFunction bandlimit_project(const QuadraticModel& model, const SampledFunction& f, const SpectralProfile& window,
                                  GridSpec grid) {
    SampledFunction g = inverse_FN(model, window, grid).f;
    return group_convolve(model, f, g);
}

SupportProfile spectrum_support(const QuadraticModel& model, const SampledFunction& f0, const Rule& lambda_axis,
                                const std::vector<CVec>& stencil, const std::function<bool(const RVec&)>& inside,
                                double x_half, double x_step) {
    const int m = model.m();
    SupportProfile sp;
    const int q = int(lambda_axis.size());
    std::size_t total = 1;
    for (int d = 0; d < m; ++d) total *= q;
    std::vector<double> lw(total, 1.0);
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t rr = t;
        RVec lam(m);
        for (int d = m - 1; d >= 0; --d) {
            lam(d) = lambda_axis.nodes[rr % q];
            lw[t] *= lambda_axis.weights[rr % q];
            rr /= q;
        }
        sp.lambdas.push_back(lam);
    }
    const XGrid xg = symmetric_grid(m, x_half, x_step);
    const std::vector<double> wx = grid_weights(xg);
    sp.magnitude.assign(stencil.size(), std::vector<double>(total, 0.0));
    for (std::size_t s = 0; s < stencil.size(); ++s) {
        std::vector<cplx> samples(xg.size());
        f0.sample_x(stencil[s], xg, samples.data());
        parallel_for(total, [&](std::size_t t) {
            sp.magnitude[s][t] = std::abs(euclidean_ft(sp.lambdas[t], xg, wx, samples));
        });
    }
    std::vector<double> out_terms, all_terms;
    for (std::size_t s = 0; s < stencil.size(); ++s)
        for (std::size_t t = 0; t < total; ++t) {
            double v = lw[t] * sp.magnitude[s][t] * sp.magnitude[s][t];
            all_terms.push_back(v);
            out_terms.push_back(inside(sp.lambdas[t]) ? 0.0 : v);
        }
    double all = pairwise_sum(all_terms);
    sp.outside_fraction = all > 0.0 ? pairwise_sum(out_terms) / all : 0.0;
    return sp;
}

std::vector<double> decay_sequence(const QuadraticModel& model, const SpectralProfile& profile, const RVec& h, int N1,
                                   int N3, int count, const std::vector<GroupPoint>& pts) {
    require(h.size() == model.m(), "decay_sequence: height dimension");
    const ConvexBody K = profile.K;
    const double H = support_function(K, h);
    std::vector<double> out;
    for (int j = 0; j < count; ++j) {
        const int e = N3 + j;
        SpectralProfile pj = multiply_profile(
            profile, [K, e](const RVec& lam) { return cplx(std::pow(std::min(1.0, boundary_distance(K, lam)), e)); },
            "weighted");
        ExtensionResult ext = make_extension(model, pj, Route::B);
        std::vector<double> vals(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            const auto& p = pts[i];
            CVec w = p.x.cast<cplx>() + kI * (h + model.phi(p.zeta)).cast<cplx>();
            double t = std::abs(ext.f(p.zeta, w));
            vals[i] = t * std::pow(1.0 + w.norm(), N1) * std::exp(-H);
        });
        out.push_back(*std::max_element(vals.begin(), vals.end()));
    }
    return out;
}

}  // namespace qcr

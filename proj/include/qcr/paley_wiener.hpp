#pragma once

#include "qcr/convex.hpp"
#include "qcr/fock.hpp"

#include <memory>

namespace qcr {

// Spectral profile psi on F' with support inside K.
struct SpectralProfile {
    ConvexBody K = ConvexBody::empty(1);
    std::function<cplx(const RVec&)> psi;
    RVec lo, hi;     // box containing supp psi
    int nodes = 64;  // Gauss-Legendre nodes per dimension at the coarsest level
    std::string kind;
};

// psi(lambda) = P(s) exp(-1 / (1 - s)) for s = |lambda - center|^2 / radius^2 < 1, P(s) = sum_k poly[k] s^k.
SpectralProfile bump_profile(const ConvexBody& K, const RVec& center, double radius, std::vector<double> poly = {1.0});
SpectralProfile zero_profile(const ConvexBody& K);
// psi * factor, same support box.
SpectralProfile multiply_profile(const SpectralProfile& p, std::function<cplx(const RVec&)> factor, std::string kind);

struct ProfileCheck {
    double max_outside = 0.0;     // max |psi| on samples outside K
    double max_derivative = 0.0;  // max finite-difference slope on the support box
    bool ok = false;
};
ProfileCheck validate_profile(const SpectralProfile& p, int samples_per_dim = 201);

// Covectors of K lie in the closure of Lambda_+ and K meets Lambda_+.
bool profile_in_closed_cone(const QuadraticModel& model, const ConvexBody& K);

struct InverseFN {
    SampledFunction f;
    bool cr_guaranteed = true;
    std::string warning;
};

// (2^{n-m} / pi^{n+m}) int_K psi |Pf| exp(i <lambda, x> - <lambda, Phi(zeta)>) d lambda.
InverseFN inverse_FN(const QuadraticModel& model, const SpectralProfile& profile, GridSpec grid = {});

struct ForwardResult {
    std::vector<RVec> lambdas;
    std::vector<cplx> values;
    std::vector<bool> used;
    double tail_fraction = 0.0;
};

// lambda -> tr(pi_lambda(phi)) on the truncated basis of degree <= D, tau = 0.
ForwardResult forward_FN(const QuadraticModel& model, const SampledFunction& phi, const std::vector<RVec>& lambdas,
                         int D = 2);

enum class Route { A, B };

struct RouteASpec {
    double x_half = 400.0;
    double x_step = 1.0;
};

struct ExtensionResult {
    AmbientEval f;
    ConvexBody K = ConvexBody::empty(1);
    Route route = Route::B;
    std::string quadrature;
};

ExtensionResult make_extension(const QuadraticModel& model, const SpectralProfile& profile, Route route,
                               RouteASpec spec = {});
cplx extend(const QuadraticModel& model, const SpectralProfile& profile, const AmbientPoint& a, Route route);

struct SweepBox {
    double zeta_max = 3.0;
    double re_z_max = 5.0;
    double im_lo = -4.0;
    double im_hi = 4.0;
    bool im_is_rho = false;  // the imaginary range bounds rho(zeta, z) instead of Im z
};

// Deterministic random points in the box, |zeta| <= zeta_max.
std::vector<AmbientPoint> sweep_points(const QuadraticModel& model, const SweepBox& box, int count, std::uint64_t seed);

struct MarginResult {
    double margin = 0.0;         // weight (1 + |zeta|^2 + |z|)^N
    double margin_linear = 0.0;  // weight (1 + |zeta| + |z|)^N
    bool finite = true;
    AmbientPoint witness;
    int clamped = 0;
};

// max |f| (1 + |zeta|^2 + |z|)^N exp(-H_K(rho)), H clamped at 40.
MarginResult pw_margin(const QuadraticModel& model, const AmbientEval& f, const ConvexBody& K, int N,
                       const std::vector<AmbientPoint>& pts);

// max over points and basis directions of |conj(Z_v) f| divided by max |f|.
double cr_residual(const QuadraticModel& model, const SampledFunction& f, const std::vector<GroupPoint>& pts,
                   double h = 1e-4);

// tau_eps = chi_{K_{eps/2}} * psi_{eps/4}; the zero profile when the erosion is empty.
SpectralProfile spectral_window(const ConvexBody& K, double eps);

// Largest violation of chi_{K_eps} <= tau <= chi_{K_{eps/4}} on a sample grid over the box of K.
double window_sandwich_violation(const ConvexBody& K, double eps, const SpectralProfile& window, int samples_per_dim);

// f * F_N^{-1}(window), integrating over `grid`.
SampledFunction bandlimit_project(const QuadraticModel& model, const SampledFunction& f, const SpectralProfile& window,
                                  GridSpec grid);

struct SupportProfile {
    std::vector<RVec> lambdas;
    std::vector<std::vector<double>> magnitude;  // [stencil point][lambda]
    double outside_fraction = 0.0;
};

// |F_F(f0(zeta, .))| on a tensor lambda grid by direct x-quadrature; mass fraction outside `inside`.
SupportProfile spectrum_support(const QuadraticModel& model, const SampledFunction& f0, const Rule& lambda_axis,
                                const std::vector<CVec>& stencil, const std::function<bool(const RVec&)>& inside,
                                double x_half, double x_step);

// Sup of |T| (1 + |x + i(h + Phi(zeta))|)^{N1} e^{-H_K(h)} for the profiles psi min(1, d(., dK))^{N3 + j},
// j = 0..count-1, T evaluated by route B at height h.
std::vector<double> decay_sequence(const QuadraticModel& model, const SpectralProfile& profile, const RVec& h, int N1,
                                   int N3, int count, const std::vector<GroupPoint>& pts);

}  // namespace qcr

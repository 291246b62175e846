#pragma once

#include "qcr/convex.hpp"

namespace qcr {

// N = N_{K,1} . N_{K,2} for a compact convex K inside P.
struct SplitData {
    RMat F1_basis;  // (span K)^perp in F
    RMat F2_basis;  // span K
    CMat E1_basis;  // {zeta : Phi(zeta, .) takes values in (F_{K,1})_C}
    CMat E2_basis;  // orthogonal complement of E1
    // On E2 coordinates, components along F2_basis; a placeholder when E2 or F2 is {0}.
    QuadraticModel phi2 = QuadraticModel::zero(1, 1);
};

SplitData split(const QuadraticModel& model, const ConvexBody& K);

struct SplitInvariants {
    double phi_difference = 0.0;  // F2-part of Phi - Phi_{K,2} on E2
    double normality = 0.0;       // N2-part of q p q^{-1} for p in N1
    double pairing = 0.0;         // <lambda, Phi(zeta)> - <lambda, Phi_{K,2}(zeta')>
    double hk_invariance = 0.0;   // H_K(rho(zeta, z)) - H_K(rho_2(zeta_2, z_2))
};

SplitInvariants check_split(const QuadraticModel& model, const ConvexBody& K, const SplitData& s, int samples,
                            std::uint64_t seed);

// iota(phi)(zeta_1 + zeta_2, x_1 + x_2) = phi(zeta_2, x_2) in E2 / F2 coordinates.
SampledFunction embed_flat(const SplitData& s, const SampledFunction& phi);
AmbientEval embed_flat(const SplitData& s, const AmbientEval& f2);

struct GrowthReport {
    std::vector<double> radii;
    std::vector<double> max_abs;
    double slope = 0.0;  // least-squares slope of log max|f| against log R
    int degree = 0;
    bool exponential = false;
};

// Ray sweeps along the E_{K,1} and F_{K,1} directions from the base points.
GrowthReport verify_split_growth(const QuadraticModel& model, const SplitData& s, const AmbientEval& f,
                                 const std::vector<AmbientPoint>& base, const std::vector<double>& radii, int N);

}  // namespace qcr

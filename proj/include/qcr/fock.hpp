#pragma once

#include "qcr/quadrature.hpp"
#include "qcr/spectral.hpp"

namespace qcr {

using MultiIndex = std::vector<int>;
using OperatorMatrix = CMat;

// Multi-indices of length k and total degree <= D, graded lexicographic.
std::vector<MultiIndex> multi_indices(int k, int D);

struct FockTruncation {
    SpectralData spectral;
    int D = 0;
    std::vector<MultiIndex> indices;
    // norms[i] = ||e_alpha|| for e_alpha = prod_j Phi_lambda(., u_j)^alpha_j in L^2(exp(-2 Phi_lambda))
    std::vector<double> norms;

    int size() const { return int(indices.size()); }
    int k() const { return spectral.k(); }
    int index_of(const MultiIndex& a) const;
    // Indices of total degree <= cap.
    std::vector<int> block(int cap) const;
};

FockTruncation fock_basis(const SpectralData& sd, int D);

// Gram matrix of the normalized basis for |alpha| <= cap by Gauss-Hermite quadrature.
CMat fock_gram_by_quadrature(const FockTruncation& tr, int cap, int nodes_per_axis = 8);

// Evaluates the normalized basis function index i at omega.
cplx fock_basis_function(const FockTruncation& tr, int i, const CVec& omega);

// <m|D(beta)|n> for m, n <= D, with D(beta) = exp(beta a^+ - conj(beta) a).
CMat displacement_matrix(cplx beta, int D);

// Matrix of pi_{lambda,tau}(p) on the truncated basis by Gauss-Hermite quadrature.
OperatorMatrix rep_apply(const FockTruncation& tr, const RVec& tau, const GroupPoint& p, int gh_nodes = 56);

// Same matrix from the closed-form displacement elements.
OperatorMatrix rep_apply_closed_form(const FockTruncation& tr, const RVec& tau, const GroupPoint& p);

struct PiResult {
    OperatorMatrix matrix;
    double tail_fraction = 0.0;
    bool tail_warning = false;
};

PiResult pi_of_f(const QuadraticModel& model, const FockTruncation& tr, const RVec& tau, const SampledFunction& f);

// Batched group Fourier transform over a set of covectors and a tensor tau-grid.
struct FourierBatch {
    std::vector<RVec> lambdas;
    std::vector<bool> used;  // false for exceptional covectors
    std::vector<RVec> taus;
    std::vector<double> tau_weights;
    std::vector<std::vector<CMat>> pi;  // [lambda][tau]
    std::vector<FockTruncation> truncs;
    double l2_norm_sq = 0.0;
    double tail_fraction = 0.0;
};

// tau_axis is applied to each of the 2d real radical axes; ignored when d = 0.
FourierBatch pi_of_f_batch(const QuadraticModel& model, const SampledFunction& f, const std::vector<RVec>& lambdas,
                           const Rule& tau_axis, int D);

struct PlancherelResult {
    double residual = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
    int generic_d = 0;
    double tail_fraction = 0.0;
    bool tail_warning = false;
};

// lambda_rule is a 1-D rule applied per axis of F'.
PlancherelResult plancherel_residual(const QuadraticModel& model, const SampledFunction& f, const Rule& lambda_rule,
                                     const Rule& tau_axis, int D);

// (f * g)(p) = int f(p r^-1) g(r) dr over the grid of g.
SampledFunction group_convolve(const QuadraticModel& model, const SampledFunction& f, const SampledFunction& g);

// Trapezoid nodes along one real axis of a grid spec.
Rule grid_axis(double L, int count);

}  // namespace qcr

#pragma once

#include "qcr/model.hpp"

#include <cstdint>

namespace qcr {

// Per-covector data. Columns of `basis` span the complement of the radical and
// diagonalize A(lambda): E_plus columns first, then E_minus. In these
// coordinates Phi_lambda(z, w) = sum_j mu_j c_j(z) conj(c_j(w)) with
// c_j(z) = u_j^H z on E_plus and conj(u_j^H z) on E_minus.
struct SpectralData {
    RVec lambda;
    CMat A_lambda;
    CMat radical_basis;
    int d_lambda = 0;
    CMat J;
    CMat absJ;
    CMat Jprime;
    CMat E_plus;
    CMat E_minus;
    CMat basis;
    RVec mu;
    std::vector<int> sign;  // +1 for E_plus columns, -1 for E_minus columns
    double pfaffian = 1.0;

    int n() const { return int(A_lambda.rows()); }
    int k() const { return int(mu.size()); }

    // E_lambda coordinates of the R_lambda-perp part, and radical coordinates.
    CVec coords(const CVec& zeta) const;
    CVec radical_coords(const CVec& zeta) const;

    cplx phi_lambda(const CVec& z, const CVec& w) const;
    double phi_lambda(const CVec& z) const;
};

// Global sign s in J_lambda = s i A(lambda), fixed by the self-check below.
int orientation_sign();

// Evaluates the pinning conditions for a candidate sign on the Heisenberg model at lambda = 1.
bool orientation_conditions_hold(int s);

SpectralData spectral_data(const QuadraticModel& model, const RVec& lambda);
SpectralData spectral_data(const QuadraticModel& model, const RVec& lambda, int s);

// Phi_lambda straight from its defining formula, for cross-checks.
cplx phi_lambda_direct(const QuadraticModel& model, const SpectralData& sd, const CVec& z, const CVec& w);

struct GenericDimension {
    int d = 0;
    std::function<bool(const RVec&)> is_exceptional;
};

GenericDimension generic_dimension(const QuadraticModel& model, int samples, std::uint64_t seed);

}  // namespace qcr

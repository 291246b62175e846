#pragma once

#include "qcr/fock.hpp"

namespace qcr {

struct RocklandSpectrum {
    RVec lambda;
    RVec tau;
    std::vector<double> eigenvalues;  // ascending
    double ground_value = 0.0;
    CVec ground_vector;
};

// dpi(Z_v) = -d_v and dpi(conj Z_v) = multiplication by 2 Phi_lambda(., v), on degrees <= cap.
OperatorMatrix dpi_Z(const FockTruncation& tr, const CVec& v, int cap);
OperatorMatrix dpi_Zbar(const FockTruncation& tr, const CVec& v, int cap);

// dpi(L) on the degree <= D block. Requires D >= 4.
OperatorMatrix assemble_dpi_L(const FockTruncation& tr, const RVec& tau);

// Diagonalizes the degree <= D/2 block of dpi(L).
RocklandSpectrum rockland_spectrum(const FockTruncation& tr, const RVec& tau);

double closed_form_eigenvalue(const SpectralData& sd, const RVec& tau, const MultiIndex& alpha);

}  // namespace qcr

#include "qcr/rockland.hpp"

#include <cmath>

namespace qcr {

namespace {

// Truncation of the same spectral data at another degree, without the quadrature check.
FockTruncation working_space(const FockTruncation& tr, int cap) {
    FockTruncation w;
    w.spectral = tr.spectral;
    w.D = cap;
    w.indices = multi_indices(tr.k(), cap);
    w.norms.assign(w.indices.size(), 1.0);
    return w;
}

// Matrix of the raising operator a_j^+ (up = true) or lowering operator a_j.
CMat ladder(const FockTruncation& w, int j, bool up) {
    const int S = w.size();
    CMat M = CMat::Zero(S, S);
    for (int b = 0; b < S; ++b) {
        MultiIndex a = w.indices[b];
        double amp;
        if (up) {
            amp = std::sqrt(a[j] + 1.0);
            a[j] += 1;
        } else {
            if (a[j] == 0) continue;
            amp = std::sqrt(double(a[j]));
            a[j] -= 1;
        }
        int r = w.index_of(a);
        if (r >= 0) M(r, b) = amp;
    }
    return M;
}

CMat restrict_to(const FockTruncation& w, const CMat& M, int cap) {
    std::vector<int> blk = w.block(cap);
    CMat out(blk.size(), blk.size());
    for (std::size_t a = 0; a < blk.size(); ++a)
        for (std::size_t b = 0; b < blk.size(); ++b) out(a, b) = M(blk[a], blk[b]);
    return out;
}

}  // namespace

OperatorMatrix dpi_Z(const FockTruncation& tr, const CVec& v, int cap) {
    FockTruncation w = working_space(tr, cap);
    const SpectralData& sd = tr.spectral;
    CVec c = sd.coords(v);
    CMat M = CMat::Zero(w.size(), w.size());
    for (int j = 0; j < sd.k(); ++j) M -= std::sqrt(2.0 * sd.mu(j)) * c(j) * ladder(w, j, false);
    return M;
}

OperatorMatrix dpi_Zbar(const FockTruncation& tr, const CVec& v, int cap) {
    FockTruncation w = working_space(tr, cap);
    const SpectralData& sd = tr.spectral;
    CVec c = sd.coords(v);
    CMat M = CMat::Zero(w.size(), w.size());
    for (int j = 0; j < sd.k(); ++j) M += std::sqrt(2.0 * sd.mu(j)) * std::conj(c(j)) * ladder(w, j, true);
    return M;
}

OperatorMatrix assemble_dpi_L(const FockTruncation& tr, const RVec& tau) {
    require(tr.D >= 4, "assemble_dpi_L: D >= 4");
    const SpectralData& sd = tr.spectral;
    require(tau.size() == 2 * sd.d_lambda, "assemble_dpi_L: tau must have 2 d_lambda entries");
    const int cap = tr.D + 2;
    FockTruncation w = working_space(tr, cap);
    // sum over the real basis {u_j, i u_j} of E_lambda of (Z Zbar + Zbar Z)
    CMat S = CMat::Zero(w.size(), w.size());
    for (int j = 0; j < sd.k(); ++j) {
        CVec u = sd.basis.col(j);
        CMat Z = dpi_Z(tr, u, cap), Zb = dpi_Zbar(tr, u, cap);
        S += Z * Zb + Zb * Z;
    }
    // radical directions act by the scalars -i tau; each contributes (-i tau)^2 / 2
    S -= 0.5 * tau.squaredNorm() * CMat::Identity(w.size(), w.size());
    CMat Sd = restrict_to(w, S, tr.D);
    return Sd * Sd + sd.lambda.squaredNorm() * CMat::Identity(Sd.rows(), Sd.cols());
}

RocklandSpectrum rockland_spectrum(const FockTruncation& tr, const RVec& tau) {
    CMat L = assemble_dpi_L(tr, tau);
    FockTruncation w = working_space(tr, tr.D);
    CMat B = restrict_to(w, L, tr.D / 2);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (B + B.adjoint()));
    RocklandSpectrum r;
    r.lambda = tr.spectral.lambda;
    r.tau = tau;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) r.eigenvalues.push_back(es.eigenvalues()(i));
    r.ground_value = r.eigenvalues.front();
    r.ground_vector = es.eigenvectors().col(0);
    normalize_phase(r.ground_vector);
    return r;
}

double closed_form_eigenvalue(const SpectralData& sd, const RVec& tau, const MultiIndex& alpha) {
    require(int(alpha.size()) == sd.k(), "closed_form_eigenvalue: multi-index length");
    double s = 0.5 * tau.squaredNorm();
    for (int j = 0; j < sd.k(); ++j) {
        require(alpha[j] >= 0, "closed_form_eigenvalue: negative index");
        s += 2.0 * sd.mu(j) * (1.0 + 2.0 * alpha[j]);
    }
    return s * s + sd.lambda.squaredNorm();
}

}  // namespace qcr

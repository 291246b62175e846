#include "qcr/spectral.hpp"

#include "qcr/convex.hpp"

#include <cmath>
#include <random>

namespace qcr {

CVec SpectralData::coords(const CVec& zeta) const {
    CVec w = basis.adjoint() * zeta;
    for (int j = 0; j < k(); ++j)
        if (sign[j] < 0) w(j) = std::conj(w(j));
    return w;
}

CVec SpectralData::radical_coords(const CVec& zeta) const { return radical_basis.adjoint() * zeta; }

cplx SpectralData::phi_lambda(const CVec& z, const CVec& w) const {
    CVec cz = coords(z), cw = coords(w);
    cplx s = 0.0;
    for (int j = 0; j < k(); ++j) s += mu(j) * cz(j) * std::conj(cw(j));
    return s;
}

double SpectralData::phi_lambda(const CVec& z) const {
    CVec w = basis.adjoint() * z;
    double s = 0.0;
    for (int j = 0; j < k(); ++j) s += mu(j) * std::norm(w(j));
    return s;
}

SpectralData spectral_data(const QuadraticModel& model, const RVec& lambda, int s) {
    require(s == 1 || s == -1, "orientation sign must be +1 or -1");
    SpectralData sd;
    sd.lambda = lambda;
    sd.A_lambda = model.A(lambda);
    const int n = model.n();
    Eigen::SelfAdjointEigenSolver<CMat> es(sd.A_lambda);
    const RVec& a = es.eigenvalues();
    CMat U = es.eigenvectors();
    double amax = a.cwiseAbs().maxCoeff();
    double thr = 1e-10 * amax;

    std::vector<int> rad, plus, minus;
    for (int i = 0; i < n; ++i) {
        if (amax == 0.0 || std::abs(a(i)) <= thr)
            rad.push_back(i);
        else if (s * a(i) > 0)
            plus.push_back(i);
        else
            minus.push_back(i);
    }
    // positive part in descending order so that the largest mu comes first
    std::reverse(plus.begin(), plus.end());

    auto gather = [&](const std::vector<int>& idx) {
        CMat M(n, Eigen::Index(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) M.col(Eigen::Index(j)) = U.col(idx[j]);
        normalize_phase_columns(M);
        return M;
    };
    sd.radical_basis = gather(rad);
    sd.d_lambda = int(rad.size());
    sd.E_plus = gather(plus);
    sd.E_minus = gather(minus);
    const int k = int(plus.size() + minus.size());
    sd.basis.resize(n, k);
    sd.basis << sd.E_plus, sd.E_minus;
    sd.mu.resize(k);
    sd.sign.resize(k);
    CVec jd(k), absd(k), jpd(k);
    for (int j = 0; j < k; ++j) {
        int i = j < int(plus.size()) ? plus[j] : minus[j - plus.size()];
        sd.mu(j) = std::abs(a(i));
        sd.sign[j] = j < int(plus.size()) ? 1 : -1;
        jd(j) = double(s) * kI * a(i);
        absd(j) = std::abs(a(i));
        jpd(j) = double(s) * kI * (a(i) > 0 ? 1.0 : -1.0);
    }
    sd.J = sd.basis * jd.asDiagonal() * sd.basis.adjoint();
    sd.absJ = sd.basis * absd.asDiagonal() * sd.basis.adjoint();
    sd.Jprime = sd.basis * jpd.asDiagonal() * sd.basis.adjoint();
    sd.pfaffian = 1.0;
    for (int j = 0; j < k; ++j) sd.pfaffian *= sd.mu(j);
    return sd;
}

cplx phi_lambda_direct(const QuadraticModel& model, const SpectralData& sd, const CVec& z, const CVec& w) {
    const RVec& lam = sd.lambda;
    CVec first = model.phi(sd.Jprime * z, w);
    CVec second = model.phi(z, w);
    return lam.dot(first.imag()) + kI * lam.dot(second.imag());
}

bool orientation_conditions_hold(int s) {
    QuadraticModel h = QuadraticModel::heisenberg();
    RVec lam = RVec::Ones(1);
    SpectralData sd = spectral_data(h, lam, s);
    CVec e = CVec::Ones(1);
    bool positive = sd.d_lambda < h.n() && phi_lambda_direct(h, sd, e, e).real() > 0.0;
    bool p_char = P_contains(h, lam) == (sd.E_plus.cols() == h.n() - sd.d_lambda);
    return positive && p_char;
}

int orientation_sign() {
    static const int s = [] {
        bool pos = orientation_conditions_hold(1);
        bool neg = orientation_conditions_hold(-1);
        if (pos == neg) throw NumericalConsistencyError("orientation pin is not unique");
        return pos ? 1 : -1;
    }();
    return s;
}

SpectralData spectral_data(const QuadraticModel& model, const RVec& lambda) {
    return spectral_data(model, lambda, orientation_sign());
}

GenericDimension generic_dimension(const QuadraticModel& model, int samples, std::uint64_t seed) {
    const int m = model.m();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    int d = model.n();
    auto visit = [&](const RVec& lam) {
        if (lam.norm() == 0.0) return;
        d = std::min(d, spectral_data(model, lam).d_lambda);
    };
    for (int k = 0; k < m; ++k) visit(RVec::Unit(m, k));
    for (int s = 0; s < samples; ++s) {
        RVec lam(m);
        for (int k = 0; k < m; ++k) lam(k) = nd(rng);
        visit(lam);
    }
    GenericDimension g;
    g.d = d;
    g.is_exceptional = [model, d](const RVec& lam) { return spectral_data(model, lam).d_lambda > d; };
    return g;
}

}  // namespace qcr

#include "qcr/split.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qcr {

namespace {

int numeric_rank(const Eigen::VectorXd& sv, double scale) {
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * scale) ++r;
    return r;
}

CVec random_cvec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    CVec v(n);
    for (int j = 0; j < n; ++j) v(j) = cplx(nd(rng), nd(rng));
    return v;
}

RVec random_rvec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    RVec v(n);
    for (int j = 0; j < n; ++j) v(j) = nd(rng);
    return v;
}

}  // namespace

SplitData split(const QuadraticModel& model, const ConvexBody& K) {
    require(K.dim() == model.m(), "split: body dimension");
    require(!K.is_cone(), "split: K must be compact");
    for (const auto& v : K.vertices()) require(P_contains(model, v), "split: K must lie in P");
    const int n = model.n(), m = model.m();
    SplitData s;
    RMat V(m, std::max<int>(1, int(K.vertices().size())));
    V.setZero();
    for (std::size_t i = 0; i < K.vertices().size(); ++i) V.col(Eigen::Index(i)) = K.vertices()[i];
    Eigen::JacobiSVD<RMat> svd(V, Eigen::ComputeFullU);
    double sc = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    int r = sc > 0.0 ? numeric_rank(svd.singularValues(), sc) : 0;
    s.F2_basis = svd.matrixU().leftCols(r);
    s.F1_basis = svd.matrixU().rightCols(m - r);

    CMat S(std::max(1, r) * n, n);
    S.setZero();
    for (int i = 0; i < r; ++i) S.block(i * n, 0, n, n) = model.A(s.F2_basis.col(i));
    Eigen::JacobiSVD<CMat> csvd(S, Eigen::ComputeFullV);
    double csc = csvd.singularValues().size() ? csvd.singularValues()(0) : 0.0;
    int rank = csc > 0.0 ? numeric_rank(csvd.singularValues(), csc) : 0;
    s.E2_basis = csvd.matrixV().leftCols(rank);
    s.E1_basis = csvd.matrixV().rightCols(n - rank);
    normalize_phase_columns(s.E1_basis);
    normalize_phase_columns(s.E2_basis);

    // a trivial second factor keeps the placeholder phi2
    if (rank == 0 || r == 0) return s;
    std::vector<CMat> B;
    for (int i = 0; i < r; ++i) {
        CMat b = s.E2_basis.adjoint() * model.A(s.F2_basis.col(i)) * s.E2_basis;
        B.push_back(0.5 * (b + b.adjoint()));
    }
    s.phi2 = QuadraticModel(rank, B);
    return s;
}

SplitInvariants check_split(const QuadraticModel& model, const ConvexBody& K, const SplitData& s, int samples,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = model.n(), m = model.m();
    const int e1 = int(s.E1_basis.cols()), e2 = int(s.E2_basis.cols());
    const int f1 = int(s.F1_basis.cols()), f2 = int(s.F2_basis.cols());
    ConvexBody K2 = project_body(K, s.F2_basis);
    const bool has2 = e2 > 0 && f2 > 0;
    auto phi2 = [&](const CVec& a, const CVec& b) { return has2 ? s.phi2.phi(a, b) : CVec(CVec::Zero(f2)); };
    SplitInvariants inv;
    for (int t = 0; t < samples; ++t) {
        // Phi - Phi_{K,2} on E2 lands in (F_{K,1})_C
        CVec u = random_cvec(rng, e2), u2 = random_cvec(rng, e2);
        CVec z = s.E2_basis * u, z2 = s.E2_basis * u2;
        CVec emb = s.F2_basis.cast<cplx>() * phi2(u, u2);
        CVec diff = model.phi(z, z2) - emb;
        inv.phi_difference = std::max(inv.phi_difference, (s.F2_basis.transpose().cast<cplx>() * diff).norm());

        // q p q^{-1} stays in N_{K,1}
        GroupPoint p{s.E1_basis * random_cvec(rng, e1), s.F1_basis * random_rvec(rng, f1)};
        GroupPoint q{random_cvec(rng, n), random_rvec(rng, m)};
        GroupPoint c = multiply(model, multiply(model, q, p), inverse(model, q));
        double leak = (s.E2_basis.adjoint() * c.zeta).norm() + (s.F2_basis.transpose() * c.x).norm();
        inv.normality = std::max(inv.normality, leak);

        // <lambda, Phi(zeta)> = <lambda, Phi_{K,2}(zeta')> with zeta' the E2 part
        CVec zeta = random_cvec(rng, n);
        RVec cl = random_rvec(rng, f2);
        RVec lam = s.F2_basis * cl;
        CVec zp = s.E2_basis.adjoint() * zeta;
        double lhs = lam.dot(model.phi(zeta));
        double rhs = cl.dot(phi2(zp, zp).real());
        inv.pairing = std::max(inv.pairing, std::abs(lhs - rhs));

        // H_K(rho(zeta, z)) = H_K(rho_2(zeta_2, z_2))
        CVec z1 = s.F1_basis.cast<cplx>() * (random_rvec(rng, f1).cast<cplx>() + kI * random_rvec(rng, f1).cast<cplx>());
        CVec zc2 = random_rvec(rng, f2).cast<cplx>() + kI * random_rvec(rng, f2).cast<cplx>();
        CVec zz = z1 + s.F2_basis.cast<cplx>() * zc2;
        double hk = support_function(K, rho(model, {zeta, zz}));
        RVec rho2 = zc2.imag() - RVec(phi2(zp, zp).real());
        double hk2 = support_function(K2, rho2);
        double sc = std::max(1.0, std::abs(hk));
        inv.hk_invariance = std::max(inv.hk_invariance, std::abs(hk - hk2) / sc);
    }
    return inv;
}

SampledFunction embed_flat(const SplitData& s, const SampledFunction& phi) {
    require(phi.n() == s.E2_basis.cols() && phi.m() == s.F2_basis.cols(), "embed_flat: factor dimensions");
    CMat W = s.E2_basis;
    RMat F2 = s.F2_basis;
    int n = int(W.rows()), m = int(F2.rows());
    return SampledFunction(
        n, m, [W, F2, phi](const CVec& zeta, const RVec& x) { return phi(W.adjoint() * zeta, F2.transpose() * x); },
        phi.grid());
}

AmbientEval embed_flat(const SplitData& s, const AmbientEval& f2) {
    CMat W = s.E2_basis;
    CMat F2 = s.F2_basis.cast<cplx>();
    return [W, F2, f2](const CVec& zeta, const CVec& z) { return f2(W.adjoint() * zeta, F2.transpose() * z); };
}

GrowthReport verify_split_growth(const QuadraticModel& model, const SplitData& s, const AmbientEval& f,
                                 const std::vector<AmbientPoint>& base, const std::vector<double>& radii, int N) {
    require(radii.size() >= 2, "verify_split_growth: need at least two radii");
    const int n = model.n(), m = model.m();
    std::vector<AmbientPoint> dirs;
    for (Eigen::Index j = 0; j < s.E1_basis.cols(); ++j) {
        dirs.push_back({s.E1_basis.col(j), CVec::Zero(m)});
        dirs.push_back({kI * s.E1_basis.col(j), CVec::Zero(m)});
    }
    for (Eigen::Index j = 0; j < s.F1_basis.cols(); ++j) {
        CVec b = s.F1_basis.col(j).cast<cplx>();
        dirs.push_back({CVec::Zero(n), b});
        dirs.push_back({CVec::Zero(n), kI * b});
    }
    GrowthReport g;
    g.radii = radii;
    for (double R : radii) {
        double best = 0.0;
        for (const auto& a : base) {
            if (dirs.empty()) best = std::max(best, std::abs(f(a.zeta, a.z)));
            for (const auto& d : dirs) best = std::max(best, std::abs(f(a.zeta + R * d.zeta, a.z + R * d.z)));
        }
        g.max_abs.push_back(best);
    }
    if (*std::max_element(g.max_abs.begin(), g.max_abs.end()) == 0.0) return g;
    const double floor = std::numeric_limits<double>::min();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = double(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        double X = std::log(radii[i]), Y = std::log(std::max(g.max_abs[i], floor));
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
    }
    g.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    g.degree = std::max(0, int(std::lround(g.slope)));
    double ratio = std::log(std::max(g.max_abs.back(), floor) / std::max(g.max_abs.front(), floor));
    g.exponential = ratio > (N + 1) * std::log(radii.back() / radii.front());
    return g;
}

}  // namespace qcr

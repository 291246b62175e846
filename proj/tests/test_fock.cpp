#include "qcr/fock.hpp"
#include "qcr/paley_wiener.hpp"
#include "qcr/rockland.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace qcr;
using namespace qcr::test;

namespace {

QuadraticModel degenerate() { return QuadraticModel(2, {cmat2(1, 0, 0, 0)}); }

CMat restrict_block(const FockTruncation& tr, const CMat& M, int cap) {
    std::vector<int> blk = tr.block(cap);
    CMat out(blk.size(), blk.size());
    for (std::size_t a = 0; a < blk.size(); ++a)
        for (std::size_t b = 0; b < blk.size(); ++b) out(a, b) = M(blk[a], blk[b]);
    return out;
}

GroupPoint small_point(Rng& r, int n, int m) {
    CVec z = r.cvec(n);
    z *= r.uniform(0, 1) / z.norm();
    return {z, r.rvec(m)};
}

SampledFunction narrow_gaussian(int n, int m, double a) {
    double mass = std::pow(a / kPi, n) * std::pow(a / kPi, 0.5 * m);
    GridSpec g{0.15, 0.15, 49, 49};
    return SampledFunction(
        n, m, [a, mass](const CVec& z, const RVec& x) { return cplx(mass * std::exp(-a * (z.squaredNorm() + x.squaredNorm()))); },
        g);
}

}  // namespace

TEST_CASE("ground state normalization") {
    auto H = QuadraticModel::heisenberg();
    FockTruncation t1 = fock_basis(spectral_data(H, r1(1)), 0);
    CHECK(std::abs(fock_basis_function(t1, 0, c1(0.3)) - std::sqrt(2.0 / kPi)) < 1e-14);
    FockTruncation t2 = fock_basis(spectral_data(H, r1(2)), 0);
    CHECK(std::abs(fock_basis_function(t2, 0, c1(0.0)) - std::sqrt(4.0 / kPi)) < 1e-14);
}

TEST_CASE("Fock basis is orthonormal by quadrature") {
    QuadraticModel M(2, {cmat2(2, cplx(0.5, 0.5), cplx(0.5, -0.5), 1), cmat2(1, 0, 0, -1)});
    for (const RVec& lam : {r2(1.0, 0.2), r2(0.1, 1.0)}) {
        FockTruncation tr = fock_basis(spectral_data(M, lam), 4);
        CMat G = fock_gram_by_quadrature(tr, 4, 10);
        CHECK((G - CMat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("representation matrix examples") {
    auto H = QuadraticModel::heisenberg();
    FockTruncation tr = fock_basis(spectral_data(H, r1(1)), 6);
    RVec none(0);
    CMat U = rep_apply(tr, none, {c1(1.0), r1(0)});
    CHECK(std::abs(std::abs(U(0, 0)) - std::exp(-1.0)) <= 1e-6);

    CMat C = rep_apply(tr, none, {c1(0.0), r1(0.7)});
    CHECK((C - std::polar(1.0, -0.7) * CMat::Identity(tr.size(), tr.size())).cwiseAbs().maxCoeff() < 1e-13);

    Rng r(41);
    for (int i = 0; i < 20; ++i) {
        GroupPoint p = small_point(r, 1, 1);
        CMat Q = rep_apply(tr, none, p);
        cplx want = std::exp(cplx(0.0, -p.x(0)) - std::norm(p.zeta(0)));
        CHECK(std::abs(Q(0, 0) - want) <= 1e-12);
        CHECK((Q - rep_apply_closed_form(tr, none, p)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("central action with a radical") {
    QuadraticModel M = degenerate();
    RVec tau = r2(0.3, -0.2);
    FockTruncation tr = fock_basis(spectral_data(M, r1(1.5)), 4);
    CVec z(2);
    z << 0.0, cplx(0.4, 0.9);
    CMat U = rep_apply(tr, tau, {z, r1(0.5)});
    CVec t = tr.spectral.radical_coords(z);
    double arg = -1.5 * 0.5 - tau(0) * t(0).real() - tau(1) * t(0).imag();
    CHECK((U - std::polar(1.0, arg) * CMat::Identity(tr.size(), tr.size())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("homomorphism and unitarity on the trusted block") {
    // truncation leaks past degree D / 3 at |zeta| = 1, D = 24
    const int D = 24, cap = D / 3;
    Rng r(42);
    struct Setup {
        QuadraticModel model;
        RVec lambda;
        RVec tau;
    };
    std::vector<Setup> setups = {{QuadraticModel::heisenberg(), r1(1.0), RVec(0)},
                                 {QuadraticModel::heisenberg(), r1(-1.0), RVec(0)},
                                 {degenerate(), r1(0.8), r2(0.5, 1.0)}};
    double worst_hom = 0.0, worst_unit = 0.0;
    for (const auto& s : setups) {
        FockTruncation tr = fock_basis(spectral_data(s.model, s.lambda), D);
        for (int i = 0; i < 5; ++i) {
            GroupPoint p = small_point(r, s.model.n(), 1), q = small_point(r, s.model.n(), 1);
            CMat A = rep_apply(tr, s.tau, p), B = rep_apply(tr, s.tau, q);
            CMat AB = rep_apply(tr, s.tau, multiply(s.model, p, q));
            worst_hom = std::max(worst_hom, restrict_block(tr, A * B - AB, cap).cwiseAbs().maxCoeff());
            CMat I = CMat::Identity(tr.block(cap).size(), tr.block(cap).size());
            worst_unit = std::max(worst_unit, (restrict_block(tr, A.adjoint() * A, cap) - I).cwiseAbs().maxCoeff());
        }
    }
    CHECK(worst_hom <= 1e-5);
    CHECK(worst_unit <= 1e-5);
}

TEST_CASE("derived representation matches the closed forms") {
    const int D = 8;
    const double h = 1e-5;
    QuadraticModel M(2, {cmat2(2, cplx(0.5, 0.5), cplx(0.5, -0.5), 1), cmat2(1, 0, 0, -1)});
    Rng r(43);
    for (const RVec& lam : {r2(1.0, 0.2), r2(0.1, 1.0)}) {
        FockTruncation tr = fock_basis(spectral_data(M, lam), D);
        RVec none(0);
        auto X = [&](const CVec& v) {
            return CMat((rep_apply(tr, none, {h * v, RVec::Zero(2)}) - rep_apply(tr, none, {-h * v, RVec::Zero(2)})) /
                        (2.0 * h));
        };
        for (int i = 0; i < 3; ++i) {
            CVec v = r.cvec(2);
            // complex structure of E_lambda: J' is i on E_plus and -i on E_minus
            CMat Xv = X(v), Xjv = X(tr.spectral.Jprime * v);
            CMat Z = 0.5 * (Xv - kI * Xjv), Zb = 0.5 * (Xv + kI * Xjv);
            CHECK(restrict_block(tr, Z - dpi_Z(tr, v, D), D - 2).cwiseAbs().maxCoeff() <= 1e-4);
            CHECK(restrict_block(tr, Zb - dpi_Zbar(tr, v, D), D - 2).cwiseAbs().maxCoeff() <= 1e-4);
        }
    }
}

TEST_CASE("pi(f) of an approximate identity") {
    auto H = QuadraticModel::heisenberg();
    FockTruncation tr = fock_basis(spectral_data(H, r1(1)), 4);
    PiResult pr = pi_of_f(H, tr, RVec(0), narrow_gaussian(1, 1, 1000.0));
    CMat B = restrict_block(tr, pr.matrix, 1);
    CHECK((B - CMat::Identity(B.rows(), B.cols())).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("pi(f) is Hermitian for symmetric real f") {
    QuadraticModel M = degenerate();
    SampledFunction f(2, 1, [](const CVec& z, const RVec& x) { return cplx(std::exp(-z.squaredNorm() - x.squaredNorm())); },
                      GridSpec{4.0, 6.0, 17, 49});
    FockTruncation tr = fock_basis(spectral_data(M, r1(0.7)), 4);
    CMat P = pi_of_f(M, tr, r2(0.4, -0.3), f).matrix;
    CHECK((P - P.adjoint()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("fiber Fourier transform from the trace formula") {
    auto H = QuadraticModel::heisenberg();
    ConvexBody K = ConvexBody::polytope({r1(1), r1(2)});
    SpectralProfile bump = bump_profile(K, r1(1.5), 0.5);
    SampledFunction f = inverse_FN(H, bump, GridSpec{5.2, 400.0, 27, 401}).f;
    for (double lam : {1.2, 1.5, 1.7}) {
        FockTruncation tr = fock_basis(spectral_data(H, r1(lam)), 2);
        CMat P = pi_of_f(H, tr, RVec(0), f).matrix;
        for (cplx zeta : {cplx(0, 0), cplx(0.5, -0.3), cplx(-0.8, 0.6)}) {
            CMat U = rep_apply(tr, RVec(0), {c1(zeta), r1(0)});
            cplx tr_val = (P * U.adjoint()).trace();
            // x-quadrature of f(zeta, .) against exp(-i lam x)
            cplx ff = 0.0;
            const double step = 0.25;
            for (double x = -400.0; x <= 400.0 + 1e-9; x += step) ff += step * f(c1(zeta), r1(x)) * std::polar(1.0, -lam * x);
            cplx rhs = 2.0 / kPi * tr_val * lam;
            CHECK(std::abs(ff - rhs) <= 1e-5);
        }
    }
}

TEST_CASE("Plancherel on small inputs") {
    auto H = QuadraticModel::heisenberg();
    SampledFunction zero(1, 1, [](const CVec&, const RVec&) { return cplx(0.0); });
    Rule lam = simpson(41, -8, 8);
    CHECK(plancherel_residual(H, zero, lam, Rule{}, 4).residual == 0.0);

    SampledFunction f(1, 1,
                      [](const CVec& z, const RVec& x) {
                          return std::exp(cplx(-z.squaredNorm() - 0.25 * x(0) * x(0), 3.0 * x(0)));
                      },
                      GridSpec{5.0, 12.0, 49, 97});
    PlancherelResult pr = plancherel_residual(H, f, simpson(81, -8, 8), Rule{}, 8);
    CHECK(pr.residual <= 1e-3);
    CHECK(pr.lhs > 0.0);
}

TEST_CASE("convolution reduces to the Euclidean one on a flat model") {
    QuadraticModel Z = QuadraticModel::zero(1, 1);
    auto gauss = [](const CVec& z, const RVec& x) { return cplx(std::exp(-z.squaredNorm() - x.squaredNorm())); };
    SampledFunction f(1, 1, gauss, GridSpec{6.0, 6.0, 49, 49});
    SampledFunction c = group_convolve(Z, f, f);
    Rng r(44);
    for (int i = 0; i < 10; ++i) {
        GroupPoint p{0.7 * r.cvec(1), r.rvec(1)};
        double want = kPi / 2 * std::exp(-0.5 * p.zeta.squaredNorm()) * std::sqrt(kPi / 2) * std::exp(-0.5 * p.x.squaredNorm());
        CHECK(std::abs(c(p) - want) <= 1e-6);
    }
}

TEST_CASE("convolution with an approximate identity") {
    auto H = QuadraticModel::heisenberg();
    SampledFunction f(1, 1, [](const CVec& z, const RVec& x) { return cplx(std::exp(-z.squaredNorm() - x.squaredNorm())); });
    SampledFunction c = group_convolve(H, f, narrow_gaussian(1, 1, 1000.0));
    Rng r(45);
    for (int i = 0; i < 10; ++i) {
        GroupPoint p{0.7 * r.cvec(1), r.rvec(1)};
        CHECK(std::abs(c(p) - f(p)) <= 5e-3);
    }
}

TEST_CASE("CR functions live on the ground state") {
    auto H = QuadraticModel::heisenberg();
    ConvexBody K = ConvexBody::polytope({r1(1), r1(2)});
    SampledFunction f = inverse_FN(H, bump_profile(K, r1(1.5), 0.5), GridSpec{4.5, 300.0, 37, 1201}).f;
    double peak = 0.0;
    for (double lam : {1.3, 1.7}) {
        FockTruncation tr = fock_basis(spectral_data(H, r1(lam)), 4);
        CMat P = pi_of_f(H, tr, RVec(0), f).matrix;
        CMat rest = P;
        rest.col(0).setZero();
        double norm = P.operatorNorm();
        peak = std::max(peak, norm);
        CHECK(rest.operatorNorm() <= 1e-4 * norm);
    }
    for (double lam : {-1.5}) {
        FockTruncation tr = fock_basis(spectral_data(H, r1(lam)), 4);
        CHECK(pi_of_f(H, tr, RVec(0), f).matrix.operatorNorm() <= 1e-4 * peak);
    }
}

#include "doctest.h"
#include "support.hpp"

using namespace qcr;
using namespace qcr::test;

namespace {

QuadraticModel flat11() { return QuadraticModel::zero(1, 1); }

QuadraticModel random_hermitian_model(Rng& r, int n, int m) {
    std::vector<CMat> A;
    for (int k = 0; k < m; ++k) {
        CMat B = CMat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) B(i, j) = cplx(r.normal(), r.normal());
        A.push_back(0.5 * (B + B.adjoint()));
    }
    return QuadraticModel(n, A);
}

double dist(const GroupPoint& p, const GroupPoint& q) {
    return std::max((p.zeta - q.zeta).cwiseAbs().maxCoeff(), (p.x - q.x).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("group law examples") {
    auto H = QuadraticModel::heisenberg();
    GroupPoint p = multiply(H, {c1(1.0), r1(0)}, {c1(kI), r1(0)});
    CHECK(std::abs(p.zeta(0) - cplx(1, 1)) < 1e-15);
    CHECK(p.x(0) == doctest::Approx(-2.0));

    GroupPoint q = multiply(flat11(), {c1(1.0), r1(3)}, {c1(kI), r1(4)});
    CHECK(std::abs(q.zeta(0) - cplx(1, 1)) < 1e-15);
    CHECK(q.x(0) == doctest::Approx(7.0));

    GroupPoint g{c1(cplx(0.3, -1)), r1(2.5)};
    CHECK(dist(multiply(H, identity(H), g), g) == 0.0);
}

TEST_CASE("inverse and commutator") {
    auto H = QuadraticModel::heisenberg();
    GroupPoint inv = inverse(H, {c1(cplx(1, 1)), r1(2)});
    CHECK(std::abs(inv.zeta(0) - cplx(-1, -1)) < 1e-15);
    CHECK(inv.x(0) == -2.0);
    GroupPoint e = multiply(H, {c1(1.0), r1(0)}, inverse(H, {c1(1.0), r1(0)}));
    CHECK(dist(e, identity(H)) < 1e-15);

    GroupPoint c = commutator(H, {c1(1.0), r1(0)}, {c1(kI), r1(0)});
    CHECK(std::abs(c.zeta(0)) == 0.0);
    CHECK(c.x(0) == doctest::Approx(-4.0));
    CHECK(commutator(H, {c1(cplx(2, 1)), r1(1)}, {c1(cplx(2, 1)), r1(-3)}).x.norm() < 1e-15);
}

TEST_CASE("rho examples") {
    auto H = QuadraticModel::heisenberg();
    CVec z(1);
    z << cplx(0, 2);
    CHECK(rho(H, {c1(1.0), z})(0) == doctest::Approx(1.0));
    GroupPoint g{c1(cplx(0.7, -0.2)), r1(1.3)};
    CHECK(std::abs(rho(H, embed(H, g))(0)) < 1e-15);
    CVec w(1);
    w << cplx(4, -1.5);
    CHECK(rho(flat11(), {c1(cplx(1, 1)), w})(0) == doctest::Approx(-1.5));
}

TEST_CASE("radical") {
    CHECK(radical(QuadraticModel::heisenberg()).cols() == 0);
    QuadraticModel deg(2, {cmat2(1, 0, 0, 0)});
    CMat R = radical(deg);
    REQUIRE(R.cols() == 1);
    CHECK(std::abs(R(0, 0)) < 1e-12);
    CHECK(std::abs(std::abs(R(1, 0)) - 1.0) < 1e-12);
    CHECK(radical(QuadraticModel::zero(3, 2)).cols() == 3);
}

TEST_CASE("slice examples") {
    auto H = QuadraticModel::heisenberg();
    AmbientEval eiz = [](const CVec&, const CVec& z) { return std::exp(kI * z(0)); };
    const double h = 0.4;
    SampledFunction s = slice(H, eiz, r1(h));
    for (double x : {-1.0, 0.0, 2.5}) {
        CVec zeta = c1(cplx(0.3, 0.8));
        cplx want = std::exp(kI * x - std::norm(zeta(0)) - h);
        CHECK(std::abs(s(zeta, r1(x)) - want) < 1e-14);
    }
    AmbientEval zf = [](const CVec&, const CVec& z) { return z(0); };
    SampledFunction t = slice(flat11(), zf, r1(h));
    CHECK(std::abs(t(c1(1.0), r1(2.0)) - cplx(2.0, h)) < 1e-15);
}

TEST_CASE("slice commutes with the CR field") {
    auto H = QuadraticModel::heisenberg();
    // f(zeta, z) = z^2 + zeta^3 is holomorphic, so both fields can be compared on the slice
    AmbientEval f = [](const CVec& zeta, const CVec& z) { return z(0) * z(0) + zeta(0) * zeta(0) * zeta(0); };
    Rng r(7);
    for (int i = 0; i < 20; ++i) {
        GroupPoint p{r.cvec(1), r.rvec(1)};
        RVec h = r1(r.uniform(-1, 1));
        CVec v = r.cvec(1);
        for (bool conj : {false, true}) {
            cplx on_slice = apply_cr_field(H, v, slice(H, f, h), p, conj);
            CVec z = p.x.cast<cplx>() + kI * (H.phi(p.zeta) + h).cast<cplx>();
            cplx ambient = apply_ambient_cr_field(H, v, f, {p.zeta, z}, conj);
            CHECK(std::abs(on_slice - ambient) < 1e-6);
        }
    }
}

TEST_CASE("associativity on random triples") {
    Rng r(11);
    auto M = random_hermitian_model(r, 2, 2);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        GroupPoint p = r.point(2, 2), q = r.point(2, 2), s = r.point(2, 2);
        GroupPoint a = multiply(M, multiply(M, p, q), s), b = multiply(M, p, multiply(M, q, s));
        worst = std::max(worst, dist(a, b));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("radical is central") {
    QuadraticModel deg(2, {cmat2(1, 0, 0, 0)});
    CMat R = radical(deg);
    Rng r(12);
    for (int i = 0; i < 200; ++i) {
        GroupPoint p{R * r.cvec(1), r.rvec(1)};
        GroupPoint q = r.point(2, 1);
        GroupPoint c = commutator(deg, p, q);
        CHECK(c.x.norm() <= 1e-12);
        CHECK(dist(multiply(deg, p, q), multiply(deg, q, p)) <= 1e-12);
    }
}

TEST_CASE("CR residual soundness and negative witness") {
    QuadraticModel M(2, {cmat2(2, cplx(0.5, 0.5), cplx(0.5, -0.5), 1), cmat2(1, 0, 0, -1)});
    auto wave = [&](const RVec& lam, double sign) {
        return SampledFunction(2, 2, [lam, M, sign](const CVec& zeta, const RVec& x) {
            return std::exp(cplx(0.0, lam.dot(x)) - sign * lam.dot(M.phi(zeta)));
        });
    };
    RVec lam = r2(1.0, 0.2);
    Rng r(13);
    double good = 0.0, bad = 0.0;
    for (int i = 0; i < 1000; ++i) {
        GroupPoint p{0.5 * r.cvec(2), r.rvec(2)};
        CVec v = r.cvec(2);
        v /= v.norm();
        good = std::max(good, std::abs(apply_cr_field(M, v, wave(lam, 1.0), p, true)));
        bad = std::max(bad, std::abs(apply_cr_field(M, v, wave(lam, -1.0), p, true)));
    }
    CHECK(good <= 1e-5);
    CHECK(bad >= 1e-1);
}

TEST_CASE("contract violations") {
    auto H = QuadraticModel::heisenberg();
    CHECK_THROWS_AS(multiply(H, {CVec::Zero(2), r1(0)}, {c1(0.0), r1(0)}), ContractViolation);
    CMat bad(1, 1);
    bad << cplx(0, 1);
    CHECK_THROWS_AS(QuadraticModel(1, {bad}), ContractViolation);
}

#include "qcr/paley_wiener.hpp"
#include "qcr/split.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace qcr;
using namespace qcr::test;

namespace {

QuadraticModel split12() {
    CMat a(1, 1), z(1, 1);
    a << 1.0;
    z << 0.0;
    return QuadraticModel(1, {a, z});
}

}  // namespace

TEST_CASE("split of the n=1, m=2 example") {
    QuadraticModel M = split12();
    ConvexBody K = ConvexBody::polytope({r2(1, 0), r2(2, 0)});
    SplitData s = split(M, K);
    REQUIRE(s.F1_basis.cols() == 1);
    CHECK(std::abs(std::abs(s.F1_basis(1, 0)) - 1.0) < 1e-12);
    CHECK(s.E1_basis.cols() == 0);
    CHECK(s.E2_basis.cols() == 1);
    REQUIRE(s.F2_basis.cols() == 1);
    CHECK(s.phi2.m() == 1);
    CVec u = s.E2_basis.adjoint() * c1(cplx(0.6, 0.8));
    double sign = s.F2_basis(0, 0);
    CHECK(std::abs(sign * s.phi2.phi(u)(0) - 1.0) <= 1e-12);

    SplitInvariants inv = check_split(M, K, s, 200, 5);
    CHECK(inv.phi_difference <= 1e-12);
    CHECK(inv.normality <= 1e-12);
    CHECK(inv.pairing <= 1e-12);
    CHECK(inv.hk_invariance <= 1e-12);
}

TEST_CASE("trivial splits") {
    QuadraticModel M(1, {cmat2(1, 0, 0, 1).topLeftCorner(1, 1), cmat2(0.5, 0, 0, 0).topLeftCorner(1, 1)});
    ConvexBody K = ConvexBody::polytope({r2(1, 0), r2(1, 0.2), r2(1.2, 0)});
    SplitData s = split(M, K);
    CHECK(s.F1_basis.cols() == 0);
    CHECK(s.F2_basis.cols() == 2);
    CHECK(s.E2_basis.cols() == 1);

    QuadraticModel Z = QuadraticModel::zero(1, 1);
    SplitData t = split(Z, ConvexBody::polytope({r1(0)}));
    CHECK(t.F1_basis.cols() == 1);
    CHECK(t.E1_basis.cols() == 1);
    CHECK(t.F2_basis.cols() == 0);
    CHECK(t.E2_basis.cols() == 0);

    CHECK_THROWS_AS(split(QuadraticModel::heisenberg(), ConvexBody::polytope({r1(-2), r1(-1)})), ContractViolation);
}

TEST_CASE("flat embedding") {
    QuadraticModel M = split12();
    ConvexBody K = ConvexBody::polytope({r2(1, 0), r2(2, 0)});
    SplitData s = split(M, K);
    double sign = s.F2_basis(0, 0);
    AmbientEval eiz = [sign](const CVec&, const CVec& z) { return std::exp(kI * sign * z(0)); };
    SampledFunction phi = slice(s.phi2, eiz, r1(0.0));
    SampledFunction emb = embed_flat(s, phi);
    Rng r(61);
    std::vector<GroupPoint> pts;
    for (int i = 0; i < 20; ++i) {
        GroupPoint p{r.cvec(1), r.rvec(2)};
        pts.push_back(p);
        cplx want = std::exp(cplx(-std::norm(p.zeta(0)), p.x(0)));
        CHECK(std::abs(emb(p) - want) <= 1e-12);
    }
    CHECK(cr_residual(M, emb, pts) <= 1e-5);

    SampledFunction one(1, 1, [](const CVec&, const RVec&) { return cplx(1.0); });
    CHECK(embed_flat(s, one)(pts[0]) == cplx(1.0));
}

TEST_CASE("growth along the first factor") {
    QuadraticModel M = split12();
    ConvexBody K = ConvexBody::polytope({r2(1, 0), r2(2, 0)});
    SplitData s = split(M, K);
    std::vector<AmbientPoint> base = {{c1(0.0), CVec::Zero(2)}};
    std::vector<double> radii = {1, 2, 4, 8, 16};
    AmbientEval zero = [](const CVec&, const CVec&) { return cplx(0.0); };
    GrowthReport g0 = verify_split_growth(M, s, zero, base, radii, 3);
    CHECK(g0.degree == 0);
    CHECK_FALSE(g0.exponential);

    AmbientEval bounded = [](const CVec&, const CVec& z) { return std::exp(kI * z(0)); };
    GrowthReport gb = verify_split_growth(M, s, bounded, base, radii, 3);
    CHECK(gb.degree == 0);
    CHECK_FALSE(gb.exponential);

    AmbientEval grows = [](const CVec&, const CVec& z) { return std::exp(kI * z(1)); };
    CHECK(verify_split_growth(M, s, grows, base, radii, 3).exponential);

    QuadraticModel deg(2, {cmat2(1, 0, 0, 0)});
    SplitData sd = split(deg, ConvexBody::polytope({r1(1), r1(2)}));
    REQUIRE(sd.E1_basis.cols() == 1);
    AmbientEval linear = [](const CVec& zeta, const CVec& z) { return zeta(1) * std::exp(kI * z(0)); };
    std::vector<AmbientPoint> b2 = {{CVec::Zero(2), CVec::Zero(1)}};
    GrowthReport g1 = verify_split_growth(deg, sd, linear, b2, radii, 3);
    CHECK(g1.degree == 1);
    CHECK_FALSE(g1.exponential);
}

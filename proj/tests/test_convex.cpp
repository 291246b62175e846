#include "qcr/convex.hpp"

#include "doctest.h"
#include "support.hpp"

#include <limits>

using namespace qcr;
using namespace qcr::test;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

ConvexBody interval(double a, double b) { return ConvexBody::polytope({r1(a), r1(b)}); }

ConvexBody random_polygon(Rng& r, int count) {
    std::vector<RVec> v;
    for (int i = 0; i < count; ++i) v.push_back(r2(r.uniform(-2, 2), r.uniform(-2, 2)));
    return ConvexBody::polytope(v);
}

RMat random_orthonormal(Rng& r, int m, int k) {
    RMat G(m, k);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) G(i, j) = r.normal();
    Eigen::HouseholderQR<RMat> qr(G);
    return qr.householderQ() * RMat::Identity(m, k);
}

}  // namespace

TEST_CASE("support function examples") {
    CHECK(support_function(interval(0, 1), r1(-2)) == doctest::Approx(2.0));
    CHECK(support_function(interval(0, 1), r1(0)) == 0.0);
    ConvexBody ray = ConvexBody::cone({r1(1)});
    CHECK(support_function(ray, r1(1)) == 0.0);
    CHECK(support_function(ray, r1(-1)) == kInf);
    CHECK(support_function(ConvexBody::empty(1), r1(3)) == -kInf);
}

TEST_CASE("polar examples") {
    PolarBody all = polar({r1(0)}, false);
    for (double t : {-100.0, 0.0, 7.0}) CHECK(all.contains(r1(t)));
    PolarBody ray = polar({r1(1)}, true);
    CHECK(ray.contains(r1(2)));
    CHECK(ray.contains(r1(0)));
    CHECK_FALSE(ray.contains(r1(-0.5)));
    auto gens = ray.cone_generators();
    REQUIRE(gens.size() == 1);
    CHECK(gens[0](0) > 0.0);
}

TEST_CASE("boundary distance and erosion") {
    ConvexBody K = interval(1, 2);
    CHECK(boundary_distance(K, r1(1.25)) == doctest::Approx(0.25));
    CHECK(boundary_distance(K, r1(2.0)) == 0.0);
    CHECK(boundary_distance(K, r1(3.0)) == 0.0);

    ConvexBody E = erode(K, 0.5);
    REQUIRE(E.vertices().size() >= 1);
    for (const auto& v : E.vertices()) CHECK(v(0) == doctest::Approx(1.5));
    CHECK(erode(K, 0.6).is_empty());

    ConvexBody sq = erode(ConvexBody::box(r2(0, 0), r2(1, 1)), 0.25);
    CHECK(sq.bbox_lo()(0) == doctest::Approx(0.25));
    CHECK(sq.bbox_lo()(1) == doctest::Approx(0.25));
    CHECK(sq.bbox_hi()(0) == doctest::Approx(0.75));
    CHECK(sq.bbox_hi()(1) == doctest::Approx(0.75));

    // K_eps grows towards the interior as eps decreases
    for (double eps : {0.2, 0.05, 0.001}) {
        ConvexBody Ke = erode(K, eps);
        CHECK(Ke.contains(r1(1.0 + 1.5 * eps)));
        CHECK_FALSE(Ke.contains(r1(1.0 + 0.5 * eps)));
    }
}

TEST_CASE("cone inequality constant") {
    CHECK(cone_inequality_constant(ConvexBody::cone({r1(1)}), 1000, 3) == doctest::Approx(1.0));
    double Cq = cone_inequality_constant(ConvexBody::cone({r2(1, 0), r2(0, 1)}), 10000, 5);
    CHECK(Cq > 0.0);
    CHECK(Cq >= 1.0 - 1e-9);
    CHECK_THROWS(cone_inequality_constant(interval(1, 2), 10, 1));
}

TEST_CASE("project body examples") {
    ConvexBody K = ConvexBody::box(r2(1, 5), r2(2, 6));
    RMat e1(2, 1);
    e1 << 1, 0;
    ConvexBody P = project_body(K, e1);
    CHECK(P.bbox_lo()(0) == doctest::Approx(1.0));
    CHECK(P.bbox_hi()(0) == doctest::Approx(2.0));
    ConvexBody full = project_body(K, RMat::Identity(2, 2));
    CHECK((full.bbox_lo() - K.bbox_lo()).norm() < 1e-15);
    CHECK((full.bbox_hi() - K.bbox_hi()).norm() < 1e-15);
    ConvexBody pt = project_body(ConvexBody::polytope({r2(3, 4)}), e1);
    CHECK(pt.hull_dim() == 0);
    CHECK(pt.vertices()[0](0) == doctest::Approx(3.0));
}

TEST_CASE("lambda_plus and P membership") {
    auto H = QuadraticModel::heisenberg();
    CHECK(lambda_plus_contains(H, r1(1)));
    CHECK(P_contains(H, r1(1)));
    CHECK_FALSE(lambda_plus_contains(H, r1(0)));
    CHECK(P_contains(H, r1(0)));
    CHECK_FALSE(P_contains(H, r1(-1)));
    QuadraticModel deg(2, {cmat2(1, 0, 0, 0)});
    for (double t : {-2.0, -0.1, 0.0, 0.5, 3.0}) {
        CHECK_FALSE(lambda_plus_contains(deg, r1(t)));
        CHECK(P_contains(deg, r1(t)) == (t >= 0.0));
    }
}

TEST_CASE("support function is sublinear") {
    Rng r(21);
    ConvexBody K = random_polygon(r, 7);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        RVec u = r.rvec(2), v = r.rvec(2);
        double t = r.uniform(0, 5);
        worst = std::max(worst, support_function(K, u + v) - support_function(K, u) - support_function(K, v));
        worst = std::max(worst, std::abs(support_function(K, t * u) - t * support_function(K, u)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("projection identity on random subspaces") {
    Rng r(22);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RVec> v;
        for (int i = 0; i < 8; ++i) v.push_back(r.rvec(3));
        ConvexBody K = ConvexBody::polytope(v);
        int k = 1 + trial % 2;
        RMat B = random_orthonormal(r, 3, k);
        ConvexBody P = project_body(K, B);
        for (int i = 0; i < 20; ++i) {
            RVec c = r.rvec(k);
            worst = std::max(worst, std::abs(support_function(K, B * c) - support_function(P, c)));
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("bipolar agrees with the hull") {
    Rng r(23);
    std::vector<RVec> pts;
    for (int i = 0; i < 9; ++i) pts.push_back(r2(r.uniform(-2, 2), r.uniform(-2, 2)));
    pts.push_back(r2(1.5, 0));
    pts.push_back(r2(-1.5, 0));
    pts.push_back(r2(0, 1.5));
    pts.push_back(r2(0, -1.5));
    ConvexBody K = ConvexBody::polytope(pts);
    PolarBody bipolar = polar(polar_vertices(pts), false);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        RVec s = r2(r.uniform(-3, 3), r.uniform(-3, 3));
        if (std::abs(boundary_distance(K, s)) < 1e-9 && K.contains(s)) continue;
        if (bipolar.contains(s, 1e-12) != K.contains(s, 1e-12)) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("interior characterization of the positive cone") {
    Rng r(24);
    QuadraticModel M(2, {cmat2(1, 0, 0, -1), cmat2(2, cplx(0, 1), cplx(0, -1), 2)});
    for (int i = 0; i < 500; ++i) {
        RVec lam = r.rvec(2);
        Eigen::SelfAdjointEigenSolver<CMat> es(M.A(lam));
        double lo = es.eigenvalues().minCoeff();
        if (std::abs(lo) < 1e-6) continue;
        CHECK(lambda_plus_contains(M, lam) == (lo > 0.0));
        CHECK(P_contains(M, lam) == (lo > 0.0));
    }
}

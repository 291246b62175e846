#include "qcr/paley_wiener.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace qcr;
using namespace qcr::test;

namespace {

ConvexBody interval(double a, double b) { return ConvexBody::polytope({r1(a), r1(b)}); }

// Composite Simpson of g over [a, b] with n (odd) nodes, written out independently of the library rules.
template <class G>
cplx simpson_sum(G g, double a, double b, int n) {
    double h = (b - a) / (n - 1);
    cplx s = g(a) + g(b);
    for (int i = 1; i < n - 1; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
    return s * h / 3.0;
}

std::vector<GroupPoint> points(Rng& r, int count) {
    std::vector<GroupPoint> p;
    for (int i = 0; i < count; ++i) p.push_back({0.8 * r.cvec(1), r1(r.uniform(-4, 4))});
    return p;
}

}  // namespace

TEST_CASE("inverse transform against direct quadrature") {
    auto H = QuadraticModel::heisenberg();
    SpectralProfile bump = bump_profile(interval(1, 2), r1(1.5), 0.5);
    InverseFN inv = inverse_FN(H, bump);
    CHECK(inv.cr_guaranteed);
    for (double x : {0.0, 0.7, -3.0, 12.0}) {
        for (double zr : {0.0, 0.6}) {
            cplx want = simpson_sum([&](double l) { return bump.psi(r1(l)) * l * std::exp(cplx(-l * zr * zr, l * x)); },
                                    1.0, 2.0, 20001) /
                        (kPi * kPi);
            CHECK(std::abs(inv.f(c1(zr), r1(x)) - want) <= 1e-8);
        }
    }
}

TEST_CASE("zero profile and zero function") {
    auto H = QuadraticModel::heisenberg();
    InverseFN inv = inverse_FN(H, zero_profile(interval(1, 2)));
    CHECK(inv.f(c1(0.3), r1(1.0)) == cplx(0.0));
    SampledFunction zero(1, 1, [](const CVec&, const RVec&) { return cplx(0.0); }, GridSpec{4.0, 20.0, 9, 41});
    ForwardResult fw = forward_FN(H, zero, {r1(1.0), r1(1.5)});
    for (cplx v : fw.values) CHECK(v == cplx(0.0));
}

TEST_CASE("profile checks") {
    auto H = QuadraticModel::heisenberg();
    SpectralProfile bump = bump_profile(interval(1, 2), r1(1.3), 0.25, {1.0, 2.0});
    ProfileCheck pc = validate_profile(bump);
    CHECK(pc.ok);
    CHECK(pc.max_outside == 0.0);
    CHECK(profile_in_closed_cone(H, interval(1, 2)));
    CHECK_FALSE(profile_in_closed_cone(H, interval(-2, -1)));
    CHECK_FALSE(profile_in_closed_cone(QuadraticModel(2, {cmat2(1, 0, 0, 0)}), interval(1, 2)));
    CHECK_THROWS_AS(bump_profile(interval(1, 2), r1(1.9), 0.5), ContractViolation);
}

TEST_CASE("extension routes and boundary values") {
    auto H = QuadraticModel::heisenberg();
    SpectralProfile bump = bump_profile(interval(1, 2), r1(1.5), 0.5);
    ExtensionResult A = make_extension(H, bump, Route::A);
    ExtensionResult B = make_extension(H, bump, Route::B);
    SampledFunction f0 = inverse_FN(H, bump).f;
    Rng r(51);
    for (int i = 0; i < 10; ++i) {
        CVec zeta = 0.8 * r.cvec(1);
        CVec z = c1(cplx(r.uniform(-4, 4), r.uniform(-1, 2)));
        cplx a = A.f(zeta, z), b = B.f(zeta, z);
        CHECK(std::abs(a - b) <= 1e-5 * std::max(1.0, std::abs(b)));
        GroupPoint g{zeta, r1(z(0).real())};
        AmbientPoint e = embed(H, g);
        CHECK(std::abs(B.f(e.zeta, e.z) - f0(g)) <= 1e-6);
    }
    CHECK_THROWS_AS(make_extension(H, bump_profile(interval(-2, -1), r1(-1.5), 0.5), Route::B), ContractViolation);
}

TEST_CASE("narrow profile approaches a single character") {
    auto H = QuadraticModel::heisenberg();
    const double delta = 0.01;
    SpectralProfile bump = bump_profile(interval(0.5, 1.5), r1(1.0), delta);
    ExtensionResult B = make_extension(H, bump, Route::B);
    cplx C = B.f(c1(0.0), c1(0.0));
    REQUIRE(std::abs(C) > 0.0);
    for (cplx z : {cplx(0.5, 0.2), cplx(-1.0, 0.0), cplx(0.3, -0.4)}) {
        cplx ratio = B.f(c1(cplx(0.4, -0.2)), c1(z)) / (C * std::exp(kI * z));
        CHECK(std::abs(ratio - 1.0) <= 0.05);
    }
}

TEST_CASE("margin and CR residual") {
    auto H = QuadraticModel::heisenberg();
    SpectralProfile bump = bump_profile(interval(1, 2), r1(1.5), 0.5);
    SweepBox box;
    auto pts = sweep_points(H, box, 50, 3);
    AmbientEval zero = [](const CVec&, const CVec&) { return cplx(0.0); };
    CHECK(pw_margin(H, zero, bump.K, 3, pts).margin == 0.0);
    MarginResult mr = pw_margin(H, make_extension(H, bump, Route::B).f, bump.K, 3, pts);
    CHECK(mr.finite);
    CHECK(mr.margin > 0.0);

    Rng r(52);
    auto gp = points(r, 30);
    CHECK(cr_residual(H, inverse_FN(H, bump).f, gp) <= 1e-5);
    SpectralProfile neg = bump_profile(interval(-2, -1), r1(-1.5), 0.5);
    InverseFN control = inverse_FN(H, neg);
    // still CR, but growing in zeta
    CHECK_FALSE(control.cr_guaranteed);
    CHECK(std::abs(control.f(c1(2.0), r1(0))) > 10.0 * std::abs(control.f(c1(0.0), r1(0))));
}

TEST_CASE("spectral window on an interval") {
    ConvexBody K = interval(1, 2);
    SpectralProfile w = spectral_window(K, 0.4);
    for (double l = 0.9; l <= 2.1; l += 0.001) {
        double v = w.psi(r1(l)).real();
        if (l >= 1.4 && l <= 1.6) CHECK(std::abs(v - 1.0) <= 1e-12);
        if (l <= 1.1 || l >= 1.9) CHECK(v == 0.0);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(window_sandwich_violation(K, 0.4, w, 2001) <= 1e-10);
    SpectralProfile e = spectral_window(K, 1.5);
    CHECK(e.psi(r1(1.5)) == cplx(0.0));
}

TEST_CASE("modulation shifts the fiber spectrum") {
    auto H = QuadraticModel::heisenberg();
    SpectralProfile bump = bump_profile(interval(1, 2), r1(1.5), 0.5);
    SampledFunction f0 = inverse_FN(H, bump).f;
    Rule axis = trapezoid(121, 0.0, 3.0);
    std::vector<CVec> stencil = {c1(0.0), c1(cplx(0.3, 0.2))};
    auto inside = [](const RVec& l) { return l(0) >= 0.9 && l(0) <= 2.1; };
    SupportProfile sp = spectrum_support(H, f0, axis, stencil, inside, 400.0, 0.25);
    CHECK(sp.outside_fraction <= 1e-4);
}

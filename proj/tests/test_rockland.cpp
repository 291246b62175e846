#include "qcr/rockland.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace qcr;
using namespace qcr::test;

TEST_CASE("Heisenberg spectrum at lambda = 1") {
    auto H = QuadraticModel::heisenberg();
    RocklandSpectrum rs = rockland_spectrum(fock_basis(spectral_data(H, r1(1)), 8), RVec(0));
    REQUIRE(rs.eigenvalues.size() >= 3);
    CHECK(std::abs(rs.eigenvalues[0] - 5.0) <= 1e-8);
    CHECK(std::abs(rs.eigenvalues[1] - 37.0) <= 1e-8);
    CHECK(std::abs(rs.eigenvalues[2] - 101.0) <= 1e-8);
    CHECK(std::abs(rs.ground_value - 5.0) <= 1e-8);
    CHECK(std::abs(rs.ground_vector(0)) >= 1.0 - 1e-8);
}

TEST_CASE("closed form eigenvalue") {
    QuadraticModel M(2, {cmat2(2, cplx(0.5, 0.5), cplx(0.5, -0.5), 1), cmat2(1, 0, 0, -1)});
    RVec lam = r2(0.7, -0.4);
    SpectralData sd = spectral_data(M, lam);
    // ground value (2 tr|J| + |tau|^2 / 2)^2 + |lambda|^2 with tr|J| the sum of mu
    double want = std::pow(2.0 * sd.mu.sum(), 2) + lam.squaredNorm();
    CHECK(closed_form_eigenvalue(sd, RVec(0), {0, 0}) == doctest::Approx(want).epsilon(1e-14));

    SpectralData z = spectral_data(QuadraticModel::zero(1, 1), r1(0));
    RVec tau = r2(0.3, -0.2);
    double q = 0.5 * tau.squaredNorm();
    CHECK(closed_form_eigenvalue(z, tau, {}) == doctest::Approx(q * q));
    RocklandSpectrum rz = rockland_spectrum(fock_basis(z, 4), tau);
    CHECK(std::abs(rz.ground_value - q * q) <= 1e-15);
}

TEST_CASE("spectrum on a random two-dimensional model") {
    QuadraticModel M(2, {cmat2(1.3, cplx(-0.4, 0.9), cplx(-0.4, -0.9), -0.6)});
    for (double l : {1.0, 0.7, -1.4}) {
        FockTruncation tr = fock_basis(spectral_data(M, r1(l)), 8);
        RocklandSpectrum rs = rockland_spectrum(tr, RVec(0));
        std::vector<double> want;
        for (int i : tr.block(4)) want.push_back(closed_form_eigenvalue(tr.spectral, RVec(0), tr.indices[i]));
        std::sort(want.begin(), want.end());
        REQUIRE(want.size() == rs.eigenvalues.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(rs.eigenvalues[i] - want[i]) <= 1e-6 * want[i]);
        CHECK(rs.eigenvalues.front() > 0.0);
    }
}

TEST_CASE("homogeneity under dilation") {
    QuadraticModel M(2, {cmat2(1, 0, 0, 0)});
    RVec tau = r2(0.3, -0.2);
    const double t = 2.0;
    RocklandSpectrum a = rockland_spectrum(fock_basis(spectral_data(M, r1(0.8)), 6), tau);
    RocklandSpectrum b = rockland_spectrum(fock_basis(spectral_data(M, r1(t * t * 0.8)), 6), t * tau);
    REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
    for (std::size_t i = 0; i < a.eigenvalues.size(); ++i)
        CHECK(std::abs(b.eigenvalues[i] - std::pow(t, 4) * a.eigenvalues[i]) <= 1e-9 * b.eigenvalues[i]);
}

TEST_CASE("assembly needs D >= 4") {
    auto H = QuadraticModel::heisenberg();
    CHECK_THROWS_AS(assemble_dpi_L(fock_basis(spectral_data(H, r1(1)), 3), RVec(0)), ContractViolation);
}

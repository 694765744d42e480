#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "specstab/lifting.hpp"

using namespace specstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("lifting constants sit just below their eigenvalues") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 2);
    const lifting_system sys = build_lifting(basis, 1);
    // k_1 = lambda_1 - sqrt(2 pi^2) * lambda_1^{-3/4} = lambda_1 - (2 pi^2)^{-1/4}
    const double shift = std::pow(2.0 * pi * pi, -0.25);
    CHECK_THAT(sys.k(0), WithinRel(2.0 * pi * pi - shift, 1e-14));
    CHECK_THAT(sys.k(0) - basis.lambda(1), WithinAbs(-0.4745, 2e-4));
    CHECK(sys.min_gap_k_lambda > 0.0);
    CHECK(sys.min_abs_denominator <= sys.min_gap_k_lambda);
}

TEST_CASE("two-control lifting constant matches the frozen value") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 8);
    const lifting_system sys = build_lifting(basis, 2);
    CHECK_THAT(sys.k(0), WithinAbs(19.5005856611, 1e-8));
}

TEST_CASE("denominator table encodes the sign split at the controller cut") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 6);
    const lifting_system sys = build_lifting(basis, 2);
    for (int i = 0; i < 2; ++i) {
        for (int n = 0; n < 6; ++n) {
            const double lam = basis.lambda(n + 1);
            const double want = (n < 2) ? sys.k(i) - lam : sys.k(i) + lam;
            CHECK(sys.denom(i, n) == want);
        }
        for (int n = 0; n < 2; ++n)
            CHECK_THAT(sys.trace_t(i, n), WithinRel(-1.0 / sys.denom(i, n), 1e-15));
    }
    // k_i lies below lambda_i, so the head diagonal is negative and the
    // tail block is strictly positive
    CHECK(sys.denom(0, 0) < 0.0);
    CHECK(sys.denom(1, 1) < 0.0);
    CHECK(sys.denom(0, 2) > 0.0);
}

TEST_CASE("lifting requires a basis strictly larger than the controller") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 3);
    CHECK_THROWS_AS(build_lifting(basis, 3), basis_too_small);
    CHECK_THROWS_AS(build_lifting(basis, 0), config_error);
}

TEST_CASE("single-control input coefficient matches the frozen closed form") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 4);
    const lifting_system sys = build_lifting(basis, 1);
    const lift_matrices mats = assemble_lift_matrices(sys);
    // B_11 = G_11 / (k_1 - lambda_1)^2 = (2 pi^2)^{3/2}
    CHECK_THAT(mats.b(0, 0), WithinRel(87.69899399994526, 1e-12));
    // with a single lifting constant C is exactly k_1 B, tail included
    CHECK(mats.btil.cwiseAbs().maxCoeff() > 0.0); // mode (2,1) couples to (1,1)
    CHECK((mats.c - sys.k(0) * mats.b).cwiseAbs().maxCoeff() < 1e-12 * std::abs(mats.c(0, 0)));
    CHECK((mats.ctil - sys.k(0) * mats.btil).cwiseAbs().maxCoeff() <=
          1e-12 * mats.ctil.cwiseAbs().maxCoeff());
}

TEST_CASE("boundary-data coefficients match the frozen example") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 6);
    const lifting_system sys = build_lifting(basis, 2);
    const Eigen::VectorXd coeffs = dirichlet_coefficient(sys, 1, 1);
    REQUIRE(coeffs.size() == 6);
    CHECK_THAT(coeffs(0), WithinAbs(82.721268, 1e-3));
    // mode 2 is (1,2): tangential mismatch with mode 1 zeroes the coupling
    CHECK(coeffs(1) == 0.0);
    CHECK_THROWS_AS(dirichlet_coefficient(sys, 3, 1), config_error);
    CHECK_THROWS_AS(dirichlet_coefficient(sys, 1, 7), config_error);
}

TEST_CASE("assembled input matrices honor tangential orthogonality") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 10);
    const lifting_system sys = build_lifting(basis, 3);
    const lift_matrices mats = assemble_lift_matrices(sys);
    // controller modes on the unit square: (1,1), (1,2), (2,1)
    CHECK(mats.b(0, 1) == 0.0); // ky 1 vs 2
    CHECK(mats.b(1, 0) == 0.0);
    CHECK(mats.b(0, 2) != 0.0); // ky match
    // entries reproduce the direct sum over lifting constants
    double want = 0.0;
    const double g = trace_inner_product(basis.mode(1), basis.mode(3), unit);
    for (int i = 0; i < 3; ++i) want += g / (sys.denom(i, 2) * sys.denom(i, 0));
    CHECK_THAT(mats.b(2, 0), WithinRel(want, 1e-13));
}

TEST_CASE("lifted control fields stack the head and tail blocks") {
    const rectangle unit;
    const spectral_basis basis = spectral_basis::enumerate(unit, 10);
    const lifting_system sys = build_lifting(basis, 3);
    const lift_matrices mats = assemble_lift_matrices(sys);
    Eigen::VectorXd u(3);
    u << 1.0, -0.5, 2.0;
    const Eigen::VectorXd field = lift_field(mats, u);
    REQUIRE(field.size() == 10);
    CHECK((field.head(3) - mats.b * u).cwiseAbs().maxCoeff() == 0.0);
    CHECK((field.tail(7) - mats.btil * u).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXd bad(2);
    CHECK_THROWS_AS(lift_field(mats, bad), config_error);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "specstab/nonlinearity.hpp"

using namespace specstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("builtin reaction terms evaluate and carry exact constants") {
    const nonlinearity f = make_nonlinearity("a*sin(z)+b*z", 50.0, 50.0);
    CHECK_THAT(f.lipschitz, WithinRel(100.0, 1e-15));
    CHECK(f(0.0) == 0.0);
    CHECK_THAT(f(1.0), WithinRel(50.0 * std::sin(1.0) + 50.0, 1e-15));

    const nonlinearity lin = make_nonlinearity("a*z", -7.0, 0.0);
    CHECK_THAT(lin.lipschitz, WithinRel(7.0, 1e-15));
    CHECK_THAT(lin(2.0), WithinRel(-14.0, 1e-15));

    const nonlinearity th = make_nonlinearity("a*tanh(z)", 3.0, 0.0);
    CHECK_THAT(th.lipschitz, WithinRel(3.0, 1e-15));
    CHECK_THAT(th(0.5), WithinRel(3.0 * std::tanh(0.5), 1e-15));

    const nonlinearity z = make_nonlinearity("zero", 0.0, 0.0);
    CHECK(z.is_zero());
    CHECK(z(123.0) == 0.0);

    CHECK_THROWS_AS(make_nonlinearity("z^2", 1.0, 0.0), config_error);
}

TEST_CASE("vectorized evaluation matches the scalar form") {
    const nonlinearity f = make_nonlinearity("a*sin(z)+b*z", 2.0, -0.5);
    Eigen::ArrayXXd z(2, 3);
    z << -1.0, 0.0, 0.5, 1.5, -2.5, 3.0;
    const Eigen::ArrayXXd out = f.apply(z);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) CHECK_THAT(out(i, j), WithinAbs(f(z(i, j)), 1e-15));
}

TEST_CASE("the Lipschitz audit accepts honest declarations") {
    CHECK_NOTHROW(audit_nonlinearity(make_nonlinearity("a*sin(z)+b*z", 50.0, 50.0), 100.0));
    CHECK_NOTHROW(audit_nonlinearity(make_nonlinearity("a*z", 100.0, 0.0), 100.0));
    CHECK_NOTHROW(audit_nonlinearity(make_nonlinearity("a*tanh(z)", 5.0, 0.0), 5.0));
    CHECK_NOTHROW(audit_nonlinearity(make_nonlinearity("zero", 0.0, 0.0), 0.0));
    // overstating the constant is allowed, it just weakens the certificate
    CHECK_NOTHROW(audit_nonlinearity(make_nonlinearity("a*z", 10.0, 0.0), 50.0));
}

TEST_CASE("the Lipschitz audit rejects understated declarations") {
    CHECK_THROWS_AS(audit_nonlinearity(make_nonlinearity("a*z", 100.0, 0.0), 50.0),
                    config_error);
    CHECK_THROWS_AS(audit_nonlinearity(make_nonlinearity("a*sin(z)+b*z", 50.0, 50.0), 99.0),
                    config_error);
    CHECK_THROWS_AS(audit_nonlinearity(make_nonlinearity("a*z", 1.0, 0.0), -1.0), config_error);
}

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "specstab/integrate.hpp"

using namespace specstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(Eigen::Index(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}
} // namespace

TEST_CASE("pure linear dynamics integrate exactly") {
    const Eigen::VectorXd d = vec({-1.0, -2.0, -40.0});
    const Eigen::VectorXd y0 = vec({1.0, -0.5, 2.0});
    const std::vector<double> times = {0.0, 0.25, 1.0, 2.0};
    auto rhs = [&](double, const Eigen::VectorXd& y) { return d.cwiseProduct(y).eval(); };
    const integration_result res = integrate_etdrk2(d, rhs, y0, times);
    REQUIRE(res.completed);
    CHECK(res.n_rejected == 0);
    for (std::size_t s = 0; s < times.size(); ++s)
        for (int i = 0; i < 3; ++i)
            CHECK_THAT(res.states(Eigen::Index(s), i),
                       WithinRel(y0(i) * std::exp(d(i) * times[s]), 1e-12));
}

TEST_CASE("logistic growth matches the closed-form solution") {
    const Eigen::VectorXd d = vec({1.0});
    const Eigen::VectorXd y0 = vec({0.2});
    const std::vector<double> times = {0.0, 0.5, 1.0, 2.0};
    auto rhs = [](double, const Eigen::VectorXd& y) {
        return vec({y(0) * (1.0 - y(0))});
    };
    const integration_result res = integrate_etdrk2(d, rhs, y0, times);
    REQUIRE(res.completed);
    for (std::size_t s = 0; s < times.size(); ++s) {
        const double want = 1.0 / (1.0 + 4.0 * std::exp(-times[s]));
        CHECK_THAT(res.states(Eigen::Index(s), 0), WithinAbs(want, 1e-5));
    }
    CHECK(res.n_rhs == 2 * (res.n_steps + res.n_rejected));
}

TEST_CASE("input validation rejects malformed requests") {
    const Eigen::VectorXd d = vec({-1.0});
    const Eigen::VectorXd y0 = vec({1.0});
    auto rhs = [&](double, const Eigen::VectorXd& y) { return y; };
    CHECK_THROWS_AS(integrate_etdrk2(d, rhs, y0, {0.0}), config_error);
    CHECK_THROWS_AS(integrate_etdrk2(d, rhs, y0, {0.0, 0.0}), config_error);
    CHECK_THROWS_AS(integrate_etdrk2(d, rhs, vec({1.0, 2.0}), {0.0, 1.0}), config_error);
    integrate_options bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(integrate_etdrk2(d, rhs, y0, {0.0, 1.0}, bad), config_error);
}

TEST_CASE("finite-time blowup is reported, not thrown") {
    const Eigen::VectorXd d = vec({0.0});
    const Eigen::VectorXd y0 = vec({5.0}); // y' = y^2 blows up at t = 0.2
    auto rhs = [](double, const Eigen::VectorXd& y) { return vec({y(0) * y(0)}); };
    const std::vector<double> times = {0.0, 0.1, 0.19, 0.3};

    integrate_options budget;
    budget.max_steps = 20000;
    const integration_result res = integrate_etdrk2(d, rhs, y0, times, budget);
    CHECK_FALSE(res.completed);
    CHECK_FALSE(res.failure.empty());
    CHECK(res.n_complete >= 3); // the samples before the singularity were reached
    CHECK(res.t_reached >= 0.19);
    CHECK(res.t_reached < 0.3);
    CHECK_THAT(res.states(2, 0), WithinRel(5.0 / (1.0 - 5.0 * 0.19), 1e-3));

    // a right-hand side that turns non-finite is caught, not propagated
    auto nan_rhs = [](double t, const Eigen::VectorXd&) {
        return vec({t < 0.05 ? 0.0 : std::numeric_limits<double>::quiet_NaN()});
    };
    const integration_result inf_res = integrate_etdrk2(d, nan_rhs, y0, times);
    CHECK_FALSE(inf_res.completed);
    CHECK(inf_res.failure.find("non-finite") != std::string::npos);
    CHECK(inf_res.t_reached < 0.1);
}

TEST_CASE("persistently rejected steps underflow cleanly") {
    const Eigen::VectorXd d = vec({0.0});
    const Eigen::VectorXd y0 = vec({0.0});
    auto rhs = [](double t, const Eigen::VectorXd&) {
        return vec({1e12 * std::sin(1e12 * t)});
    };
    const integration_result res = integrate_etdrk2(d, rhs, y0, {0.0, 1.0});
    CHECK_FALSE(res.completed);
    CHECK(res.failure.find("underflow") != std::string::npos);
    CHECK(res.n_complete == 1);
}

TEST_CASE("stiff linear parts do not constrain the step size") {
    // an explicit method would need h ~ 1e-6 here; the exponential
    // integrator cruises through with a handful of steps
    const int dim = 50;
    Eigen::VectorXd d(dim), y0(dim);
    for (int i = 0; i < dim; ++i) {
        d(i) = -double(i + 1) * double(i + 1);
        y0(i) = 1.0 / double(i + 1);
    }
    auto rhs = [&](double, const Eigen::VectorXd& y) { return d.cwiseProduct(y).eval(); };
    const integration_result res = integrate_etdrk2(d, rhs, y0, {0.0, 1.0});
    REQUIRE(res.completed);
    CHECK(res.n_steps < 200);
    for (int i = 0; i < dim; ++i)
        CHECK_THAT(res.states(1, i), WithinAbs(y0(i) * std::exp(d(i)), 1e-10));
}

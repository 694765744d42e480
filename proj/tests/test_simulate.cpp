#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "specstab/simulate.hpp"

using namespace specstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
double simpson2(double lo, double hi, int panels, const std::function<double(double)>& f) {
    const double h = (hi - lo) / panels;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return acc * h / 3.0;
}
} // namespace

TEST_CASE("initial coefficient kinds cover zero, single mode, and cos(x)") {
    run_config cfg;
    cfg.m_modes = 12;
    const spectral_basis basis = spectral_basis::enumerate(cfg.domain, 12);

    cfg.init_kind = "zero";
    CHECK(initial_coefficients(cfg, basis).norm() == 0.0);

    cfg.init_kind = "mode";
    cfg.init_jx = 2;
    cfg.init_ky = 1;
    cfg.init_amplitude = 0.25;
    const Eigen::VectorXd pm = initial_coefficients(cfg, basis);
    CHECK(pm.cwiseAbs().sum() == 0.25); // exactly one entry set
    cfg.init_jx = 50;
    CHECK_THROWS_AS(initial_coefficients(cfg, basis), config_error);

    // cos(x) projections against independent numeric quadrature
    cfg.init_kind = "cos(x)";
    cfg.init_amplitude = 1.0;
    const Eigen::VectorXd pc = initial_coefficients(cfg, basis);
    for (int n = 1; n <= 12; ++n) {
        const eigen_mode& md = basis.mode(n);
        const double ix = simpson2(0.0, 1.0, 2000, [&](double x) {
            return std::cos(x) * std::sin(md.jx * pi * x);
        });
        const double iy = simpson2(0.0, 1.0, 2000, [&](double y) {
            return std::sin(md.ky * pi * y);
        });
        CHECK_THAT(pc(n - 1), WithinAbs(2.0 * ix * iy, 1e-10));
    }
}

TEST_CASE("open-loop linear dynamics reproduce the modal exponentials") {
    run_config cfg;
    cfg.m_modes = 8;
    cfg.n_ctrl = 1;
    cfg.f_kind = "zero";
    cfg.declared_l = 0.0;
    cfg.init_kind = "cos(x)";
    cfg.t_end = 0.1;
    cfg.sample_count = 11;
    cfg.rel_tol = 1e-9;
    cfg.abs_tol = 1e-12;

    const trajectory traj = simulate_scenario(scenario_kind::open_loop, cfg);
    REQUIRE(traj.completed);
    REQUIRE(traj.sample_count() == 11);
    const spectral_basis basis = spectral_basis::enumerate(cfg.domain, 8);
    const Eigen::VectorXd p0 = initial_coefficients(cfg, basis);
    for (int s = 0; s < 11; ++s) {
        const double t = traj.times[std::size_t(s)];
        for (int i = 0; i < 8; ++i)
            CHECK_THAT(traj.states(s, i),
                       WithinAbs(p0(i) * std::exp(-basis.lambda(i + 1) * t), 1e-9));
        CHECK(traj.norm_z[std::size_t(s)] == traj.norm_p[std::size_t(s)]);
        CHECK(traj.u.row(s).norm() == 0.0);
    }
}

TEST_CASE("an unstable reaction term makes the open loop grow") {
    run_config cfg;
    cfg.m_modes = 24;
    cfg.f_kind = "a*z";
    cfg.f_a = 50.0;
    cfg.declared_l = 50.0;
    cfg.init_kind = "cos(x)";
    cfg.t_end = 0.1;
    cfg.sample_count = 11;
    const trajectory traj = simulate_scenario(scenario_kind::open_loop, cfg);
    REQUIRE(traj.completed);
    // the ground mode sees a*z - lambda_1 z with a > lambda_1: growth
    CHECK(traj.norm_z.back() > 2.0 * traj.norm_z.front());
}

TEST_CASE("certified state feedback obeys its decay envelope") {
    run_config cfg;
    cfg.m_modes = 12;
    cfg.n_ctrl = 1;
    cfg.m = 0.6;
    cfg.f_kind = "zero";
    cfg.declared_l = 0.0;
    cfg.init_kind = "cos(x)";
    cfg.t_end = 1.0;
    cfg.sample_count = 21;

    const trajectory traj = simulate_scenario(scenario_kind::state_feedback, cfg);
    REQUIRE(traj.completed);
    REQUIRE(traj.has_design);
    CHECK(traj.certified);
    CHECK(traj.warnings.empty());
    const double p0_sq = traj.norm_p[0] * traj.norm_p[0];
    for (int s = 0; s < traj.sample_count(); ++s) {
        const double bound =
            p0_sq * std::exp(-(2 * cfg.m - 1) * traj.times[std::size_t(s)]);
        CHECK(traj.norm_p[std::size_t(s)] * traj.norm_p[std::size_t(s)] <=
              bound * (1 + 1e-9));
    }
    // the control is active at t = 0 and fades with the state
    CHECK(traj.u.row(0).norm() > 0.0);
    CHECK(traj.u.row(20).norm() < traj.u.row(0).norm());
}

TEST_CASE("uncertified designs run but carry a warning") {
    run_config cfg;
    cfg.m_modes = 16;
    cfg.n_ctrl = 6;
    cfg.m = 120.0;
    cfg.f_kind = "zero";
    cfg.declared_l = 0.0;
    cfg.init_kind = "mode";
    cfg.init_jx = 1;
    cfg.init_ky = 1;
    cfg.t_end = 0.01;
    cfg.sample_count = 5;
    const trajectory traj = simulate_scenario(scenario_kind::state_feedback, cfg);
    REQUIRE(traj.completed);
    CHECK_FALSE(traj.certified);
    REQUIRE_FALSE(traj.warnings.empty());
    CHECK(traj.warnings[0].find("UncertifiedDesign") == 0);
}

TEST_CASE("output feedback with a satisfied partition contracts the error") {
    run_config cfg;
    cfg.m_modes = 64;
    cfg.n_ctrl = 6;
    cfg.m = 120.0;
    cfg.f_kind = "a*sin(z)+b*z";
    cfg.f_a = 50.0;
    cfg.f_b = 50.0;
    cfg.declared_l = 100.0;
    cfg.init_kind = "cos(x)";
    cfg.vertical_lines = {0.25, 0.5, 0.75};
    cfg.m_sub = 12;
    cfg.t_end = 0.05;
    cfg.sample_count = 11;

    const trajectory traj = simulate_scenario(scenario_kind::output_feedback, cfg);
    REQUIRE(traj.completed);
    REQUIRE(traj.has_partition);
    CHECK(traj.partition_satisfied);
    CHECK_THAT(traj.envelope_rate, WithinRel(17.0 * pi * pi - 100.0, 1e-12));
    const double eps0 = traj.norm_eps.front();
    REQUIRE(eps0 > 0.0);
    for (int s = 0; s < traj.sample_count(); ++s) {
        const double bound =
            eps0 * std::exp(-traj.envelope_rate * traj.times[std::size_t(s)]) + 1e-6 * eps0;
        CHECK(traj.norm_eps[std::size_t(s)] <= bound);
    }
}

TEST_CASE("a too-coarse partition is flagged but still simulated") {
    run_config cfg;
    cfg.m_modes = 24;
    cfg.n_ctrl = 4;
    cfg.m = 20.0;
    cfg.f_kind = "a*z";
    cfg.f_a = 100.0;
    cfg.declared_l = 100.0;
    cfg.init_kind = "mode";
    cfg.vertical_lines = {0.5};
    cfg.m_sub = 8;
    cfg.t_end = 0.01;
    cfg.sample_count = 3;
    const trajectory traj = simulate_scenario(scenario_kind::output_feedback, cfg);
    REQUIRE(traj.completed);
    CHECK_FALSE(traj.partition_satisfied);
    bool found = false;
    for (const std::string& w : traj.warnings)
        if (w.find("PartitionUnsatisfied") == 0) found = true;
    CHECK(found);
}

TEST_CASE("zero initial error and zero reaction keep the observer exact") {
    run_config cfg;
    cfg.m_modes = 16;
    cfg.n_ctrl = 4;
    cfg.m = 20.0;
    cfg.f_kind = "zero";
    cfg.declared_l = 0.0;
    cfg.init_kind = "cos(x)";
    cfg.vertical_lines = {0.5};
    cfg.m_sub = 8;
    cfg.eps0 = "zero";
    cfg.t_end = 0.2;
    cfg.sample_count = 11;

    const trajectory t_out = simulate_scenario(scenario_kind::output_feedback, cfg);
    const trajectory t_state = simulate_scenario(scenario_kind::state_feedback, cfg);
    REQUIRE(t_out.completed);
    REQUIRE(t_state.completed);
    for (int s = 0; s < 11; ++s) {
        CHECK(t_out.norm_eps[std::size_t(s)] < 1e-9);
        CHECK_THAT(t_out.norm_p[std::size_t(s)],
                   WithinAbs(t_state.norm_p[std::size_t(s)], 1e-5));
    }
}

TEST_CASE("projected initial observer error matches the cell restriction") {
    run_config cfg;
    cfg.m_modes = 32;
    cfg.n_ctrl = 2;
    cfg.m = 5.0;
    cfg.f_kind = "zero";
    cfg.declared_l = 0.0;
    cfg.init_kind = "cos(x)";
    cfg.vertical_lines = {0.5};
    cfg.m_sub = 40;
    cfg.t_end = 0.01;
    cfg.sample_count = 3;
    const trajectory traj = simulate_scenario(scenario_kind::output_feedback, cfg);
    REQUIRE(traj.completed);
    // cell projections never exceed the full field norm (Bessel) and a
    // rich local basis recovers most of it
    CHECK(traj.norm_eps.front() <= traj.norm_p.front() * (1 + 1e-12));
    CHECK(traj.norm_eps.front() >= 0.8 * traj.norm_p.front());
}

TEST_CASE("decay fits recover exponential rates and flag underflow") {
    std::vector<double> t, good, tiny;
    for (int i = 0; i <= 40; ++i) {
        t.push_back(0.05 * i);
        good.push_back(2.0 * std::exp(-3.0 * 0.05 * i));
        tiny.push_back(1e-305 * std::exp(-40.0 * 0.05 * i)); // drops below 1e-300
    }
    const decay_estimate est = decay_fit(t, good, 0.0, 2.0);
    CHECK_FALSE(est.degenerate);
    CHECK_THAT(est.rate, WithinAbs(3.0, 1e-10));
    CHECK_THAT(est.amplitude, WithinRel(2.0, 1e-10));
    CHECK_THAT(est.r_squared, WithinAbs(1.0, 1e-12));

    const decay_estimate deg = decay_fit(t, tiny, 0.0, 2.0);
    CHECK(deg.degenerate);

    CHECK_THROWS_AS(decay_fit({0.0, 1.0}, {1.0, 0.5}, 0.0, 1.0), degenerate_fit);
}

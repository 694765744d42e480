#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specstab/config.hpp"
#include "specstab/controller.hpp"
#include "specstab/io.hpp"
#include "specstab/linalg.hpp"
#include "specstab/sensors.hpp"
#include "specstab/simulate.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

// End-to-end acceptance checks. Each criterion is self-contained, timed
// against its runtime budget, and reports one pass/fail line with the
// measured numbers; any exception is a failure with the message as detail.
struct criterion_result {
    int index = 0;
    std::string name;
    bool pass = false;
    double seconds = 0;
    std::string detail;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline run_config reference_scenario_config() {
    run_config cfg;
    cfg.domain = rectangle{};
    cfg.m_modes = 120;
    cfg.n_ctrl = 6;
    cfg.m = 120.0;
    cfg.f_kind = "a*sin(z)+b*z";
    cfg.f_a = 50.0;
    cfg.f_b = 50.0;
    cfg.declared_l = 100.0;
    cfg.init_kind = "cos(x)";
    cfg.vertical_lines = {0.5};
    cfg.m_sub = 40;
    cfg.rel_tol = 1e-6;
    cfg.abs_tol = 1e-9;
    cfg.t_end = 1.0;
    cfg.sample_count = 201;
    return cfg;
}

inline criterion_result spectral_exactness() {
    criterion_result r{1, "spectral exactness and eigenvalue lower bound", false, 0, ""};
    const rectangle dom;
    const spectral_basis basis = spectral_basis::enumerate(dom, 1000);

    struct entry {
        double lam;
        int jx, ky;
    };
    std::vector<entry> oracle;
    for (int j = 1; j <= 40; ++j)
        for (int k = 1; k <= 40; ++k) oracle.push_back({eigenvalue(dom, j, k), j, k});
    std::sort(oracle.begin(), oracle.end(), [](const entry& a, const entry& b) {
        return std::tie(a.lam, a.jx, a.ky) < std::tie(b.lam, b.jx, b.ky);
    });

    int mismatches = 0;
    for (int n = 1; n <= 1000; ++n) {
        const eigen_mode& md = basis.mode(n);
        const entry& e = oracle[std::size_t(n - 1)];
        if (md.lambda != e.lam || md.jx != e.jx || md.ky != e.ky) ++mismatches;
    }
    int bly_violations = 0;
    double worst_ratio = 0;
    for (int n = 1; n <= 1000; ++n) {
        const double bound = bly_lower_bound(n, 2, dom.area());
        if (!(bound <= basis.lambda(n))) ++bly_violations;
        worst_ratio = std::max(worst_ratio, bound / basis.lambda(n));
    }
    r.pass = mismatches == 0 && bly_violations == 0;
    r.detail = "mismatches=" + std::to_string(mismatches) +
               " bly_violations=" + std::to_string(bly_violations) +
               " max_bound_ratio=" + fmt(worst_ratio);
    return r;
}

inline criterion_result gain_identity() {
    criterion_result r{2, "gain identity residual over 20 designs", false, 0, ""};
    const rectangle dom;
    const int ns[] = {1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 18, 22, 26, 30, 34, 38, 42, 46, 48, 50};
    const double ms[] = {0.6, 1.7, 5.0, 12.0, 120.0};
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const int n = ns[i];
        const double m = ms[i % 5];
        const spectral_basis basis = spectral_basis::enumerate(dom, n + 1);
        const lifting_system sys = build_lifting(basis, n);
        const lift_matrices mats = assemble_lift_matrices(sys);
        Eigen::MatrixXd a_s = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j) a_s(j, j) = -basis.lambda(j + 1);
        double residual = 0;
        gain_matrix(a_s, mats.b, mats.c, m, 1e12, nullptr, &residual);
        worst = std::max(worst, residual);
    }
    r.pass = worst <= 1e-10;
    r.detail = "max_relative_residual=" + fmt(worst, "%.3e") + " (limit 1e-10)";
    return r;
}

inline criterion_result scaling_slopes() {
    criterion_result r{3, "scaling-law slopes over N in [5,200]", false, 0, ""};
    const rectangle dom;
    const std::vector<int> grid = log_spaced_grid(5, 200, 20);
    const std::vector<sweep_row> rows = scaling_sweep(dom, grid, 120.0);
    std::vector<double> n, k, zeta, pinv, bound;
    for (const sweep_row& row : rows) {
        if (!row.error.empty()) {
            r.detail = "sweep row N=" + std::to_string(row.n) + " failed: " + row.error;
            return r;
        }
        n.push_back(double(row.n));
        k.push_back(row.norm_k);
        zeta.push_back(row.zeta_term);
        pinv.push_back(row.ibk_pinv_norm);
        bound.push_back(row.ibk_norm_bound);
    }
    const double sk = fit_loglog_slope(n, k).slope;
    const double sz = fit_loglog_slope(n, zeta).slope;
    const double sb = fit_loglog_slope(n, bound).slope;
    const double sp = fit_loglog_slope(n, pinv).slope;
    const bool ok_k = std::abs(sk - (-1.50)) <= 0.15;
    const bool ok_z = std::abs(sz - 2.50) <= 0.20;
    const bool ok_b = std::abs(sb - 0.73) <= 0.20;
    r.pass = ok_k && ok_z && ok_b;
    r.detail = "gain_slope=" + fmt(sk) + " (want -1.50+-0.15) zeta_slope=" + fmt(sz) +
               " (want 2.50+-0.20) inverse_bound_slope=" + fmt(sb) +
               " (want 0.73+-0.20; pseudoinverse-norm slope " + fmt(sp) + " reported alongside)";
    return r;
}

inline criterion_result linear_decay_envelope() {
    criterion_result r{4, "certified linear decay envelope", false, 0, ""};
    const rectangle dom;
    const find_min_result found = find_min_n(dom, [](int) { return 0.6; }, 64);
    run_config cfg;
    cfg.m_modes = 24;
    cfg.n_ctrl = found.n;
    cfg.m = found.design.m;
    cfg.f_kind = "zero";
    cfg.declared_l = 0.0;
    cfg.init_kind = "cos(x)";
    cfg.t_end = 5.0;
    cfg.sample_count = 101;
    const trajectory traj = simulate_scenario(scenario_kind::state_feedback, cfg);
    if (!traj.completed) {
        r.detail = "integration failed: " + traj.failure;
        return r;
    }
    int violations = 0;
    const double p0_sq = traj.norm_p[0] * traj.norm_p[0];
    for (int s = 0; s < traj.sample_count(); ++s) {
        const double bound = std::exp(-(2 * cfg.m - 1) * traj.times[std::size_t(s)]) * p0_sq;
        const double val = traj.norm_p[std::size_t(s)] * traj.norm_p[std::size_t(s)];
        if (val > bound * (1 + 1e-9)) ++violations;
    }
    r.pass = found.design.certified && violations == 0;
    r.detail = "min_certified_N=" + std::to_string(found.n) +
               " margin=" + fmt(found.design.margin) +
               " envelope_violations=" + std::to_string(violations) + "/" +
               std::to_string(traj.sample_count());
    return r;
}

inline criterion_result reference_scenario() {
    criterion_result r{5, "reference scenario: open-loop growth, closed-loop decay", false, 0, ""};
    run_config cfg = reference_scenario_config();

    run_config open_cfg = cfg;
    open_cfg.t_end = 0.25;
    open_cfg.sample_count = 101;
    const trajectory open_traj = simulate_scenario(scenario_kind::open_loop, open_cfg);
    bool ok_open = false;
    double growth = 0;
    if (open_traj.completed) {
        const decay_estimate fit = decay_fit(open_traj.times, open_traj.norm_z, 0.0, 0.25);
        growth = -fit.rate;
        ok_open = growth > 0;
    }

    const trajectory out_traj = simulate_scenario(scenario_kind::output_feedback, cfg);
    bool ok_ratio = false, ok_eps = false;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double eps_rate = std::numeric_limits<double>::quiet_NaN();
    if (out_traj.completed) {
        ratio = out_traj.norm_z.back() / out_traj.norm_z.front();
        ok_ratio = ratio <= 1e-3;
        const decay_estimate efit = decay_fit(out_traj.times, out_traj.norm_eps, 0.0, cfg.t_end);
        eps_rate = efit.rate;
        ok_eps = efit.rate > 0;
    }
    r.pass = ok_open && ok_ratio && ok_eps;
    r.detail = "open_growth_rate=" + fmt(growth) + " (want >0) z_ratio_at_T=" + fmt(ratio, "%.3e") +
               " (want <=1e-3) eps_decay_rate=" + fmt(eps_rate) + " (want >0)";
    return r;
}

inline criterion_result guaranteed_observer_envelope() {
    criterion_result r{6, "guaranteed observer error envelope", false, 0, ""};
    run_config cfg = reference_scenario_config();
    cfg.vertical_lines = {0.25, 0.5, 0.75};
    cfg.t_end = 0.25;
    cfg.sample_count = 101;
    const trajectory traj = simulate_scenario(scenario_kind::output_feedback, cfg);
    if (!traj.completed) {
        r.detail = "integration failed: " + traj.failure;
        return r;
    }
    const double rate = 17.0 * pi * pi - 100.0;
    const double eps0 = traj.norm_eps[0];
    int violations = 0;
    for (int s = 0; s < traj.sample_count(); ++s) {
        const double bound = eps0 * std::exp(-rate * traj.times[std::size_t(s)]) + 1e-8 * eps0;
        if (traj.norm_eps[std::size_t(s)] > bound) ++violations;
    }
    r.pass = traj.partition_satisfied && violations == 0;
    r.detail = "envelope_rate=" + fmt(rate) + " violations=" + std::to_string(violations) + "/" +
               std::to_string(traj.sample_count()) + " terminal_eps_over_eps0=" +
               fmt(traj.norm_eps.back() / eps0, "%.3e");
    return r;
}

inline criterion_result sensor_minimality() {
    criterion_result r{7, "minimal sensor lines and equidistant dominance", false, 0, ""};
    const rectangle dom;
    const double lipschitz = 100.0;
    const minimal_lines_result got = minimal_sensor_lines(lipschitz, dom);

    // independent exhaustive check over every split with M <= 4
    int brute_min = -1;
    for (int m = 0; m <= 4 && brute_min < 0; ++m)
        for (int m1 = 0; m1 <= m; ++m1) {
            const double rhs = pi * pi * ((m1 + 1.0) * (m1 + 1.0) + (m - m1 + 1.0) * (m - m1 + 1.0));
            if (rhs > lipschitz) {
                brute_min = m;
                break;
            }
        }
    const bool ok_min = got.m_total == 3 && brute_min == 3;
    const bool ok_corner = (got.m1 == 3 && got.m2 == 0);

    const sensor_partition equi = equidistant_partition(3, 0, dom);
    std::mt19937_64 rng(12345);
    int dominated = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const sensor_partition rnd = random_partition(3, 0, dom, rng);
        if (rnd.min_first_eigenvalue <= equi.min_first_eigenvalue * (1 + 1e-12)) ++dominated;
    }
    r.pass = ok_min && ok_corner && dominated == 1000;
    r.detail = "minimal_M=" + std::to_string(got.m_total) + " split=(" + std::to_string(got.m1) +
               "," + std::to_string(got.m2) + ") margin=" +
               fmt(got.partition.min_first_eigenvalue - lipschitz) + " dominance=" +
               std::to_string(dominated) + "/1000";
    return r;
}

inline criterion_result consistency_and_truncation() {
    criterion_result r{8, "observer consistency and truncation stability", false, 0, ""};
    // (a) zero initial error and zero nonlinearity: output feedback must
    //     reproduce state feedback within 10x the integrator tolerance
    run_config small;
    small.m_modes = 24;
    small.n_ctrl = 6;
    small.m = 120.0;
    small.f_kind = "zero";
    small.declared_l = 0.0;
    small.init_kind = "cos(x)";
    small.vertical_lines = {0.5};
    small.m_sub = 16;
    small.eps0 = "zero";
    small.t_end = 0.5;
    small.sample_count = 51;
    const trajectory t_state = simulate_scenario(scenario_kind::state_feedback, small);
    const trajectory t_output = simulate_scenario(scenario_kind::output_feedback, small);
    if (!t_state.completed || !t_output.completed) {
        r.detail = "integration failed in the consistency pair";
        return r;
    }
    double max_diff = 0;
    for (int s = 0; s < t_state.sample_count(); ++s)
        max_diff = std::max(max_diff, (t_state.states.row(s).head(small.m_modes) -
                                       t_output.states.row(s).head(small.m_modes))
                                          .cwiseAbs()
                                          .maxCoeff());
    const double tol = 10.0 * (small.rel_tol * t_state.norm_p[0] + small.abs_tol);
    const bool ok_consistency = max_diff <= tol;

    // (b) doubling the global or the subdomain truncation must not move the
    //     reference-scenario terminal norms by more than 1%
    run_config base = reference_scenario_config();
    const trajectory t_base = simulate_scenario(scenario_kind::output_feedback, base);
    run_config dm = base;
    dm.m_modes = 240;
    const trajectory t_dm = simulate_scenario(scenario_kind::output_feedback, dm);
    run_config ds = base;
    ds.m_sub = 80;
    const trajectory t_ds = simulate_scenario(scenario_kind::output_feedback, ds);
    if (!t_base.completed || !t_dm.completed || !t_ds.completed) {
        r.detail = "integration failed in the truncation study";
        return r;
    }
    const double dz_m = std::abs(t_dm.norm_z.back() - t_base.norm_z.back()) / t_base.norm_z.back();
    const double dz_s = std::abs(t_ds.norm_z.back() - t_base.norm_z.back()) / t_base.norm_z.back();
    const double de_m =
        std::abs(t_dm.norm_eps.back() - t_base.norm_eps.back()) / t_base.norm_eps.back();
    const double de_s =
        std::abs(t_ds.norm_eps.back() - t_base.norm_eps.back()) / t_base.norm_eps.back();
    const bool ok_trunc = dz_m < 0.01 && dz_s < 0.01 && de_m < 0.01 && de_s < 0.01;

    r.pass = ok_consistency && ok_trunc;
    r.detail = "state_vs_output_max_diff=" + fmt(max_diff, "%.3e") + " (tol " + fmt(tol, "%.3e") +
               ") terminal_shift_modes=" + fmt(dz_m, "%.3e") + "/" + fmt(de_m, "%.3e") +
               " terminal_shift_sub=" + fmt(dz_s, "%.3e") + "/" + fmt(de_s, "%.3e") +
               " (all want <1e-2)";
    return r;
}

} // namespace detail

inline std::vector<criterion_result> run_acceptance(std::ostream& out) {
    using clock = std::chrono::steady_clock;
    const double budgets[8] = {5, 30, 600, 60, 300, 120, 10, 600};
    std::vector<criterion_result (*)()> checks = {
        detail::spectral_exactness,   detail::gain_identity,
        detail::scaling_slopes,       detail::linear_decay_envelope,
        detail::reference_scenario,       detail::guaranteed_observer_envelope,
        detail::sensor_minimality,    detail::consistency_and_truncation};
    std::vector<criterion_result> results;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        criterion_result r;
        const auto start = clock::now();
        try {
            r = checks[i]();
        } catch (const std::exception& e) {
            r.index = int(i) + 1;
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(clock::now() - start).count();
        if (r.seconds > budgets[i]) {
            r.pass = false;
            r.detail += " [over runtime budget " + detail::fmt(budgets[i], "%.0f") + "s]";
        }
        out << "criterion " << r.index << " [" << (r.pass ? "PASS" : "FAIL") << "] ("
            << detail::fmt(r.seconds, "%.2f") << "s) " << r.name << ": " << r.detail << '\n';
        results.push_back(std::move(r));
    }
    int passed = 0;
    for (const auto& r : results) passed += r.pass ? 1 : 0;
    out << passed << "/" << results.size() << " acceptance criteria passed\n";
    return results;
}

} // namespace specstab

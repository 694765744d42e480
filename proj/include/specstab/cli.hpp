#pragma once

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "specstab/acceptance.hpp"
#include "specstab/config.hpp"
#include "specstab/controller.hpp"
#include "specstab/io.hpp"
#include "specstab/sensors.hpp"
#include "specstab/simulate.hpp"

namespace specstab {
namespace cli_detail {

inline std::string join(const std::string& dir, const std::string& name) {
    return dir.empty() ? name : dir + "/" + name;
}

inline std::string yesno(bool b) { return b ? "true" : "false"; }

inline std::pair<int, int> parse_sweep_range(const std::string& s) {
    const std::size_t pos = s.find(':');
    if (pos == std::string::npos) throw config_error("--sweep expects the form A:B");
    const long long a = detail::parse_int(s.substr(0, pos), "--sweep");
    const long long b = detail::parse_int(s.substr(pos + 1), "--sweep");
    if (a < 1 || b <= a) throw config_error("--sweep needs 1 <= A < B");
    return {int(a), int(b)};
}

inline int cmd_spectrum(const run_config& cfg) {
    const spectral_basis basis = spectral_basis::enumerate(cfg.domain, cfg.m_modes);
    ensure_directory(cfg.out_dir);
    const std::string path = join(cfg.out_dir, "spectrum.csv");
    write_csv(path, spectrum_csv(basis));
    std::cout << "wrote " << path << " (" << basis.count() << " modes)\n";
    std::cout << "lambda_1 = " << format_g17(basis.lambda(1)) << ", lambda_" << basis.count()
              << " = " << format_g17(basis.lambda(basis.count())) << ", weyl ratio at top "
              << format_g17(weyl_ratio(basis, basis.count())) << '\n';
    return 0;
}

inline int cmd_design(const run_config& cfg, const std::string& sweep, bool allow_uncertified) {
    design_options opts;
    opts.tail_count = cfg.tail_count;
    ensure_directory(cfg.out_dir);

    if (!sweep.empty()) {
        const auto [lo, hi] = parse_sweep_range(sweep);
        const std::vector<int> grid = log_spaced_grid(lo, hi, 20);
        const std::vector<sweep_row> rows = scaling_sweep(cfg.domain, grid, cfg.m, opts);
        const std::string path = join(cfg.out_dir, "sweep.csv");
        write_csv(path, sweep_csv(rows));
        std::cout << "wrote " << path << '\n';

        std::vector<double> ns, ks, zs, ps, bs;
        int failures = 0;
        for (const sweep_row& row : rows) {
            if (!row.error.empty()) {
                ++failures;
                std::cout << "N=" << row.n << " failed: " << row.error << '\n';
                continue;
            }
            ns.push_back(double(row.n));
            ks.push_back(row.norm_k);
            zs.push_back(row.zeta_term);
            ps.push_back(row.ibk_pinv_norm);
            bs.push_back(row.ibk_norm_bound);
        }
        if (ns.size() >= 5) {
            const line_fit fk = fit_loglog_slope(ns, ks);
            const line_fit fz = fit_loglog_slope(ns, zs);
            const line_fit fp = fit_loglog_slope(ns, ps);
            const line_fit fb = fit_loglog_slope(ns, bs);
            auto show = [](const char* what, const line_fit& f) {
                std::printf("%s slope = %.4f +- %.4f (r^2 = %.4f)\n", what, f.slope,
                            f.stderr_slope, f.r_squared);
            };
            show("gain norm", fk);
            show("spillover term", fz);
            show("closed-loop pseudoinverse norm", fp);
            show("closed-loop inverse bound", fb);
        } else {
            std::cout << "too few successful rows for slope fits\n";
        }
        return failures == 0 ? 0 : 1;
    }

    const controller_design d = design_controller(cfg.domain, cfg.n_ctrl, cfg.m, opts);
    std::vector<std::pair<std::string, std::string>> entries = {
        {"n", std::to_string(d.n)},
        {"m", format_g17(d.m)},
        {"lambda_np1", format_g17(d.lambda(d.n))},
        {"norm_k", format_g17(d.norm_k)},
        {"margin", format_g17(d.margin)},
        {"certified", yesno(d.certified)},
        {"cond_mbc", format_g17(d.cond_mbc)},
        {"gain_residual", format_g17(d.gain_residual)},
        {"tail_estimate", format_g17(d.tail_estimate)},
        {"weighted_zeta_sum", format_g17(d.weighted_zeta_sum)},
        {"free_zeta_sum", format_g17(d.free_zeta_sum)},
        {"ibk_pinv_norm", format_g17(d.ibk_pinv_norm)},
        {"ibk_pinv_rank", std::to_string(d.ibk_pinv_rank)},
        {"ibk_norm_bound", format_g17(d.ibk_norm_bound)},
        {"est_inverse_rel_err", format_g17(d.est_inverse_rel_err)},
    };
    for (int i = 0; i < d.n; ++i) {
        std::string row;
        for (int j = 0; j < d.n; ++j) row += (j ? " " : "") + format_g17(d.gain(i, j));
        entries.emplace_back("k_row_" + std::to_string(i + 1), row);
    }
    const std::string path = join(cfg.out_dir, "design.txt");
    write_summary(path, entries);

    for (const auto& [k, v] : entries)
        if (d.n <= 12 || k.rfind("k_row_", 0) != 0) std::cout << k << " = " << v << '\n';
    if (d.n > 12) std::cout << "gain matrix written to " << path << '\n';
    if (!d.certified) {
        std::cout << "design is NOT certified (margin " << format_g17(d.margin) << ")\n";
        return allow_uncertified ? 0 : 1;
    }
    return 0;
}

inline int cmd_sensors(const run_config& cfg) {
    if (!(cfg.declared_l > 0))
        throw config_error("the sensors command needs nonlinearity.declared_l > 0");
    ensure_directory(cfg.out_dir);
    std::vector<std::pair<std::string, std::string>> entries;
    for (int d = 1; d <= 3; ++d)
        entries.emplace_back("volume_threshold_d" + std::to_string(d),
                             format_g17(volume_threshold(d, cfg.declared_l)));
    const minimal_lines_result min = minimal_sensor_lines(cfg.declared_l, cfg.domain);
    entries.emplace_back("minimal_lines", std::to_string(min.m_total));
    entries.emplace_back("minimal_split",
                         std::to_string(min.m1) + "," + std::to_string(min.m2));
    entries.emplace_back("minimal_rhs", format_g17(min.rhs));
    entries.emplace_back("minimal_margin", format_g17(min.rhs - cfg.declared_l));

    if (!cfg.vertical_lines.empty() || !cfg.horizontal_lines.empty()) {
        const sensor_partition part =
            make_partition(cfg.domain, cfg.vertical_lines, cfg.horizontal_lines);
        const partition_check chk = check_partition(part, cfg.declared_l);
        entries.emplace_back("config_cells", std::to_string(part.subdomains.size()));
        entries.emplace_back("config_min_eigenvalue", format_g17(part.min_first_eigenvalue));
        entries.emplace_back("config_satisfied", yesno(chk.satisfied));
        entries.emplace_back("config_margin", format_g17(chk.margin));
        entries.emplace_back("config_envelope_rate", format_g17(chk.envelope_rate));
    }
    const std::string path = join(cfg.out_dir, "sensors.txt");
    write_summary(path, entries);
    for (const auto& [k, v] : entries) std::cout << k << " = " << v << '\n';
    return 0;
}

inline int cmd_simulate(const run_config& cfg, const std::string& kind_str) {
    const scenario_kind kind = parse_kind(kind_str);
    const trajectory traj = simulate_scenario(kind, cfg);
    ensure_directory(cfg.out_dir);

    const std::string tag = kind_name(kind);
    const std::string csv_path = join(cfg.out_dir, "trajectory_" + tag + ".csv");
    write_csv(csv_path, trajectory_csv(traj));
    if (cfg.dump_state) write_state_dump(join(cfg.out_dir, "state_" + tag + ".bin"), traj);

    for (const std::string& w : traj.warnings) std::cout << "warning: " << w << '\n';

    std::vector<std::pair<std::string, std::string>> entries = {
        {"kind", tag},
        {"config_hash", traj.config_hash},
        {"completed", yesno(traj.completed)},
        {"t_end", format_g17(cfg.t_end)},
        {"t_reached", format_g17(traj.t_reached)},
        {"samples", std::to_string(traj.sample_count())},
        {"n_steps", std::to_string(traj.n_steps)},
        {"n_rejected", std::to_string(traj.n_rejected)},
        {"n_rhs", std::to_string(traj.n_rhs)},
    };
    if (!traj.completed) entries.emplace_back("failure", traj.failure);
    if (traj.sample_count() > 0) {
        entries.emplace_back("norm_p_initial", format_g17(traj.norm_p.front()));
        entries.emplace_back("norm_p_final", format_g17(traj.norm_p.back()));
        entries.emplace_back("norm_z_initial", format_g17(traj.norm_z.front()));
        entries.emplace_back("norm_z_final", format_g17(traj.norm_z.back()));
        entries.emplace_back("norm_eps_initial", format_g17(traj.norm_eps.front()));
        entries.emplace_back("norm_eps_final", format_g17(traj.norm_eps.back()));
        if (traj.norm_z.front() > 0)
            entries.emplace_back("ratio_z", format_g17(traj.norm_z.back() / traj.norm_z.front()));
    }
    auto fit_entry = [&](const char* key, const std::vector<double>& col) {
        try {
            const decay_estimate est = decay_fit(traj.times, col, 0.0, traj.t_reached);
            entries.emplace_back(key, est.degenerate ? std::string("degenerate")
                                                     : format_g17(est.rate));
        } catch (const degenerate_fit&) {
            entries.emplace_back(key, "n/a");
        }
    };
    fit_entry("fitted_decay_rate_z", traj.norm_z);
    fit_entry("fitted_decay_rate_p", traj.norm_p);
    if (kind == scenario_kind::output_feedback) fit_entry("fitted_decay_rate_eps", traj.norm_eps);

    if (traj.has_design) {
        entries.emplace_back("certified", yesno(traj.certified));
        entries.emplace_back("design_margin", format_g17(traj.design_margin));
    }
    if (traj.has_partition) {
        entries.emplace_back("partition_satisfied", yesno(traj.partition_satisfied));
        entries.emplace_back("envelope_rate", format_g17(traj.envelope_rate));
    }

    // count envelope breaches only where there is a certificate to check
    if (kind == scenario_kind::state_feedback && traj.has_design && traj.certified &&
        traj.sample_count() > 0) {
        const double p0_sq = traj.norm_p.front() * traj.norm_p.front();
        int violations = 0;
        for (int s = 0; s < traj.sample_count(); ++s) {
            const double bound =
                p0_sq * std::exp(-(2 * cfg.m - 1) * traj.times[std::size_t(s)]);
            if (traj.norm_p[std::size_t(s)] * traj.norm_p[std::size_t(s)] > bound * (1 + 1e-9))
                ++violations;
        }
        entries.emplace_back("envelope_violations", std::to_string(violations));
    }
    if (kind == scenario_kind::output_feedback && traj.has_partition &&
        traj.partition_satisfied && traj.sample_count() > 0) {
        const double eps0 = traj.norm_eps.front();
        int violations = 0;
        for (int s = 0; s < traj.sample_count(); ++s) {
            const double bound =
                eps0 * std::exp(-traj.envelope_rate * traj.times[std::size_t(s)]) + 1e-8 * eps0;
            if (traj.norm_eps[std::size_t(s)] > bound) ++violations;
        }
        entries.emplace_back("envelope_violations", std::to_string(violations));
    }
    for (std::size_t i = 0; i < traj.warnings.size(); ++i)
        entries.emplace_back("warning_" + std::to_string(i + 1), traj.warnings[i]);

    const std::string summary_path = join(cfg.out_dir, "summary_" + tag + ".txt");
    write_summary(summary_path, entries);
    for (const auto& [k, v] : entries) std::cout << k << " = " << v << '\n';
    std::cout << "wrote " << csv_path << " and " << summary_path << '\n';
    return traj.completed ? 0 : 1;
}

inline int cmd_verify() {
    const std::vector<criterion_result> results = run_acceptance(std::cout);
    for (const criterion_result& r : results)
        if (!r.pass) return 1;
    return 0;
}

} // namespace cli_detail

inline int cli_main(int argc, char** argv) {
    CLI::App app{"boundary output-feedback stabilization of semilinear heat equations"};
    app.require_subcommand(1);

    std::string config_path, out_override, sweep_arg, kind_str;
    bool allow_uncertified = false;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "INI configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_override, "output directory (overrides [output] out_dir)");
        sub->add_option("--seed", seed_override, "seed override (overrides [meta] seed)");
    };

    CLI::App* sp = app.add_subcommand("spectrum", "enumerate Dirichlet modes and bounds");
    add_common(sp);
    CLI::App* dg = app.add_subcommand("design", "design and certify a boundary controller");
    add_common(dg);
    dg->add_option("--sweep", sweep_arg, "sweep mode counts A:B instead of a single design");
    dg->add_flag("--allow-uncertified", allow_uncertified,
                 "exit 0 even when the decay certificate fails");
    CLI::App* sn = app.add_subcommand("sensors", "check sensor partitions for the observer");
    add_common(sn);
    CLI::App* sim = app.add_subcommand("simulate", "integrate a closed- or open-loop scenario");
    add_common(sim);
    sim->add_option("--kind", kind_str, "scenario: open, state, or output")->required();
    app.add_subcommand("verify", "run the acceptance checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("verify")) return cli_detail::cmd_verify();
        run_config cfg = load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);
        cfg.validate();
        if (app.got_subcommand("spectrum")) return cli_detail::cmd_spectrum(cfg);
        if (app.got_subcommand("design"))
            return cli_detail::cmd_design(cfg, sweep_arg, allow_uncertified);
        if (app.got_subcommand("sensors")) return cli_detail::cmd_sensors(cfg);
        if (app.got_subcommand("simulate")) return cli_detail::cmd_simulate(cfg, kind_str);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace specstab

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "specstab/config.hpp"
#include "specstab/controller.hpp"
#include "specstab/errors.hpp"
#include "specstab/grid.hpp"
#include "specstab/integrate.hpp"
#include "specstab/lifting.hpp"
#include "specstab/linalg.hpp"
#include "specstab/nonlinearity.hpp"
#include "specstab/sensors.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

enum class scenario_kind { open_loop, state_feedback, output_feedback };

inline const char* kind_name(scenario_kind k) {
    switch (k) {
        case scenario_kind::open_loop: return "open";
        case scenario_kind::state_feedback: return "state";
        case scenario_kind::output_feedback: return "output";
    }
    return "?";
}

inline scenario_kind parse_kind(const std::string& s) {
    if (s == "open") return scenario_kind::open_loop;
    if (s == "state") return scenario_kind::state_feedback;
    if (s == "output") return scenario_kind::output_feedback;
    throw config_error("kind must be one of: open, state, output");
}

struct trajectory {
    scenario_kind kind = scenario_kind::open_loop;
    int n_ctrl = 0;
    int m_modes = 0;
    int state_dim = 0;
    std::vector<double> times;
    std::vector<double> norm_p;
    std::vector<double> norm_eps;
    std::vector<double> norm_z;
    Eigen::MatrixXd u;      // one row per sample
    Eigen::MatrixXd states; // full integrator state per sample
    bool completed = false;
    std::string failure;
    double t_reached = 0;
    long n_steps = 0;
    long n_rejected = 0;
    long n_rhs = 0;
    std::string config_hash;
    warning_list warnings;
    // design/partition context for summaries and envelope checks
    bool has_design = false;
    bool certified = false;
    double design_margin = 0;
    bool has_partition = false;
    bool partition_satisfied = false;
    double envelope_rate = 0; // min subdomain ground eigenvalue minus L

    int sample_count() const { return int(times.size()); }
};

// Modal coefficients of the initial field. cos(x) deliberately violates the
// Dirichlet boundary; it is projected in L2 onto the basis as-is.
inline Eigen::VectorXd initial_coefficients(const run_config& cfg, const spectral_basis& basis) {
    const int m = basis.count();
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(m);
    if (cfg.init_kind == "zero") return p0;
    if (cfg.init_kind == "mode") {
        for (int n = 1; n <= m; ++n) {
            const eigen_mode& md = basis.mode(n);
            if (md.jx == cfg.init_jx && md.ky == cfg.init_ky) {
                p0(n - 1) = cfg.init_amplitude;
                return p0;
            }
        }
        throw config_error("initial mode (" + std::to_string(cfg.init_jx) + "," +
                           std::to_string(cfg.init_ky) + ") is not among the first " +
                           std::to_string(m) + " modes");
    }
    // cos(x): closed-form sine-series coefficients on (0,w) x (0,h)
    const double w = basis.domain().width, h = basis.domain().height;
    const double scale = 2.0 / std::sqrt(w * h);
    for (int n = 1; n <= m; ++n) {
        const eigen_mode& md = basis.mode(n);
        const double beta = md.jx * pi / w;
        const double sgn_j = (md.jx % 2 == 0) ? 1.0 : -1.0;
        double ix;
        if (std::abs(beta - 1.0) < 1e-12)
            ix = 0.5 * std::sin(w) * std::sin(w);
        else
            ix = beta * (1.0 - sgn_j * std::cos(w)) / (beta * beta - 1.0);
        const double iy = (md.ky % 2 == 0) ? 0.0 : 2.0 * h / (md.ky * pi);
        p0(n - 1) = cfg.init_amplitude * scale * ix * iy;
    }
    return p0;
}

namespace detail {

// Per-subdomain observer-error block: local sine basis, quadrature grid,
// samples of the global modes on the local grid, and the cross Gram matrix
// between global and local bases.
struct observer_block {
    rectangle cell;
    double x0 = 0, y0 = 0;
    spectral_basis basis;
    Eigen::VectorXd lambda;
    std::unique_ptr<sine_grid> grid;
    std::unique_ptr<mode_evaluator> global_eval;
    Eigen::MatrixXd cross; // m_modes x m_sub, <phi_global, psi_local>
};

inline std::vector<observer_block> build_observer_blocks(const spectral_basis& global_basis,
                                                         const sensor_partition& part,
                                                         const run_config& cfg,
                                                         warning_list* warnings) {
    const rectangle& dom = global_basis.domain();
    std::vector<observer_block> blocks;
    std::vector<double> xs(part.vertical_lines);
    xs.insert(xs.begin(), 0.0);
    xs.push_back(dom.width);
    std::vector<double> ys(part.horizontal_lines);
    ys.insert(ys.begin(), 0.0);
    ys.push_back(dom.height);

    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            observer_block blk;
            blk.x0 = xs[i];
            blk.y0 = ys[j];
            blk.cell.width = xs[i + 1] - xs[i];
            blk.cell.height = ys[j + 1] - ys[j];
            blk.basis = spectral_basis::enumerate(blk.cell, cfg.m_sub);
            blk.lambda.resize(cfg.m_sub);
            for (int l = 0; l < cfg.m_sub; ++l) blk.lambda(l) = blk.basis.lambda(l + 1);
            blk.grid = std::make_unique<sine_grid>(blk.basis, cfg.oversample, cfg.floor_points,
                                                   warnings);
            std::vector<double> gx(blk.grid->x()), gy(blk.grid->y());
            for (double& v : gx) v += blk.x0;
            for (double& v : gy) v += blk.y0;
            blk.global_eval = std::make_unique<mode_evaluator>(global_basis, gx, gy);

            const double norm_fac = 4.0 / std::sqrt(dom.area() * blk.cell.area());
            blk.cross.resize(global_basis.count(), cfg.m_sub);
            for (int n = 0; n < global_basis.count(); ++n) {
                const eigen_mode& gm = global_basis.mode(n + 1);
                for (int l = 0; l < cfg.m_sub; ++l) {
                    const eigen_mode& lm = blk.basis.mode(l + 1);
                    const double cgx = cross_gram_1d(gm.jx, dom.width, blk.x0,
                                                     blk.x0 + blk.cell.width, lm.jx);
                    const double cgy = cross_gram_1d(gm.ky, dom.height, blk.y0,
                                                     blk.y0 + blk.cell.height, lm.ky);
                    blk.cross(n, l) = norm_fac * cgx * cgy;
                }
            }
            blocks.push_back(std::move(blk));
        }
    }
    return blocks;
}

} // namespace detail

inline trajectory simulate_scenario(scenario_kind kind, const run_config& cfg) {
    cfg.validate();
    trajectory traj;
    traj.kind = kind;
    traj.n_ctrl = cfg.n_ctrl;
    traj.m_modes = cfg.m_modes;
    traj.config_hash = config_hash(cfg);

    const nonlinearity f = make_nonlinearity(cfg.f_kind, cfg.f_a, cfg.f_b);
    audit_nonlinearity(f, cfg.declared_l);

    const spectral_basis basis = spectral_basis::enumerate(cfg.domain, cfg.m_modes);
    const sine_grid grid(basis, cfg.oversample, cfg.floor_points, &traj.warnings);
    const int m = cfg.m_modes;
    const int n = cfg.n_ctrl;
    Eigen::VectorXd lambda_all(m);
    for (int i = 0; i < m; ++i) lambda_all(i) = basis.lambda(i + 1);
    const Eigen::VectorXd p0 = initial_coefficients(cfg, basis);

    // full-field projection of f; zero nonlinearity short-circuits
    auto project_f = [&](const Eigen::VectorXd& zc) -> Eigen::VectorXd {
        if (f.is_zero()) return Eigen::VectorXd::Zero(m);
        return grid.project(f.apply(grid.eval(zc).array()).matrix());
    };

    std::vector<double> sample_times(std::size_t(cfg.sample_count));
    for (int s = 0; s < cfg.sample_count; ++s)
        sample_times[std::size_t(s)] = cfg.t_end * s / (cfg.sample_count - 1);

    integrate_options iopts;
    iopts.rel_tol = cfg.rel_tol;
    iopts.abs_tol = cfg.abs_tol;

    integration_result ires;
    Eigen::MatrixXd gain, epinv, lift_full; // lift_full = [B; Btil], m x n
    std::vector<detail::observer_block> blocks;
    Eigen::MatrixXd cross_top; // n x (Q * m_sub), stacked top rows of the cross Grams

    if (kind == scenario_kind::open_loop) {
        Eigen::VectorXd d = -lambda_all;
        auto rhs = [&](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
            return (-lambda_all.array() * y.array()).matrix() + project_f(y);
        };
        ires = integrate_etdrk2(d, rhs, p0, sample_times, iopts);
    } else {
        const lifting_system lift = build_lifting(basis, n);
        const lift_matrices mats = assemble_lift_matrices(lift);
        lift_full.resize(m, n);
        lift_full.topRows(n) = mats.b;
        lift_full.bottomRows(m - n) = mats.btil;

        design_options dopts;
        dopts.tail_count = cfg.tail_count;
        const controller_design design = design_controller(cfg.domain, n, cfg.m, dopts);
        traj.has_design = true;
        traj.certified = design.certified;
        traj.design_margin = design.margin;
        if (!design.certified)
            traj.warnings.push_back("UncertifiedDesign: stability margin " +
                                    std::to_string(design.margin) +
                                    " is not positive; no decay guarantee applies");
        gain = design.gain;
        epinv = pseudo_inverse(Eigen::MatrixXd::Identity(n, n) + mats.b * gain).pinv;
        const Eigen::VectorXd lambda_tail = lambda_all.tail(m - n);

        if (kind == scenario_kind::state_feedback) {
            Eigen::VectorXd d(m);
            d.head(n).setConstant(-cfg.m);
            d.tail(m - n) = -lambda_tail;
            auto rhs = [&](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
                const Eigen::VectorXd u = gain * y.head(n);
                const Eigen::VectorXd fmod = project_f(y + lift_full * u);
                Eigen::VectorXd dy(m);
                dy.head(n) = -cfg.m * y.head(n) + epinv * fmod.head(n);
                const Eigen::VectorXd du = gain * dy.head(n);
                dy.tail(m - n) = (-lambda_tail.array() * y.tail(m - n).array()).matrix() +
                                 fmod.tail(m - n) + mats.ctil * u - mats.btil * du;
                return dy;
            };
            ires = integrate_etdrk2(d, rhs, p0, sample_times, iopts);
        } else {
            const sensor_partition part =
                make_partition(cfg.domain, cfg.vertical_lines, cfg.horizontal_lines);
            const partition_check chk = check_partition(part, cfg.declared_l);
            traj.has_partition = true;
            traj.partition_satisfied = chk.satisfied;
            traj.envelope_rate = chk.envelope_rate;
            if (!chk.satisfied)
                traj.warnings.push_back(
                    "PartitionUnsatisfied: decay margin " + std::to_string(chk.margin) +
                    " is not positive; observer decay is not guaranteed");
            blocks = detail::build_observer_blocks(basis, part, cfg, &traj.warnings);
            const int q_count = int(blocks.size());
            const int msub = cfg.m_sub;
            cross_top.resize(n, q_count * msub);
            for (int q = 0; q < q_count; ++q)
                cross_top.middleCols(q * msub, msub) = blocks[std::size_t(q)].cross.topRows(n);

            const int dim = m + q_count * msub;
            Eigen::VectorXd d(dim);
            d.head(n).setConstant(-cfg.m);
            d.segment(n, m - n) = -lambda_tail;
            for (int q = 0; q < q_count; ++q)
                d.segment(m + q * msub, msub) = -blocks[std::size_t(q)].lambda;

            Eigen::VectorXd y0(dim);
            y0.head(m) = p0;
            if (cfg.eps0 == "zero") {
                y0.tail(q_count * msub).setZero();
            } else {
                for (int q = 0; q < q_count; ++q)
                    y0.segment(m + q * msub, msub) =
                        blocks[std::size_t(q)].cross.transpose() * p0;
            }

            auto rhs = [&, q_count, msub, dim](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
                const auto p = y.head(m);
                const Eigen::VectorXd eps_s = cross_top * y.tail(q_count * msub);
                const Eigen::VectorXd u = gain * (p.head(n) - eps_s);
                const Eigen::VectorXd zc = p + lift_full * u;
                const Eigen::VectorXd fmod = project_f(zc);

                Eigen::VectorXd dy(dim);
                Eigen::VectorXd deps_s = Eigen::VectorXd::Zero(n);
                for (int q = 0; q < q_count; ++q) {
                    const detail::observer_block& blk = blocks[std::size_t(q)];
                    const auto eps_q = y.segment(m + q * msub, msub);
                    Eigen::VectorXd deps_q = (-blk.lambda.array() * eps_q.array()).matrix();
                    if (!f.is_zero()) {
                        const Eigen::ArrayXXd z_loc = blk.global_eval->eval(zc).array();
                        const Eigen::ArrayXXd e_loc = blk.grid->eval(eps_q).array();
                        const Eigen::MatrixXd df = (f.apply(z_loc) - f.apply(z_loc - e_loc)).matrix();
                        deps_q += blk.grid->project(df);
                    }
                    dy.segment(m + q * msub, msub) = deps_q;
                    deps_s += blk.cross.topRows(n) * deps_q;
                }
                dy.head(n) = -cfg.m * p.head(n) +
                             epinv * (fmod.head(n) + mats.c * (gain * eps_s) +
                                      mats.b * (gain * deps_s));
                const Eigen::VectorXd du = gain * (dy.head(n) - deps_s);
                dy.segment(n, m - n) = (-lambda_tail.array() * p.tail(m - n).array()).matrix() +
                                       fmod.tail(m - n) + mats.ctil * u - mats.btil * du;
                return dy;
            };
            ires = integrate_etdrk2(d, rhs, y0, sample_times, iopts);
        }
    }

    // assemble the trajectory record from the completed samples
    traj.state_dim = int(ires.states.cols());
    traj.completed = ires.completed;
    traj.failure = ires.failure;
    traj.t_reached = ires.t_reached;
    traj.n_steps = ires.n_steps;
    traj.n_rejected = ires.n_rejected;
    traj.n_rhs = ires.n_rhs;
    const int done = ires.n_complete;
    traj.times.assign(ires.times.begin(), ires.times.begin() + done);
    traj.norm_p.resize(std::size_t(done));
    traj.norm_eps.resize(std::size_t(done));
    traj.norm_z.resize(std::size_t(done));
    traj.u.resize(done, n);
    traj.states = ires.states.topRows(done);

    const int q_count = int(blocks.size());
    const int msub = cfg.m_sub;
    for (int s = 0; s < done; ++s) {
        const Eigen::VectorXd y = traj.states.row(s).transpose();
        const auto p = y.head(m);
        traj.norm_p[std::size_t(s)] = p.norm();
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        double eps_sq = 0;
        if (kind == scenario_kind::state_feedback) {
            u = gain * p.head(n);
        } else if (kind == scenario_kind::output_feedback) {
            const Eigen::VectorXd eps_s = cross_top * y.tail(q_count * msub);
            u = gain * (p.head(n) - eps_s);
            eps_sq = y.tail(q_count * msub).squaredNorm();
        }
        traj.norm_eps[std::size_t(s)] = std::sqrt(eps_sq);
        traj.norm_z[std::size_t(s)] =
            (kind == scenario_kind::open_loop) ? p.norm() : (p + lift_full * u).norm();
        traj.u.row(s) = u.transpose();
    }
    return traj;
}

struct decay_estimate {
    double rate = 0;        // positive means decay
    double amplitude = 0;   // exp(intercept)
    double r_squared = 0;
    bool degenerate = false;
};

// Least-squares exponential rate of a norm column over [t_lo, t_hi].
// Underflowed norms make the log fit meaningless; that case returns the
// +infinity sentinel with the degenerate flag set.
inline decay_estimate decay_fit(const std::vector<double>& t, const std::vector<double>& norms,
                                double t_lo, double t_hi) {
    std::vector<double> xs, ys;
    bool underflow = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (norms[i] < 1e-300) {
            underflow = true;
            continue;
        }
        xs.push_back(t[i]);
        ys.push_back(std::log(norms[i]));
    }
    if (underflow) {
        decay_estimate out;
        out.rate = std::numeric_limits<double>::infinity();
        out.degenerate = true;
        return out;
    }
    if (xs.size() < 10)
        throw degenerate_fit("need at least 10 positive samples in the fit window, got " +
                             std::to_string(xs.size()));
    const line_fit fit = fit_line(xs, ys);
    decay_estimate out;
    out.rate = -fit.slope;
    out.amplitude = std::exp(fit.intercept);
    out.r_squared = fit.r_squared;
    return out;
}

} // namespace specstab

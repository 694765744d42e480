#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "specstab/errors.hpp"
#include "specstab/lifting.hpp"
#include "specstab/linalg.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

struct design_options {
    int tail_count = 0; // 0 means auto: 10*N + 200
    // Convergence gate on the relative contribution of the trailing tenth of
    // the zeta tail. The sums converge like 1/tail_count, so at the default
    // tail length the diagnostic plateaus near 0.02..0.05 for any N; the gate
    // only exists to reject grossly truncated tails (which overstate the
    // stability margin), not to certify the truncation error.
    double rel_tol = 0.1;
    double cond_limit = 1e12;
    double pinv_cutoff = 1e-8;
};

// Everything the certification and the scaling study report about one (N, m)
// design. The closed-loop matrix I + B*K is rank deficient on symmetric
// domains (proportional trace rows), so the inverse-norm diagnostic carries
// both the pseudoinverse norm and the lambda_N^(3/4) analytic bound.
struct controller_design {
    int n = 0;
    double m = 0;
    Eigen::VectorXd lambda;     // lambda_1 .. lambda_{N+1}
    Eigen::VectorXd k;          // lifting constants
    Eigen::MatrixXd a_s;        // diag(-lambda_1..-lambda_N)
    Eigen::MatrixXd b;
    Eigen::MatrixXd c;
    Eigen::MatrixXd gain;       // K
    Eigen::MatrixXd zeta;       // spillover tail sums, entrywise >= 0
    double tail_estimate = 0;   // max per-entry relative increment of the trailing tenth
    double margin = 0;
    bool certified = false;
    // diagnostics
    double norm_k = 0;
    double cond_mbc = 0;
    double gain_residual = 0;       // relative to ||mI + A_s||
    double weighted_zeta_sum = 0;   // sum zeta_ij (m+k_i)^2/(k_i-lambda_j)^2, enters the margin
    double free_zeta_sum = 0;       // sum zeta_ij / (k_i-lambda_j)^2, the m-free scaling quantity
    double ibk_pinv_norm = 0;       // ||(I+BK)^+||_2
    int ibk_pinv_rank = 0;
    double ibk_norm_bound = 0;      // lambda_N^(3/4)
    double est_inverse_rel_err = std::numeric_limits<double>::quiet_NaN();
};

inline Eigen::MatrixXd gain_matrix(const Eigen::MatrixXd& a_s, const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& c, double m,
                                   double cond_limit = 1e12, double* cond_out = nullptr,
                                   double* residual_out = nullptr) {
    if (!(m > 0.5)) throw config_error("tuning parameter m must exceed 1/2");
    const int n = static_cast<int>(b.rows());
    const Eigen::MatrixXd mbc = m * b - c;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mbc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    const double cond = (smin > 0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (cond_out) *cond_out = cond;
    if (cond > cond_limit)
        throw ill_conditioned("mB - C condition number " + std::to_string(cond) +
                              " exceeds limit " + std::to_string(cond_limit));
    const Eigen::MatrixXd rhs = -(m * Eigen::MatrixXd::Identity(n, n) + a_s);
    const Eigen::MatrixXd gain = svd.solve(rhs);
    if (residual_out) {
        const double denom = rhs.jacobiSvd().singularValues()(0);
        *residual_out = (mbc * gain - rhs).jacobiSvd().singularValues()(0) / denom;
    }
    return gain;
}

inline controller_design design_controller(const rectangle& dom, int n_ctrl, double m,
                                           const design_options& opts = {}) {
    if (!(m > 0.5)) throw config_error("tuning parameter m must exceed 1/2");
    const int tail = (opts.tail_count > 0) ? opts.tail_count : 10 * n_ctrl + 200;
    spectral_basis basis = spectral_basis::enumerate(dom, n_ctrl + tail);
    lifting_system sys = build_lifting(basis, n_ctrl);
    lift_matrices mats = assemble_lift_matrices(sys);

    controller_design d;
    d.n = n_ctrl;
    d.m = m;
    d.lambda.resize(n_ctrl + 1);
    for (int i = 0; i <= n_ctrl; ++i) d.lambda(i) = basis.lambda(i + 1);
    d.k = sys.k;
    d.a_s = Eigen::MatrixXd::Zero(n_ctrl, n_ctrl);
    for (int i = 0; i < n_ctrl; ++i) d.a_s(i, i) = -d.lambda(i);
    d.b = mats.b;
    d.c = mats.c;
    d.gain = gain_matrix(d.a_s, d.b, d.c, m, opts.cond_limit, &d.cond_mbc, &d.gain_residual);

    // Spillover tails over modes N+1 .. N+tail. The squared trace Gram rows
    // are shared across i, so accumulate via one matrix product and keep the
    // trailing-tenth partial sums for the truncation diagnostic.
    Eigen::MatrixXd gram_sq(n_ctrl, tail);
    for (int j = 0; j < n_ctrl; ++j) {
        const eigen_mode& mj = basis.mode(j + 1);
        for (int t = 0; t < tail; ++t) {
            const double g = trace_inner_product(mj, basis.mode(n_ctrl + t + 1), basis.domain());
            gram_sq(j, t) = g * g;
        }
    }
    Eigen::MatrixXd inv_denom_sq(tail, n_ctrl);
    for (int t = 0; t < tail; ++t)
        for (int i = 0; i < n_ctrl; ++i) {
            const double den = sys.denom(i, n_ctrl + t);
            inv_denom_sq(t, i) = 1.0 / (den * den);
        }
    const int head = tail - std::max(1, tail / 10);
    const Eigen::MatrixXd zeta_head =
        (gram_sq.leftCols(head) * inv_denom_sq.topRows(head)).transpose();
    d.zeta = (gram_sq * inv_denom_sq).transpose();
    double max_increment = 0;
    for (int i = 0; i < n_ctrl; ++i)
        for (int j = 0; j < n_ctrl; ++j)
            if (d.zeta(i, j) > 0)
                max_increment =
                    std::max(max_increment, (d.zeta(i, j) - zeta_head(i, j)) / d.zeta(i, j));
    d.tail_estimate = max_increment;
    if (max_increment > opts.rel_tol)
        throw tail_not_converged("zeta tail increment " + std::to_string(max_increment) +
                                     " exceeds tolerance " + std::to_string(opts.rel_tol) +
                                     " at tail_count " + std::to_string(tail),
                                 max_increment);

    for (int i = 0; i < n_ctrl; ++i)
        for (int j = 0; j < n_ctrl; ++j) {
            const double gap = sys.denom(i, j); // k_i - lambda_j
            const double w = (m + d.k(i)) / gap;
            d.weighted_zeta_sum += d.zeta(i, j) * w * w;
            d.free_zeta_sum += d.zeta(i, j) / (gap * gap);
        }

    d.norm_k = d.gain.jacobiSvd().singularValues()(0);
    d.margin = d.lambda(n_ctrl) - m - 0.5 * d.norm_k * d.norm_k * d.weighted_zeta_sum;
    d.certified = d.margin > 0;

    const Eigen::MatrixXd ibk =
        Eigen::MatrixXd::Identity(n_ctrl, n_ctrl) + d.b * d.gain;
    pinv_result pr = pseudo_inverse(ibk, opts.pinv_cutoff);
    d.ibk_pinv_norm = pr.norm();
    d.ibk_pinv_rank = pr.rank;
    d.ibk_norm_bound = std::pow(d.lambda(n_ctrl - 1), 0.75);

    const double min_gap_m = (m - d.lambda.head(n_ctrl).array()).abs().minCoeff();
    if (min_gap_m > 1e-12 * m) {
        // closed-form inverse K^{-1} = -diag(1/(m - lambda_j)) (mB - C)
        Eigen::MatrixXd kinv_closed = m * d.b - d.c;
        for (int j = 0; j < n_ctrl; ++j) kinv_closed.row(j) /= -(m - d.lambda(j));
        const Eigen::MatrixXd kinv_num =
            d.gain.fullPivLu().solve(Eigen::MatrixXd::Identity(n_ctrl, n_ctrl));
        d.est_inverse_rel_err = (kinv_closed - kinv_num).norm() / kinv_num.norm();
    }
    return d;
}

struct margin_row {
    int n = 0;
    double m = 0;
    double margin = 0;
    bool certified = false;
};

struct min_n_not_found : numeric_error {
    std::vector<margin_row> table;
    min_n_not_found(const std::string& msg, std::vector<margin_row> t)
        : numeric_error(msg), table(std::move(t)) {}
};

struct find_min_result {
    int n = 0;
    controller_design design;
    std::vector<margin_row> table;
};

inline find_min_result find_min_n(const rectangle& dom,
                                  const std::function<double(int)>& m_of_n, int n_max,
                                  const design_options& opts = {}) {
    std::vector<margin_row> table;
    for (int n = 1; n <= n_max; ++n) {
        const double m = m_of_n(n);
        controller_design d = design_controller(dom, n, m, opts);
        table.push_back({n, m, d.margin, d.certified});
        if (d.certified) return {n, std::move(d), std::move(table)};
    }
    throw min_n_not_found("no certified dimension found up to N = " + std::to_string(n_max),
                          std::move(table));
}

struct sweep_row {
    int n = 0;
    double norm_k = 0;
    double zeta_term = 0;      // m-free spillover sum, the scaling study quantity
    double ibk_pinv_norm = 0;
    double ibk_norm_bound = 0;
    double margin = 0;
    bool certified = false;
    std::string error;         // empty on success, sweep continues past failures
};

inline std::vector<sweep_row> scaling_sweep(const rectangle& dom,
                                            const std::vector<int>& n_list, double m,
                                            const design_options& opts = {}) {
    std::vector<sweep_row> rows;
    rows.reserve(n_list.size());
    for (int n : n_list) {
        sweep_row row;
        row.n = n;
        try {
            controller_design d = design_controller(dom, n, m, opts);
            row.norm_k = d.norm_k;
            row.zeta_term = d.free_zeta_sum;
            row.ibk_pinv_norm = d.ibk_pinv_norm;
            row.ibk_norm_bound = d.ibk_norm_bound;
            row.margin = d.margin;
            row.certified = d.certified;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Log-spaced integer grid used by the scaling study, duplicates removed.
inline std::vector<int> log_spaced_grid(int lo, int hi, int points) {
    if (lo < 1 || hi < lo || points < 1) throw config_error("invalid sweep grid bounds");
    std::vector<int> out;
    for (int i = 0; i < points; ++i) {
        const double t = (points == 1) ? 0.0 : static_cast<double>(i) / (points - 1);
        const int n = static_cast<int>(std::lround(
            std::exp(std::log(static_cast<double>(lo)) * (1 - t) +
                     std::log(static_cast<double>(hi)) * t)));
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    return out;
}

} // namespace specstab

#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "specstab/errors.hpp"

namespace specstab {

// Spectral norm by power iteration on G^T G. Deterministic: the seed vector
// is all-ones normalized, tolerance 1e-10 on successive Rayleigh quotients,
// hard cap of 10000 sweeps.
inline double spectral_norm(const Eigen::MatrixXd& g, double tol = 1e-10, int max_iter = 10000) {
    if (g.size() == 0) return 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(g.cols());
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = g.transpose() * (g * v);
        const double norm_w = w.norm();
        if (norm_w == 0.0) return 0.0;
        v = w / norm_w;
        const double estimate = std::sqrt(norm_w);
        if (it > 0 && std::abs(estimate - prev) <= tol * std::max(1.0, estimate)) return estimate;
        prev = estimate;
    }
    return prev;
}

// Rank-revealing pseudo-inverse with a relative singular value cutoff.
// Matrices in this library can be exactly rank-deficient with a clean gap
// between true singular values and rounding fuzz, so a relative cutoff is
// the right tool (default 1e-8 * sigma_max).
struct pinv_result {
    Eigen::MatrixXd pinv;
    int rank = 0;
    double smallest_kept = 0.0; // smallest retained singular value
    double largest = 0.0;       // sigma_max
    double norm() const { return smallest_kept > 0.0 ? 1.0 / smallest_kept : 0.0; }
};

inline pinv_result pseudo_inverse(const Eigen::MatrixXd& a, double rel_cutoff = 1e-8) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    pinv_result out;
    out.largest = s.size() ? s(0) : 0.0;
    const double cut = out.largest * rel_cutoff;
    int r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    out.rank = r;
    out.smallest_kept = r > 0 ? s(r - 1) : 0.0;
    Eigen::MatrixXd ur = svd.matrixU().leftCols(r);
    Eigen::MatrixXd vr = svd.matrixV().leftCols(r);
    out.pinv = vr * s.head(r).cwiseInverse().asDiagonal() * ur.transpose();
    return out;
}

// Least-squares slope and its standard error for log-log scaling fits.
struct line_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
};

inline line_fit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Scaling-law slope: OLS on (log x, log y). Requires at least 5 rows and
// strictly positive data on both axes.
inline line_fit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 5 || y.size() != x.size())
        throw degenerate_fit("log-log fit needs at least 5 rows");
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0))
            throw degenerate_fit("log-log fit requires positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly);
}

inline line_fit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw degenerate_fit("need at least two points for a line fit");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw degenerate_fit("all abscissae identical in line fit");
    line_fit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (out.intercept + out.slope * x[i]);
        ss_res += e * e;
    }
    out.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    out.stderr_slope = n > 2 ? std::sqrt(ss_res / double(n - 2) / sxx) : 0.0;
    return out;
}

} // namespace specstab

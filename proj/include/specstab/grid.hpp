#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "specstab/errors.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

// Evaluation/projection of sine-series fields on an interior uniform tensor
// grid. With nx interior points at i*w/(nx+1) the rectangle quadrature is a
// discrete sine transform: exact for products of frequencies <= nx, so any
// band-limited round trip is exact to rounding.
class sine_grid {
public:
    sine_grid(const spectral_basis& basis, int nx, int ny) {
        build(basis, nx, ny);
    }

    // Chooses nx, ny as max(oversample * max frequency, floor_pts). Warns
    // when the requested oversampling falls below 4 (projection of pointwise
    // nonlinearities starts to alias noticeably below that).
    sine_grid(const spectral_basis& basis, int oversample, int floor_pts, warning_list* warnings) {
        if (oversample < 4 && warnings)
            warnings->push_back("AliasingRisk: oversampling factor " + std::to_string(oversample) +
                                " is below 4; nonlinear projections may alias");
        if (oversample < 1) throw config_error("oversampling factor must be >= 1");
        const int nx = std::max(oversample * basis.max_jx(), floor_pts);
        const int ny = std::max(oversample * basis.max_ky(), floor_pts);
        build(basis, nx, ny);
    }

    int nx() const { return int(x_.size()); }
    int ny() const { return int(y_.size()); }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }

    // Field samples F(i,j) = sum_n c_n phi_n(x_i, y_j).
    Eigen::MatrixXd eval(const Eigen::VectorXd& coeffs) const {
        if (coeffs.size() != sx_.rows()) throw config_error("sine_grid::eval: coefficient length mismatch");
        return scale_ * (sx_.transpose() * coeffs.asDiagonal() * sy_);
    }

    // L2 projection <F, phi_n> by tensor quadrature, n = 1..count.
    Eigen::VectorXd project(const Eigen::MatrixXd& field) const {
        if (field.rows() != sx_.cols() || field.cols() != sy_.cols())
            throw config_error("sine_grid::project: field dimensions mismatch");
        const Eigen::MatrixXd t = sx_ * field; // (modes, ny)
        return (scale_ * wx_ * wy_) * t.cwiseProduct(sy_).rowwise().sum();
    }

private:
    void build(const spectral_basis& basis, int nx, int ny) {
        const rectangle& dom = basis.domain();
        const int m = basis.count();
        x_.resize(std::size_t(nx));
        y_.resize(std::size_t(ny));
        for (int i = 0; i < nx; ++i) x_[std::size_t(i)] = (i + 1) * dom.width / (nx + 1);
        for (int j = 0; j < ny; ++j) y_[std::size_t(j)] = (j + 1) * dom.height / (ny + 1);
        wx_ = dom.width / (nx + 1);
        wy_ = dom.height / (ny + 1);
        scale_ = 2.0 / std::sqrt(dom.area());
        sx_.resize(m, nx);
        sy_.resize(m, ny);
        for (int n = 0; n < m; ++n) {
            const eigen_mode& md = basis.mode(n + 1);
            for (int i = 0; i < nx; ++i) sx_(n, i) = std::sin(md.jx * pi * x_[std::size_t(i)] / dom.width);
            for (int j = 0; j < ny; ++j) sy_(n, j) = std::sin(md.ky * pi * y_[std::size_t(j)] / dom.height);
        }
    }

    std::vector<double> x_, y_;
    Eigen::MatrixXd sx_, sy_; // gathered sine tables, one row per mode
    double wx_ = 0, wy_ = 0, scale_ = 0;
};

// Evaluates basis modes on an arbitrary tensor grid (used to sample the
// global field on subdomain grids). Points are in global coordinates.
class mode_evaluator {
public:
    mode_evaluator(const spectral_basis& basis, const std::vector<double>& x,
                   const std::vector<double>& y) {
        const rectangle& dom = basis.domain();
        const int m = basis.count();
        scale_ = 2.0 / std::sqrt(dom.area());
        sx_.resize(m, Eigen::Index(x.size()));
        sy_.resize(m, Eigen::Index(y.size()));
        for (int n = 0; n < m; ++n) {
            const eigen_mode& md = basis.mode(n + 1);
            for (std::size_t i = 0; i < x.size(); ++i)
                sx_(n, Eigen::Index(i)) = std::sin(md.jx * pi * x[i] / dom.width);
            for (std::size_t j = 0; j < y.size(); ++j)
                sy_(n, Eigen::Index(j)) = std::sin(md.ky * pi * y[j] / dom.height);
        }
    }

    Eigen::MatrixXd eval(const Eigen::VectorXd& coeffs) const {
        if (coeffs.size() != sx_.rows()) throw config_error("mode_evaluator: coefficient length mismatch");
        return scale_ * (sx_.transpose() * coeffs.asDiagonal() * sy_);
    }

private:
    Eigen::MatrixXd sx_, sy_;
    double scale_ = 0;
};

// Convenience wrapper matching the library vocabulary: sum of modal
// coefficients evaluated at grid points.
inline Eigen::MatrixXd reconstruct_field(const Eigen::VectorXd& coeffs, const spectral_basis& basis,
                                         const sine_grid& grid) {
    if (coeffs.size() > basis.count()) throw config_error("reconstruct_field: too many coefficients");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(basis.count());
    full.head(coeffs.size()) = coeffs;
    return grid.eval(full);
}

// int_{x0}^{x1} sin(j pi x / w) sin(m pi (x - x0) / (x1 - x0)) dx, closed
// form with a guarded resonant branch. Used for cross projections between
// the global basis and a subdomain basis.
inline double cross_gram_1d(int j, double w, double x0, double x1, int m) {
    const double len = x1 - x0;
    const double a = j * pi / w;
    const double b = m * pi / len;
    const double c = a * x0;
    const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    double big_a, big_b;
    if (std::abs(a - b) < 1e-12 * (a + b)) {
        big_a = 0.5 * len;
        big_b = 0.0;
    } else {
        big_a = sgn * std::sin(a * len) * b / (a * a - b * b);
        big_b = b * (1.0 - sgn * std::cos(a * len)) / (b * b - a * a);
    }
    return std::cos(c) * big_a + std::sin(c) * big_b;
}

} // namespace specstab

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "specstab/errors.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

// Dirichlet lifting machinery. Boundary control enters through harmonic-type
// extensions D_i solving (Laplace - k_i) D_i v = 0 with boundary data v on
// the controlled edge; everything the rest of the library needs is the modal
// coefficient formula <D_i(d_n phi_j), phi_n> = -G(j,n)/denominator(i,n).
struct lifting_system {
    const spectral_basis* basis = nullptr;
    int n_ctrl = 0;                 // controller dimension N
    Eigen::VectorXd k;              // lifting constants k_i, i = 1..N
    Eigen::MatrixXd denom;          // N x M: k_i - lambda_n (n <= N), k_i + lambda_n (n > N)
    Eigen::MatrixXd trace_t;        // N x N: (T_i)_n = -1/(k_i - lambda_n), modal trace descriptors
    double min_abs_denominator = 0; // conditioning metric
    double min_gap_k_lambda = 0;    // min |k_i - lambda_j| over i,j <= N

    int mode_count() const { return basis->count(); }
};

inline lifting_system build_lifting(const spectral_basis& basis, int n_ctrl,
                                    double eps_floor_rel = 1e-9) {
    if (n_ctrl < 1) throw config_error("controller dimension must be >= 1");
    if (n_ctrl >= basis.count())
        throw basis_too_small("need at least N+1 modes in the basis, got N=" +
                              std::to_string(n_ctrl) + ", count=" + std::to_string(basis.count()));

    const int m = basis.count();
    const double lam_n = basis.lambda(n_ctrl);
    const double shift_scale = std::pow(lam_n, -0.75);

    lifting_system sys;
    sys.basis = &basis;
    sys.n_ctrl = n_ctrl;
    sys.k.resize(n_ctrl);
    for (int i = 0; i < n_ctrl; ++i) {
        const eigen_mode& md = basis.mode(i + 1);
        sys.k(i) = md.lambda - std::sqrt(md.trace_norm_sq) * shift_scale;
    }

    sys.denom.resize(n_ctrl, m);
    const double eps_floor = eps_floor_rel * lam_n;
    double min_abs = std::numeric_limits<double>::infinity();
    double min_gap = min_abs;
    for (int i = 0; i < n_ctrl; ++i) {
        for (int n = 0; n < m; ++n) {
            const double lam = basis.lambda(n + 1);
            const double d = (n < n_ctrl) ? sys.k(i) - lam : sys.k(i) + lam;
            sys.denom(i, n) = d;
            min_abs = std::min(min_abs, std::abs(d));
            if (n < n_ctrl) min_gap = std::min(min_gap, std::abs(sys.k(i) - lam));
            if (std::abs(d) < eps_floor)
                throw singular_lifting("lifting denominator |k_" + std::to_string(i + 1) +
                                       (n < n_ctrl ? " - lambda_" : " + lambda_") +
                                       std::to_string(n + 1) + "| = " + std::to_string(std::abs(d)) +
                                       " below floor " + std::to_string(eps_floor));
        }
    }
    sys.min_abs_denominator = min_abs;
    sys.min_gap_k_lambda = min_gap;

    sys.trace_t.resize(n_ctrl, n_ctrl);
    for (int i = 0; i < n_ctrl; ++i)
        for (int n = 0; n < n_ctrl; ++n) sys.trace_t(i, n) = -1.0 / sys.denom(i, n);
    return sys;
}

// Modal coefficients of D_i applied to the normal trace of mode j:
// coeff_n = -<d_n phi_j, d_n phi_n> / denominator(i, n), n = 1..M.
inline Eigen::VectorXd dirichlet_coefficient(const lifting_system& sys, int i, int j) {
    if (i < 1 || i > sys.n_ctrl) throw config_error("dirichlet_coefficient: i out of range");
    if (j < 1 || j > sys.mode_count()) throw config_error("dirichlet_coefficient: j out of range");
    const spectral_basis& basis = *sys.basis;
    const int m = basis.count();
    Eigen::VectorXd out(m);
    const eigen_mode& mj = basis.mode(j);
    for (int n = 0; n < m; ++n) {
        const double g = trace_inner_product(mj, basis.mode(n + 1), basis.domain());
        out(n) = (g == 0.0) ? 0.0 : -g / sys.denom(i - 1, n);
    }
    return out;
}

// Input matrices of the lifted modal dynamics. For rows j <= N this is the
// B (and C) of the gain synthesis; rows j > N couple the control into the
// truncated tail. B rows: sum_i G(j,n)/((k_i - lambda_j')(k_i "+/-" lambda_n))
// with the sign split encoded in the denominators table.
struct lift_matrices {
    Eigen::MatrixXd b;    // N x N
    Eigen::MatrixXd c;    // N x N (extra k_i factor)
    Eigen::MatrixXd btil; // (M-N) x N tail input matrix
    Eigen::MatrixXd ctil; // (M-N) x N tail input matrix with k_i factor
};

inline lift_matrices assemble_lift_matrices(const lifting_system& sys) {
    const spectral_basis& basis = *sys.basis;
    const int n_ctrl = sys.n_ctrl;
    const int m = basis.count();
    lift_matrices out;
    out.b = Eigen::MatrixXd::Zero(n_ctrl, n_ctrl);
    out.c = Eigen::MatrixXd::Zero(n_ctrl, n_ctrl);
    out.btil = Eigen::MatrixXd::Zero(m - n_ctrl, n_ctrl);
    out.ctil = Eigen::MatrixXd::Zero(m - n_ctrl, n_ctrl);
    for (int row = 0; row < m; ++row) {
        const eigen_mode& mr = basis.mode(row + 1);
        for (int l = 0; l < n_ctrl; ++l) {
            const double g = trace_inner_product(basis.mode(l + 1), mr, basis.domain());
            if (g == 0.0) continue;
            double acc_b = 0.0, acc_c = 0.0;
            for (int i = 0; i < n_ctrl; ++i) {
                const double term = 1.0 / (sys.denom(i, l) * sys.denom(i, row));
                acc_b += term;
                acc_c += sys.k(i) * term;
            }
            if (row < n_ctrl) {
                out.b(row, l) = g * acc_b;
                out.c(row, l) = g * acc_c;
            } else {
                out.btil(row - n_ctrl, l) = g * acc_b;
                out.ctil(row - n_ctrl, l) = g * acc_c;
            }
        }
    }
    return out;
}

// Modal coefficients (length M) of the lifted control field sum_i D_i U_i
// for the control coefficient vector u.
inline Eigen::VectorXd lift_field(const lift_matrices& mats, const Eigen::VectorXd& u) {
    if (u.size() != mats.b.cols()) throw config_error("lift_field: control vector length mismatch");
    Eigen::VectorXd out(mats.b.rows() + mats.btil.rows());
    out.head(mats.b.rows()) = mats.b * u;
    out.tail(mats.btil.rows()) = mats.btil * u;
    return out;
}

} // namespace specstab

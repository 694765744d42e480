#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "specstab/errors.hpp"

namespace specstab {

// Closed set of builtin reaction terms. Keeping the set closed (rather than
// parsing arbitrary expressions) is what makes the Lipschitz audit sound:
// every builtin has an exact Lipschitz constant.
enum class f_kind { sin_linear, linear, tanh_scaled, zero };

struct nonlinearity {
    f_kind kind = f_kind::zero;
    double a = 0.0;
    double b = 0.0;
    double lipschitz = 0.0; // exact constant of the builtin
    std::string name = "zero";

    double operator()(double z) const {
        switch (kind) {
            case f_kind::sin_linear: return a * std::sin(z) + b * z;
            case f_kind::linear: return a * z;
            case f_kind::tanh_scaled: return a * std::tanh(z);
            case f_kind::zero: return 0.0;
        }
        return 0.0;
    }

    bool is_zero() const { return kind == f_kind::zero; }

    // Vectorized evaluation for grid fields.
    Eigen::ArrayXXd apply(const Eigen::ArrayXXd& z) const {
        switch (kind) {
            case f_kind::sin_linear: return a * z.sin() + b * z;
            case f_kind::linear: return a * z;
            case f_kind::tanh_scaled: return a * z.tanh();
            case f_kind::zero: return Eigen::ArrayXXd::Zero(z.rows(), z.cols());
        }
        return Eigen::ArrayXXd::Zero(z.rows(), z.cols());
    }
};

inline nonlinearity make_nonlinearity(const std::string& kind, double a, double b) {
    nonlinearity f;
    f.name = kind;
    f.a = a;
    f.b = b;
    if (kind == "a*sin(z)+b*z") {
        f.kind = f_kind::sin_linear;
        f.lipschitz = std::abs(a) + std::abs(b);
    } else if (kind == "a*z") {
        f.kind = f_kind::linear;
        f.lipschitz = std::abs(a);
    } else if (kind == "a*tanh(z)") {
        f.kind = f_kind::tanh_scaled;
        f.lipschitz = std::abs(a);
    } else if (kind == "zero") {
        f.kind = f_kind::zero;
        f.lipschitz = 0.0;
    } else {
        throw config_error("unknown nonlinearity kind '" + kind +
                           "' (expected one of: a*sin(z)+b*z, a*z, a*tanh(z), zero)");
    }
    return f;
}

// Aborts when the declared Lipschitz constant understates the sampled
// difference quotients of f over [-10, 10], or when f(0) != 0. Runs before
// any simulation so a bad declaration never reaches the integrator.
inline void audit_nonlinearity(const nonlinearity& f, double declared_l, int samples = 4001) {
    if (std::abs(f(0.0)) > 1e-12 * std::max(1.0, declared_l))
        throw config_error("nonlinearity must vanish at zero, got f(0) = " + std::to_string(f(0.0)));
    if (declared_l < 0) throw config_error("declared Lipschitz constant must be nonnegative");
    const double lo = -10.0, hi = 10.0;
    const double h = (hi - lo) / (samples - 1);
    const double limit = declared_l * (1.0 + 1e-6);
    double prev = f(lo);
    for (int i = 1; i < samples; ++i) {
        const double cur = f(lo + i * h);
        const double quotient = std::abs(cur - prev) / h;
        if (quotient > limit)
            throw config_error("sampled difference quotient " + std::to_string(quotient) +
                               " exceeds declared Lipschitz constant " + std::to_string(declared_l));
        prev = cur;
    }
}

} // namespace specstab

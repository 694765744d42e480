#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace specstab {

// Configuration and usage problems. The CLI maps these to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric/diagnostic failures. The CLI maps these to exit code 1.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

class basis_too_small : public numeric_error {
public:
    explicit basis_too_small(const std::string& msg) : numeric_error(msg) {}
};

// A lifting denominator k_i - lambda_n (or k_i + lambda_n) fell below the
// configured floor; the gain identity would be meaningless past this point.
class singular_lifting : public numeric_error {
public:
    explicit singular_lifting(const std::string& msg) : numeric_error(msg) {}
};

class ill_conditioned : public numeric_error {
public:
    explicit ill_conditioned(const std::string& msg) : numeric_error(msg) {}
};

class tail_not_converged : public numeric_error {
public:
    tail_not_converged(const std::string& msg, double increment)
        : numeric_error(msg), relative_increment(increment) {}
    double relative_increment;
};

class envelope_invalid : public numeric_error {
public:
    explicit envelope_invalid(const std::string& msg) : numeric_error(msg) {}
};

class degenerate_fit : public numeric_error {
public:
    explicit degenerate_fit(const std::string& msg) : numeric_error(msg) {}
};

// Integration failures carry the time reached so callers can salvage the
// partial trajectory (the CLI writes it with a TRUNCATED footer).
class step_size_underflow : public numeric_error {
public:
    step_size_underflow(const std::string& msg, double t) : numeric_error(msg), t_reached(t) {}
    double t_reached;
};

class non_finite : public numeric_error {
public:
    non_finite(const std::string& msg, double t) : numeric_error(msg), t_reached(t) {}
    double t_reached;
};

// Non-fatal diagnostics (e.g. aliasing risk, uncertified designs) collected
// by whoever owns the computation and surfaced in summaries.
using warning_list = std::vector<std::string>;

} // namespace specstab

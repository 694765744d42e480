#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "specstab/errors.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

// Axis-aligned measurement-interface partition of a rectangle. Vertical
// lines cut the width, horizontal lines cut the height; the induced cells
// carry their ground eigenvalues, which drive every decay condition here.
struct sensor_partition {
    rectangle domain;
    std::vector<double> vertical_lines;   // interior x-positions, strictly increasing
    std::vector<double> horizontal_lines; // interior y-positions, strictly increasing
    std::vector<rectangle> subdomains;    // row-major: (i over x-cells, j over y-cells)
    std::vector<double> first_eigenvalues;
    double min_first_eigenvalue = 0;

    int m1() const { return static_cast<int>(vertical_lines.size()); }
    int m2() const { return static_cast<int>(horizontal_lines.size()); }
};

namespace detail {
inline std::vector<double> cell_sizes(const std::vector<double>& lines, double extent) {
    std::vector<double> out;
    double prev = 0;
    for (double v : lines) {
        out.push_back(v - prev);
        prev = v;
    }
    out.push_back(extent - prev);
    return out;
}
} // namespace detail

inline sensor_partition make_partition(const rectangle& dom, std::vector<double> vlines,
                                       std::vector<double> hlines) {
    dom.validate();
    auto check_lines = [](const std::vector<double>& lines, double extent, const char* which) {
        double prev = 0;
        for (double v : lines) {
            if (!(v > prev) || !(v < extent))
                throw config_error(std::string(which) +
                                   " lines must be strictly increasing and interior");
            prev = v;
        }
    };
    std::sort(vlines.begin(), vlines.end());
    std::sort(hlines.begin(), hlines.end());
    check_lines(vlines, dom.width, "vertical");
    check_lines(hlines, dom.height, "horizontal");

    sensor_partition p;
    p.domain = dom;
    p.vertical_lines = std::move(vlines);
    p.horizontal_lines = std::move(hlines);
    const std::vector<double> widths = detail::cell_sizes(p.vertical_lines, dom.width);
    const std::vector<double> heights = detail::cell_sizes(p.horizontal_lines, dom.height);
    p.min_first_eigenvalue = std::numeric_limits<double>::infinity();
    for (double gw : widths)
        for (double gh : heights) {
            rectangle cell;
            cell.width = gw;
            cell.height = gh;
            p.subdomains.push_back(cell);
            const double lam1 = pi * pi * (1.0 / (gw * gw) + 1.0 / (gh * gh));
            p.first_eigenvalues.push_back(lam1);
            p.min_first_eigenvalue = std::min(p.min_first_eigenvalue, lam1);
        }
    return p;
}

inline sensor_partition equidistant_partition(int m1, int m2, const rectangle& dom) {
    if (m1 < 0 || m2 < 0) throw config_error("line counts must be nonnegative");
    std::vector<double> v, h;
    for (int i = 1; i <= m1; ++i) v.push_back(dom.width * i / (m1 + 1));
    for (int j = 1; j <= m2; ++j) h.push_back(dom.height * j / (m2 + 1));
    return make_partition(dom, std::move(v), std::move(h));
}

inline sensor_partition random_partition(int m1, int m2, const rectangle& dom,
                                         std::mt19937_64& rng) {
    auto draw = [&rng](int count, double extent) {
        std::uniform_real_distribution<double> dist(0.0, extent);
        std::vector<double> lines;
        while (static_cast<int>(lines.size()) < count) {
            const double v = dist(rng);
            if (v > 0.0 && v < extent &&
                std::find(lines.begin(), lines.end(), v) == lines.end())
                lines.push_back(v);
        }
        return lines;
    };
    return make_partition(dom, draw(m1, dom.width), draw(m2, dom.height));
}

// Maximal subdomain volume under which a Lipschitz-L nonlinearity still
// leaves every cell's ground mode dominant, via the Weyl-constant bound.
inline double volume_threshold(int d, double lipschitz) {
    if (d < 1) throw config_error("dimension must be >= 1");
    if (!(lipschitz > 0)) throw config_error("Lipschitz constant must be positive");
    return std::pow(static_cast<double>(d) / (lipschitz * (d + 2)), 0.5 * d) / weyl_constant(d);
}

struct partition_check {
    bool satisfied = false;
    double margin = 0;        // min cell ground eigenvalue minus L
    double envelope_rate = 0; // identical quantity, reported as the decay rate
};

inline partition_check check_partition(const sensor_partition& p, double lipschitz) {
    partition_check out;
    out.margin = p.min_first_eigenvalue - lipschitz;
    out.envelope_rate = out.margin;
    out.satisfied = out.margin > 0;
    return out;
}

inline double observer_decay_envelope(const sensor_partition& p, double lipschitz,
                                      double eps0_norm, double t) {
    const partition_check chk = check_partition(p, lipschitz);
    if (!chk.satisfied)
        throw envelope_invalid("partition does not satisfy the decay condition: margin " +
                               std::to_string(chk.margin));
    return eps0_norm * std::exp(-chk.envelope_rate * t);
}

struct minimal_lines_result {
    int m_total = 0;
    int m1 = 0;
    int m2 = 0;
    double rhs = 0; // min cell ground eigenvalue of the chosen equidistant split
    sensor_partition partition;
};

// Smallest total line count whose best equidistant split beats L, searching
// splits exhaustively per M. Ties in the split objective prefer vertical
// lines, so square domains deterministically return (M, 0).
inline minimal_lines_result minimal_sensor_lines(double lipschitz, const rectangle& dom) {
    if (!(lipschitz > 0)) throw config_error("Lipschitz constant must be positive");
    for (int m = 0;; ++m) {
        int best_m1 = -1;
        double best_rhs = 0;
        for (int m1 = m; m1 >= 0; --m1) {
            const int m2 = m - m1;
            const double c1 = (m1 + 1) / dom.width;
            const double c2 = (m2 + 1) / dom.height;
            const double rhs = pi * pi * (c1 * c1 + c2 * c2);
            if (rhs > best_rhs) {
                best_rhs = rhs;
                best_m1 = m1;
            }
        }
        if (best_rhs > lipschitz) {
            minimal_lines_result out;
            out.m_total = m;
            out.m1 = best_m1;
            out.m2 = m - best_m1;
            out.rhs = best_rhs;
            out.partition = equidistant_partition(out.m1, out.m2, dom);
            return out;
        }
    }
}

} // namespace specstab

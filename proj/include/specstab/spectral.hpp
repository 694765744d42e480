#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include "specstab/errors.hpp"

namespace specstab {

inline constexpr double pi = 3.14159265358979323846;

enum class edge { left, right, bottom, top };

inline const char* edge_name(edge e) {
    switch (e) {
        case edge::left: return "left";
        case edge::right: return "right";
        case edge::bottom: return "bottom";
        case edge::top: return "top";
    }
    return "?";
}

// Axis-aligned rectangle (0,width) x (0,height). The controlled edge is the
// actuation boundary; the rest of the boundary is homogeneous Dirichlet.
struct rectangle {
    double width = 1.0;
    double height = 1.0;
    edge controlled_edge = edge::left;

    double area() const { return width * height; }

    void validate() const {
        if (!(width > 0.0) || !(height > 0.0))
            throw config_error("rectangle sides must be positive");
    }
};

struct eigen_mode {
    int rank = 0;            // 1-based position in the sorted spectrum
    int jx = 0;              // x frequency index
    int ky = 0;              // y frequency index
    double lambda = 0.0;     // pi^2((jx/w)^2 + (ky/h)^2)
    double trace_norm_sq = 0.0; // squared L2 norm of the normal derivative on the controlled edge
};

inline double eigenvalue(const rectangle& dom, int jx, int ky) {
    const double a = jx * pi / dom.width;
    const double b = ky * pi / dom.height;
    return a * a + b * b;
}

// <d_n phi_a, d_n phi_b> over the controlled edge, closed form. Modes whose
// tangential frequency differs are orthogonal on any single edge.
inline double trace_inner_product(const eigen_mode& a, const eigen_mode& b, const rectangle& dom) {
    const double w = dom.width, h = dom.height;
    switch (dom.controlled_edge) {
        case edge::left:
            if (a.ky != b.ky) return 0.0;
            return 2.0 * pi * pi * a.jx * b.jx / (w * w * w);
        case edge::right: {
            if (a.ky != b.ky) return 0.0;
            const double sign = ((a.jx + b.jx) % 2 == 0) ? 1.0 : -1.0;
            return sign * 2.0 * pi * pi * a.jx * b.jx / (w * w * w);
        }
        case edge::bottom:
            if (a.jx != b.jx) return 0.0;
            return 2.0 * pi * pi * a.ky * b.ky / (h * h * h);
        case edge::top: {
            if (a.jx != b.jx) return 0.0;
            const double sign = ((a.ky + b.ky) % 2 == 0) ? 1.0 : -1.0;
            return sign * 2.0 * pi * pi * a.ky * b.ky / (h * h * h);
        }
    }
    return 0.0;
}

// Squared trace norm over the whole boundary (all four edges).
inline double boundary_norm_sq(const eigen_mode& m, const rectangle& dom) {
    const double w = dom.width, h = dom.height;
    return 4.0 * pi * pi * (double(m.jx) * m.jx / (w * w * w) + double(m.ky) * m.ky / (h * h * h));
}

class spectral_basis {
public:
    static spectral_basis enumerate(const rectangle& dom, int count) {
        dom.validate();
        if (count < 1) throw config_error("mode count must be >= 1");

        // Grow a frontier over the (jx, ky) lattice until count+1 candidates
        // have been popped; the last popped eigenvalue caps the search box.
        using node = std::tuple<double, int, int>;
        std::priority_queue<node, std::vector<node>, std::greater<node>> heap;
        heap.emplace(eigenvalue(dom, 1, 1), 1, 1);
        double lambda_cap = 0.0;
        for (int popped = 0; popped <= count; ++popped) {
            auto [lam, j, k] = heap.top();
            heap.pop();
            lambda_cap = lam;
            heap.emplace(eigenvalue(dom, j + 1, k), j + 1, k);
            if (j == 1) heap.emplace(eigenvalue(dom, j, k + 1), j, k + 1);
        }

        const double side = std::max(dom.width, dom.height);
        const int box = int(std::ceil(std::sqrt(lambda_cap) * side / pi)) + 1;
        std::vector<eigen_mode> all;
        all.reserve(std::size_t(box) * box / 2);
        for (int j = 1; j <= box; ++j) {
            for (int k = 1; k <= box; ++k) {
                const double lam = eigenvalue(dom, j, k);
                if (lam <= lambda_cap) all.push_back(eigen_mode{0, j, k, lam, 0.0});
            }
        }
        std::sort(all.begin(), all.end(), [](const eigen_mode& a, const eigen_mode& b) {
            return std::tie(a.lambda, a.jx, a.ky) < std::tie(b.lambda, b.jx, b.ky);
        });
        if (int(all.size()) < count)
            throw numeric_error("mode enumeration box too small (internal bound violated)");
        all.resize(std::size_t(count));

        spectral_basis basis;
        basis.dom_ = dom;
        basis.modes_ = std::move(all);
        for (int n = 0; n < count; ++n) {
            basis.modes_[std::size_t(n)].rank = n + 1;
            basis.modes_[std::size_t(n)].trace_norm_sq =
                trace_inner_product(basis.modes_[std::size_t(n)], basis.modes_[std::size_t(n)], dom);
        }
        if (count >= 2 && !(basis.modes_[0].lambda < basis.modes_[1].lambda))
            throw numeric_error("ground eigenvalue is not simple on this rectangle");
        return basis;
    }

    const rectangle& domain() const { return dom_; }
    int count() const { return int(modes_.size()); }
    const eigen_mode& mode(int rank) const { return modes_.at(std::size_t(rank - 1)); }
    const std::vector<eigen_mode>& modes() const { return modes_; }
    double lambda(int rank) const { return mode(rank).lambda; }

    int max_jx() const {
        int m = 1;
        for (const auto& md : modes_) m = std::max(m, md.jx);
        return m;
    }
    int max_ky() const {
        int m = 1;
        for (const auto& md : modes_) m = std::max(m, md.ky);
        return m;
    }

private:
    rectangle dom_;
    std::vector<eigen_mode> modes_;
};

// Weyl constant C_d = (4*pi)^(-d/2) / Gamma(d/2 + 1).
inline double weyl_constant(int d) {
    if (d < 1) throw config_error("dimension must be >= 1");
    return std::pow(4.0 * pi, -0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Berezin-Li-Yau lower bound on the k-th Dirichlet eigenvalue.
inline double bly_lower_bound(int k, int d, double volume) {
    if (k < 1) throw config_error("eigenvalue index must be >= 1");
    if (!(volume > 0.0)) throw config_error("volume must be positive");
    const double cd = weyl_constant(d);
    return (double(d) / (d + 2)) * std::pow(double(k) / (cd * volume), 2.0 / d);
}

// lambda_k divided by the Weyl asymptote; tends to 1 as k grows.
inline double weyl_ratio(const spectral_basis& basis, int k) {
    if (k < 1 || k > basis.count()) throw config_error("weyl_ratio: index out of range");
    const double asymptote = double(k) / (weyl_constant(2) * basis.domain().area());
    return basis.lambda(k) / asymptote;
}

} // namespace specstab

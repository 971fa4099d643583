#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ifb/errors.hpp"

namespace ifb {

using Vec = Eigen::VectorXd;

// Result of one forward-backward application: the mapped point and the
// Euclidean norm of the proximal residual at the input.
struct ProxResult {
    Vec point;
    double residual_norm = 0.0;
};

// prox of t*||.||_1, componentwise sign(x) * max(|x| - t, 0).
inline Vec soft_threshold(const Vec& x, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: threshold must be nonnegative");
    if (!x.allFinite()) throw std::invalid_argument("soft_threshold: non-finite input");
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]) - t;
        out[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) : 0.0;
    }
    return out;
}

inline double soft_threshold(double x, double t) {
    if (!(t >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("soft_threshold: bad scalar input");
    const double a = std::abs(x) - t;
    return a > 0.0 ? (x > 0.0 ? a : -a) : 0.0;
}

// prox of the box indicator: clamp componentwise to [lo, hi].
inline Vec project_box(const Vec& x, const Vec& lo, const Vec& hi) {
    if (lo.size() != x.size() || hi.size() != x.size())
        throw std::invalid_argument("project_box: dimension mismatch");
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (lo[i] > hi[i]) throw std::invalid_argument("project_box: lo > hi");
        out[i] = std::min(hi[i], std::max(lo[i], x[i]));
    }
    return out;
}

}  // namespace ifb

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ifb/errors.hpp"
#include "ifb/prox.hpp"
#include "ifb/rng.hpp"

namespace ifb {

// Dense or sparse m x n matrix with a common matvec surface.
class DesignMatrix {
public:
    using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    static DesignMatrix from_dense(Eigen::MatrixXd m) {
        DesignMatrix d;
        d.dense_ = std::move(m);
        d.sparse_flag_ = false;
        return d;
    }

    static DesignMatrix from_sparse(Sparse m) {
        DesignMatrix d;
        m.makeCompressed();
        d.sparse_ = std::move(m);
        d.sparse_flag_ = true;
        return d;
    }

    Eigen::Index rows() const { return sparse_flag_ ? sparse_.rows() : dense_.rows(); }
    Eigen::Index cols() const { return sparse_flag_ ? sparse_.cols() : dense_.cols(); }
    bool is_sparse() const { return sparse_flag_; }
    const Eigen::MatrixXd& dense() const { return dense_; }
    const Sparse& sparse() const { return sparse_; }

    Vec apply(const Vec& x) const { return sparse_flag_ ? Vec(sparse_ * x) : Vec(dense_ * x); }

    Vec apply_transpose(const Vec& r) const {
        return sparse_flag_ ? Vec(sparse_.transpose() * r) : Vec(dense_.transpose() * r);
    }

private:
    Eigen::MatrixXd dense_;
    Sparse sparse_;
    bool sparse_flag_ = false;
};

enum class NonsmoothKind { Zero, L1, Box };

// One instance of the composite problem min f(x) + g(x): oracles for the
// smooth part, a prox oracle for the nonsmooth part, and the constants the
// solvers need. The nonsmooth part's structure is kept alongside the prox
// oracle so the minimum-norm subgradient of f + g stays computable.
struct ProblemInstance {
    std::function<double(const Vec&)> smooth_value;
    std::function<Vec(const Vec&)> smooth_gradient;
    std::function<double(const Vec&)> nonsmooth_value;
    std::function<Vec(const Vec&, double)> prox;  // (v, t) -> prox_{t g}(v)
    double lipschitz = 0.0;
    std::optional<double> strong_convexity;
    Eigen::Index dimension = 0;

    NonsmoothKind g_kind = NonsmoothKind::Zero;
    double l1_weight = 0.0;
    Vec box_lo, box_hi;

    double objective(const Vec& x) const { return smooth_value(x) + nonsmooth_value(x); }
};

// T_lambda(x) = prox_{lambda g}(x - lambda grad f(x)).
inline ProxResult forward_backward_map(const ProblemInstance& problem, const Vec& x,
                                       double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("forward_backward_map: lambda must be > 0");
    const Vec grad = problem.smooth_gradient(x);
    if (!grad.allFinite()) throw NumericFailure("forward_backward_map: non-finite gradient");
    ProxResult r;
    r.point = problem.prox(x - lambda * grad, lambda);
    r.residual_norm = (x - r.point).norm();
    return r;
}

// Minimum-norm element of the subdifferential of F = f + g at x, for the two
// supported nonsmooth parts (weighted l1 and box indicator; g = 0 is the
// l1 case with zero weight). Returns the vector and its Euclidean norm.
inline std::pair<Vec, double> min_norm_subgradient(const ProblemInstance& problem, const Vec& x) {
    const Vec grad = problem.smooth_gradient(x);
    Vec v(x.size());
    switch (problem.g_kind) {
        case NonsmoothKind::Zero:
            v = grad;
            break;
        case NonsmoothKind::L1: {
            const double d = problem.l1_weight;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                if (x[i] > 0.0)
                    v[i] = grad[i] + d;
                else if (x[i] < 0.0)
                    v[i] = grad[i] - d;
                else
                    v[i] = soft_threshold(grad[i], d);
            }
            break;
        }
        case NonsmoothKind::Box: {
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const bool at_lo = x[i] <= problem.box_lo[i];
                const bool at_hi = x[i] >= problem.box_hi[i];
                if (at_lo && at_hi)
                    v[i] = 0.0;  // pinned coordinate, normal cone is all of R
                else if (at_lo)
                    v[i] = std::min(grad[i], 0.0);
                else if (at_hi)
                    v[i] = std::max(grad[i], 0.0);
                else
                    v[i] = grad[i];
            }
            break;
        }
        default:
            throw UnsupportedOperation("min_norm_subgradient: unsupported nonsmooth part");
    }
    return {v, v.norm()};
}

enum class SpectralMode { Gram, Symmetric };

// Largest eigenvalue of M^T M (Gram) or of a symmetric PSD M, by power
// iteration from a deterministic start. Throws NumericFailure carrying the
// best estimate if the cap is hit.
inline double estimate_lipschitz(const DesignMatrix& m, SpectralMode mode,
                                 double rel_tol = 1e-9, int max_iter = 5000) {
    const Eigen::Index n = mode == SpectralMode::Gram ? m.cols() : m.rows();
    if (n == 0) throw std::invalid_argument("estimate_lipschitz: empty matrix");
    if (mode == SpectralMode::Symmetric && m.rows() != m.cols())
        throw std::invalid_argument("estimate_lipschitz: symmetric mode needs a square matrix");

    Vec v = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
    double lambda = 0.0, lambda_prev = -1.0;
    for (int it = 0; it < max_iter; ++it) {
        Vec w = mode == SpectralMode::Gram ? Vec(m.apply_transpose(m.apply(v))) : m.apply(v);
        lambda = v.dot(w);  // Rayleigh quotient, ||v|| = 1
        const double wn = w.norm();
        if (wn == 0.0) {
            // start vector hit the null space; fall back to a skewed start
            v = Vec::LinSpaced(n, 1.0, static_cast<double>(n));
            v /= v.norm();
            continue;
        }
        if (it > 0 && std::abs(lambda - lambda_prev) <= rel_tol * std::max(std::abs(lambda), 1e-300))
            return lambda;
        lambda_prev = lambda;
        v = w / wn;
    }
    throw NumericFailure("estimate_lipschitz: power iteration did not converge", lambda);
}

// F(x) = 0.5 ||Ax - b||^2 + delta ||x||_1
inline ProblemInstance make_lasso(const DesignMatrix& a, const Vec& b, double delta) {
    if (a.rows() != b.size()) throw std::invalid_argument("make_lasso: rows(A) != len(b)");
    if (!(delta > 0.0)) throw std::invalid_argument("make_lasso: delta must be > 0");
    ProblemInstance p;
    p.dimension = a.cols();
    p.smooth_value = [a, b](const Vec& x) { return 0.5 * (a.apply(x) - b).squaredNorm(); };
    p.smooth_gradient = [a, b](const Vec& x) { return a.apply_transpose(a.apply(x) - b); };
    p.nonsmooth_value = [delta](const Vec& x) { return delta * x.lpNorm<1>(); };
    p.prox = [delta](const Vec& v, double t) { return soft_threshold(v, t * delta); };
    p.lipschitz = estimate_lipschitz(a, SpectralMode::Gram);
    p.g_kind = NonsmoothKind::L1;
    p.l1_weight = delta;
    return p;
}

enum class LogisticLipschitz { Paper, Tight };

// f(x) = (1/n) sum log(1 + exp(-l_i <h_i, x>)) + delta ||x||_1, evaluated
// through K with K_ij = -l_i h_ij so f(x) = (1/n) sum log(1 + exp((Kx)_i)).
inline ProblemInstance make_logistic(const DesignMatrix& features, const Vec& labels,
                                     double delta,
                                     LogisticLipschitz rule = LogisticLipschitz::Paper) {
    const Eigen::Index n = features.rows();
    if (n != labels.size()) throw std::invalid_argument("make_logistic: row count mismatch");
    if (!(delta > 0.0)) throw std::invalid_argument("make_logistic: delta must be > 0");
    for (Eigen::Index i = 0; i < n; ++i)
        if (labels[i] != 1.0 && labels[i] != -1.0)
            throw std::invalid_argument("make_logistic: labels must be in {-1,+1}");

    DesignMatrix k;
    if (features.is_sparse()) {
        DesignMatrix::Sparse s = features.sparse();
        for (Eigen::Index i = 0; i < s.outerSize(); ++i)
            for (DesignMatrix::Sparse::InnerIterator it(s, i); it; ++it)
                it.valueRef() *= -labels[it.row()];
        k = DesignMatrix::from_sparse(std::move(s));
    } else {
        Eigen::MatrixXd d = features.dense();
        for (Eigen::Index i = 0; i < n; ++i) d.row(i) *= -labels[i];
        k = DesignMatrix::from_dense(std::move(d));
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    ProblemInstance p;
    p.dimension = features.cols();
    p.smooth_value = [k, inv_n](const Vec& x) {
        const Vec z = k.apply(x);
        double s = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i)
            s += z[i] > 0.0 ? z[i] + std::log1p(std::exp(-z[i])) : std::log1p(std::exp(z[i]));
        return inv_n * s;
    };
    p.smooth_gradient = [k, inv_n](const Vec& x) {
        const Vec z = k.apply(x);
        Vec sig(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) sig[i] = 1.0 / (1.0 + std::exp(-z[i]));
        return Vec(inv_n * k.apply_transpose(sig));
    };
    p.nonsmooth_value = [delta](const Vec& x) { return delta * x.lpNorm<1>(); };
    p.prox = [delta](const Vec& v, double t) { return soft_threshold(v, t * delta); };
    const double ktk = estimate_lipschitz(k, SpectralMode::Gram);
    p.lipschitz = rule == LogisticLipschitz::Paper ? 4.0 * inv_n * ktk : ktk * inv_n / 4.0;
    p.g_kind = NonsmoothKind::L1;
    p.l1_weight = delta;
    return p;
}

// f(x) = 0.5 x^T A x + b^T x over the box [lo, hi].
inline ProblemInstance make_box_qp(const DesignMatrix& a, const Vec& b, const Vec& lo,
                                   const Vec& hi) {
    if (a.rows() != a.cols()) throw std::invalid_argument("make_box_qp: A must be square");
    if (a.rows() != b.size() || lo.size() != b.size() || hi.size() != b.size())
        throw std::invalid_argument("make_box_qp: dimension mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (lo[i] > hi[i]) throw std::invalid_argument("make_box_qp: lo > hi");
    const Eigen::MatrixXd& ad = a.dense();
    if ((ad - ad.transpose()).norm() > 1e-10 * std::max(ad.norm(), 1e-300))
        throw std::invalid_argument("make_box_qp: A is not symmetric");

    ProblemInstance p;
    p.dimension = a.cols();
    p.smooth_value = [a, b](const Vec& x) { return 0.5 * x.dot(a.apply(x)) + b.dot(x); };
    p.smooth_gradient = [a, b](const Vec& x) { return Vec(a.apply(x) + b); };
    p.nonsmooth_value = [lo, hi](const Vec& x) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12)
                return std::numeric_limits<double>::infinity();
        return 0.0;
    };
    p.prox = [lo, hi](const Vec& v, double) { return project_box(v, lo, hi); };
    const double lmax = estimate_lipschitz(a, SpectralMode::Symmetric);
    p.lipschitz = lmax;
    // lambda_min via power iteration on lmax*I - A
    {
        Eigen::MatrixXd shifted = -ad;
        shifted.diagonal().array() += lmax;
        double top = 0.0;
        try {
            top = estimate_lipschitz(DesignMatrix::from_dense(shifted), SpectralMode::Symmetric);
        } catch (const NumericFailure& e) {
            top = e.best_estimate;
        }
        p.strong_convexity = std::max(lmax - top, 0.0);
    }
    p.g_kind = NonsmoothKind::Box;
    p.box_lo = lo;
    p.box_hi = hi;
    return p;
}

struct LassoInstance {
    Eigen::MatrixXd a;
    Vec b;
    double delta = 1.0;
    Vec planted;
    ProblemInstance problem;
};

// Random m x n Gaussian design, s-sparse planted vector, b = A x_hat + 0.5 eps.
// Draw order under one seed: A row-major, support (partial Fisher-Yates),
// support values, noise.
inline LassoInstance gen_lasso_instance(int m, int n, int s, std::uint64_t seed,
                                        double delta = 1.0) {
    if (m <= 0 || n <= 0 || s <= 0 || s > n)
        throw std::invalid_argument("gen_lasso_instance: need 0 < s <= n and m > 0");
    Rng rng(seed);
    LassoInstance inst;
    inst.delta = delta;
    inst.a.resize(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) inst.a(i, j) = rng.gaussian();

    std::vector<int> idx(n);
    for (int j = 0; j < n; ++j) idx[j] = j;
    for (int j = 0; j < s; ++j) {
        const auto pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - j)));
        std::swap(idx[j], idx[pick]);
    }
    inst.planted = Vec::Zero(n);
    for (int j = 0; j < s; ++j) inst.planted[idx[j]] = rng.gaussian();

    Vec eps(m);
    for (int i = 0; i < m; ++i) eps[i] = rng.gaussian();
    inst.b = inst.a * inst.planted + 0.5 * eps;
    inst.problem = make_lasso(DesignMatrix::from_dense(inst.a), inst.b, delta);
    return inst;
}

struct QpInstance {
    Eigen::MatrixXd a;
    Vec b;
    Vec lo, hi;
    double ridge = 0.0;  // the random shift s in A = B^T B + s I
    ProblemInstance problem;
};

// A = B^T B + s I with B (m/2) x m Gaussian and s uniform on [0,1]; box
// [-1, 1]^m. B has deficient row rank, so lambda_min(A) = s exactly.
inline QpInstance gen_qp_instance(int m, std::uint64_t seed) {
    if (m <= 0 || m % 2 != 0) throw std::invalid_argument("gen_qp_instance: m must be positive even");
    Rng rng(seed);
    Eigen::MatrixXd bmat(m / 2, m);
    for (int i = 0; i < m / 2; ++i)
        for (int j = 0; j < m; ++j) bmat(i, j) = rng.gaussian();
    const double s = rng.uniform();
    QpInstance inst;
    inst.ridge = s;
    inst.a = bmat.transpose() * bmat;
    inst.a.diagonal().array() += s;
    inst.a = 0.5 * (inst.a + inst.a.transpose()).eval();  // scrub rounding asymmetry
    inst.b.resize(m);
    for (int i = 0; i < m; ++i) inst.b[i] = rng.gaussian();
    inst.lo = Vec::Constant(m, -1.0);
    inst.hi = Vec::Constant(m, 1.0);
    inst.problem = make_box_qp(DesignMatrix::from_dense(inst.a), inst.b, inst.lo, inst.hi);
    inst.problem.strong_convexity = s;
    return inst;
}

struct LogisticInstance {
    Eigen::MatrixXd features;
    Vec labels;
    double delta = 1e-2;
    Vec planted;
    ProblemInstance problem;
};

// Synthetic classification data: Gaussian features, labels from the sign of a
// noisy s-sparse linear score. Stands in for the LIBSVM datasets when none
// are on disk.
inline LogisticInstance gen_logistic_instance(int m, int n, int s, std::uint64_t seed,
                                              double delta = 1e-2) {
    if (m <= 0 || n <= 0 || s <= 0 || s > n)
        throw std::invalid_argument("gen_logistic_instance: need 0 < s <= n and m > 0");
    Rng rng(seed);
    LogisticInstance inst;
    inst.delta = delta;
    inst.features.resize(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) inst.features(i, j) = rng.gaussian();
    std::vector<int> idx(n);
    for (int j = 0; j < n; ++j) idx[j] = j;
    for (int j = 0; j < s; ++j) {
        const auto pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - j)));
        std::swap(idx[j], idx[pick]);
    }
    inst.planted = Vec::Zero(n);
    for (int j = 0; j < s; ++j) inst.planted[idx[j]] = rng.gaussian();
    inst.labels.resize(m);
    const Vec score = inst.features * inst.planted;
    for (int i = 0; i < m; ++i)
        inst.labels[i] = score[i] + 0.3 * rng.gaussian() >= 0.0 ? 1.0 : -1.0;
    inst.problem =
        make_logistic(DesignMatrix::from_dense(inst.features), inst.labels, delta);
    return inst;
}

}  // namespace ifb

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ifb/solver.hpp"

namespace ifb {

// Empirical decay model fitted to a trace: gap ~ C / k^p (power) or
// gap ~ C rho^k (linear).
struct RateFit {
    enum class Model { Power, Linear };
    Model model = Model::Power;
    double exponent_or_factor = 0.0;  // p-hat or rho-hat
    double r_squared = 0.0;
    long k_lo = 0, k_hi = 0;  // iteration window used
    long points = 0;
};

struct FStarEstimate {
    double value = 0.0;
    double error_bound = 0.0;
    bool converged = true;
};

// Reference optimum: one tight solve (tolerance 100x the caller's, by
// default) with the fast pow:0.5:0.5 schedule. The error bound combines a
// residual-squared bound with a tau-hat read conservatively off the trace
// tail, plus the float noise floor of the objective itself.
inline FStarEstimate estimate_fstar(const ProblemInstance& problem, const SolverOptions& opts,
                                    double tighten = 100.0) {
    SolverOptions tight = opts;
    tight.tol = opts.tol / tighten;
    tight.monitors = false;
    const Trace trace = run_ifb(problem, Schedule::power(0.5, 0.5), tight);
    if (trace.records.empty()) throw NumericFailure("estimate_fstar: empty reference trace");

    FStarEstimate est;
    est.value = trace.records.front().objective;
    for (const auto& r : trace.records) est.value = std::min(est.value, r.objective);

    const double lambda = tight.mu / problem.lipschitz;
    const std::size_t n = trace.records.size();
    const std::size_t tail_begin = n - std::max<std::size_t>(1, n / 10);
    double tau_hat = 1.0;
    for (std::size_t i = tail_begin; i < n; ++i) {
        const auto& r = trace.records[i];
        const double gap = r.objective - est.value;
        if (r.residual > 1e-300 && gap > 0.0)
            tau_hat = std::max(tau_hat, gap * lambda / (r.residual * r.residual));
    }
    const double res = trace.final_residual();
    est.error_bound = 2.0 * tau_hat / lambda * res * res +
                      16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(est.value));
    if (trace.status != SolveStatus::Converged) {
        est.converged = false;
        est.error_bound *= 100.0;
    }
    return est;
}

// Least-squares slope of log(gap) against log k (power model) or against k
// (linear model) over the last tail_fraction of usable records. Records whose
// gap sits below exclusion_multiplier times the f_star error band are dropped
// as floor-contaminated.
inline RateFit fit_rate(const Trace& trace, double f_star, RateFit::Model model,
                        double tail_fraction = 0.4, double exclusion_multiplier = 10.0,
                        double f_star_error = 0.0) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw std::invalid_argument("fit_rate: tail_fraction must be in (0,1]");
    const double floor = exclusion_multiplier * f_star_error;
    std::vector<std::pair<double, double>> usable;  // (k, gap)
    for (const auto& r : trace.records) {
        const double gap = r.objective - f_star;
        if (gap > floor && gap > 0.0) usable.emplace_back(static_cast<double>(r.k), gap);
    }
    const std::size_t n = usable.size();
    const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                       std::ceil(tail_fraction * static_cast<double>(n))));
    if (m < 30) throw InsufficientData("fit_rate: fewer than 30 usable points in the tail window");
    const std::size_t begin = n - m;

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = begin; i < n; ++i) {
        const double x = model == RateFit::Model::Power ? std::log(usable[i].first) : usable[i].first;
        const double y = std::log(usable[i].second);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double dm = static_cast<double>(m);
    const double denom = dm * sxx - sx * sx;
    if (denom <= 0.0) throw InsufficientData("fit_rate: degenerate abscissa");
    const double slope = (dm * sxy - sx * sy) / denom;
    const double ss_tot = syy - sy * sy / dm;
    const double ss_res = ss_tot - slope * (sxy - sx * sy / dm);
    RateFit fit;
    fit.model = model;
    fit.exponent_or_factor = model == RateFit::Model::Power ? -slope : std::exp(slope);
    fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    fit.k_lo = static_cast<long>(usable[begin].first);
    fit.k_hi = static_cast<long>(usable[n - 1].first);
    fit.points = static_cast<long>(m);
    return fit;
}

// Empirical error-bound constant: sample points at the given radius around a
// high-accuracy solution proxy and take the worst ratio
// ||x - x_ref|| / ||T_{1/L}(x) - x||. Uses x_ref as the projection proxy, an
// upper bound on dist(x, X*).
inline double probe_error_bound(const ProblemInstance& problem, const Vec& x_ref, int samples,
                                double radius, std::uint64_t seed = 0) {
    if (samples < 1) throw std::invalid_argument("probe_error_bound: samples must be >= 1");
    if (!(radius > 0.0)) throw std::invalid_argument("probe_error_bound: radius must be > 0");
    Rng rng(seed);
    const double inv_l = 1.0 / problem.lipschitz;
    double tau = 0.0;
    int used = 0;
    for (int i = 0; i < samples; ++i) {
        Vec dir(x_ref.size());
        for (Eigen::Index j = 0; j < dir.size(); ++j) dir[j] = rng.gaussian();
        const double dn = dir.norm();
        if (dn == 0.0) continue;
        const Vec x = x_ref + (radius / dn) * dir;
        const double res = forward_backward_map(problem, x, inv_l).residual_norm;
        if (res < 1e-14 * (1.0 + x.norm())) continue;  // indistinguishable from a solution
        tau = std::max(tau, (x - x_ref).norm() / res);
        ++used;
    }
    if (used == 0) throw InsufficientData("probe_error_bound: all samples skipped");
    return tau;
}

}  // namespace ifb

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ifb/problems.hpp"
#include "ifb/schedules.hpp"

namespace ifb {

enum class Termination { Subgradient, Residual };
enum class Modification { None, Gradient, Function, Both };

struct RestartRule {
    enum class Kind { None, Fixed, Adaptive };
    Kind kind = Kind::None;
    long period = 0;  // Fixed only

    static RestartRule none() { return {}; }
    static RestartRule fixed(long k) { return {Kind::Fixed, k}; }
    static RestartRule adaptive() { return {Kind::Adaptive, 0}; }
};

struct SolverOptions {
    double mu = 0.98;  // step fraction, lambda = mu / L_f
    double tol = 1e-8;
    long max_iter = 100000;
    Termination termination = Termination::Subgradient;
    Modification modification = Modification::None;
    RestartRule restart;
    bool monitors = false;  // per-iteration descent check + inertia-gap record
    std::optional<Vec> x0;

    void validate() const {
        if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("SolverOptions: mu must be in (0,1)");
        if (!(tol > 0.0)) throw std::invalid_argument("SolverOptions: tol must be > 0");
        if (max_iter < 1) throw std::invalid_argument("SolverOptions: max_iter must be >= 1");
        if (restart.kind == RestartRule::Kind::Fixed && restart.period < 1)
            throw std::invalid_argument("SolverOptions: fixed restart needs period >= 1");
    }
};

struct IterateRecord {
    long k = 0;
    double objective = 0.0;
    double residual = 0.0;  // termination-measure value at x_k
    double gamma = 0.0;     // weight used to form y_{k+1}
    double step_len = 0.0;  // ||x_k - x_{k-1}||
    bool modified = false;  // momentum zeroed this step
    std::int64_t wall_nanos = 0;
};

enum class SolveStatus { Converged, MaxIter, NumericFailure };

struct MonitorData {
    double max_descent_violation = 0.0;
    std::vector<double> inertia_gap;  // ||x_k - y_k|| per iteration
};

struct Trace {
    std::vector<IterateRecord> records;
    Vec final_x;
    SolveStatus status = SolveStatus::MaxIter;
    std::optional<MonitorData> monitor;

    long iterations() const { return static_cast<long>(records.size()); }
    double final_residual() const { return records.empty() ? 0.0 : records.back().residual; }
    double final_objective() const { return records.empty() ? 0.0 : records.back().objective; }
};

// Termination measure at x: the minimum-norm subgradient norm when the
// nonsmooth part supports it, otherwise the scaled proximal residual
// ||x - T_lambda(x)|| / lambda.
inline double termination_measure(const ProblemInstance& problem, const Vec& x, double lambda,
                                  Termination t) {
    if (t == Termination::Subgradient) return min_norm_subgradient(problem, x).second;
    return forward_backward_map(problem, x, lambda).residual_norm / lambda;
}

// Per-iteration descent check: returns max(0, lhs - rhs) of
//   F(x_new) + (1/2l)||x_new - x_prev||^2 + ((1-mu)/2l)||x_new - y||^2
//     <= F(x_prev) + (1/2l)||y - x_prev||^2,
// which is the one-step energy inequality with x = x_prev.
inline double monitor_descent(const ProblemInstance& problem, const Vec& x_prev, const Vec& y,
                              const Vec& x_new, double lambda, double mu) {
    const double lhs = problem.objective(x_new) + (x_new - x_prev).squaredNorm() / (2.0 * lambda) +
                       (1.0 - mu) * (x_new - y).squaredNorm() / (2.0 * lambda);
    const double rhs = problem.objective(x_prev) + (y - x_prev).squaredNorm() / (2.0 * lambda);
    return std::max(0.0, lhs - rhs);
}

namespace detail {

enum class Engine { Ifb, AdapM, Restart };

inline Trace run_engine(const ProblemInstance& problem, Schedule schedule,
                        const SolverOptions& opts, Engine engine) {
    opts.validate();
    const double lambda = opts.mu / problem.lipschitz;
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::steady_clock::now() - t_start)
            .count();
    };

    Trace trace;
    if (opts.monitors) trace.monitor.emplace();

    Vec x_prev = opts.x0 ? *opts.x0 : Vec(Vec::Zero(problem.dimension));
    if (x_prev.size() != problem.dimension)
        throw std::invalid_argument("run: x0 dimension mismatch");
    Vec y = x_prev;
    double f_prev = problem.objective(x_prev);
    double t_restart = 1.0;  // local t recursion for the restart engine

    const bool want_grad_test = engine != Engine::Ifb &&
                                (engine == Engine::Restart
                                     ? opts.modification != Modification::Function
                                     : (opts.modification == Modification::Gradient ||
                                        opts.modification == Modification::Both));
    const bool want_func_test = engine != Engine::Ifb &&
                                (opts.modification == Modification::Function ||
                                 opts.modification == Modification::Both);

    for (long k = 1; k <= opts.max_iter; ++k) {
        Vec grad;
        try {
            grad = problem.smooth_gradient(y);
        } catch (const NumericFailure&) {
            trace.status = SolveStatus::NumericFailure;
            trace.final_x = x_prev;
            return trace;
        }
        if (!grad.allFinite()) {
            trace.status = SolveStatus::NumericFailure;
            trace.final_x = x_prev;
            return trace;
        }
        Vec x = problem.prox(y - lambda * grad, lambda);
        const double fx = problem.objective(x);
        if (!x.allFinite() || !std::isfinite(fx)) {
            trace.status = SolveStatus::NumericFailure;
            trace.final_x = x_prev;
            return trace;
        }

        const double residual = termination_measure(problem, x, lambda, opts.termination);
        const double step_len = (x - x_prev).norm();

        if (trace.monitor) {
            trace.monitor->max_descent_violation =
                std::max(trace.monitor->max_descent_violation,
                         monitor_descent(problem, x_prev, y, x, lambda, opts.mu));
            trace.monitor->inertia_gap.push_back((x - y).norm());
        }

        // Momentum for the next step. The adaptive-modification tests use
        // strict inequalities; ties keep the momentum.
        bool fired = false;
        if (want_grad_test && (y - x).dot(x - x_prev) > 0.0) fired = true;
        if (!fired && want_func_test && fx > f_prev) fired = true;

        double gamma;
        if (engine == Engine::Restart) {
            if (opts.restart.kind == RestartRule::Kind::Fixed && k % opts.restart.period == 0)
                t_restart = 1.0;
            else if (opts.restart.kind == RestartRule::Kind::Adaptive && fired)
                t_restart = 1.0;
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_restart * t_restart));
            gamma = (t_restart - 1.0) / t_next;
            t_restart = t_next;
        } else if (engine == Engine::AdapM && fired) {
            gamma = 0.0;  // t_k keeps advancing; only this step's momentum is dropped
        } else {
            gamma = schedule.gamma(k);
        }

        trace.records.push_back({k, fx, residual, gamma, step_len,
                                 engine == Engine::AdapM && fired, elapsed()});

        if (residual < opts.tol) {
            trace.status = SolveStatus::Converged;
            trace.final_x = x;
            return trace;
        }

        y = x + gamma * (x - x_prev);
        x_prev = std::move(x);
        f_prev = fx;
    }
    trace.status = SolveStatus::MaxIter;
    trace.final_x = x_prev;
    return trace;
}

}  // namespace detail

// Algorithm: x_k = T_lambda(y_k), y_{k+1} = x_k + gamma_k (x_k - x_{k-1}),
// gamma_k = (t_k - 1)/t_{k+1}, lambda = mu/L_f, y_1 = x_0.
inline Trace run_ifb(const ProblemInstance& problem, const Schedule& schedule,
                     const SolverOptions& opts) {
    if (schedule.kind() == ScheduleKind::ConstantBeta && !problem.strong_convexity)
        throw std::invalid_argument("run_ifb: constant-beta schedule needs strong_convexity");
    return detail::run_engine(problem, schedule, opts, detail::Engine::Ifb);
}

// Adaptive modification: gamma_k is zeroed for one step when the gradient
// test (y_k - x_k)^T (x_k - x_{k-1}) > 0 or the function test
// F(x_k) > F(x_{k-1}) fires (per opts.modification), while the t_k counter
// keeps advancing. This is what separates it from restarting.
inline Trace run_ifb_adapm(const ProblemInstance& problem, const Schedule& schedule,
                           const SolverOptions& opts) {
    if (opts.modification == Modification::None)
        throw std::invalid_argument("run_ifb_adapm: pick a modification scheme");
    return detail::run_engine(problem, schedule, opts, detail::Engine::AdapM);
}

// FISTA with a restart scheme: the t recursion is reset to 1 (and momentum
// dropped) every fixed period, or whenever the adaptive test fires.
inline Trace run_fista_restart(const ProblemInstance& problem, const SolverOptions& opts) {
    if (opts.restart.kind == RestartRule::Kind::None)
        throw std::invalid_argument("run_fista_restart: restart rule required");
    return detail::run_engine(problem, Schedule::fista(), opts, detail::Engine::Restart);
}

struct LyapunovSeries {
    std::vector<double> energy;  // E_k for k = 1..N
    long onset = -1;             // first k with no later violation; -1 if none
};

// E_k = s_{k+1}^2 (F(x_k) - F*) + s_k^2/(2 lambda) ||x_k - x_{k-1}||^2 from a
// recorded trace. The monotonicity onset allows a per-step band of
// f_star_error * s_{k+2}^2 (the energy uncertainty induced by the F* estimate)
// plus float slack.
inline LyapunovSeries lyapunov_series(const Trace& trace, const ComparisonSeq& comparison,
                                      double f_star, double lambda, double f_star_error = 0.0) {
    if (trace.records.empty()) throw std::invalid_argument("lyapunov_series: empty trace");
    double f_min = trace.records.front().objective;
    for (const auto& r : trace.records) f_min = std::min(f_min, r.objective);
    if (f_star > f_min + 1e-9 * (1.0 + std::abs(f_min)))
        throw std::invalid_argument("lyapunov_series: f_star above observed minimum");

    LyapunovSeries out;
    const long n = static_cast<long>(trace.records.size());
    out.energy.reserve(static_cast<std::size_t>(n));
    for (long k = 1; k <= n; ++k) {
        const auto& r = trace.records[static_cast<std::size_t>(k - 1)];
        const double sk = comparison.s(k);
        const double sk1 = comparison.s(k + 1);
        out.energy.push_back(sk1 * sk1 * (r.objective - f_star) +
                             sk * sk * r.step_len * r.step_len / (2.0 * lambda));
    }
    long last_violation = 0;
    for (long k = 1; k < n; ++k) {
        const double ek = out.energy[static_cast<std::size_t>(k - 1)];
        const double ek1 = out.energy[static_cast<std::size_t>(k)];
        const double sk2 = comparison.s(k + 2);
        const double band = f_star_error * sk2 * sk2 +
                            1e-12 * std::max({std::abs(ek), std::abs(ek1), 1.0});
        if (ek1 > ek + band) last_violation = k;
    }
    out.onset = last_violation + 1;
    if (last_violation >= n - 1) out.onset = -1;  // nonincreasing nowhere
    return out;
}

}  // namespace ifb

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ifb/problems.hpp"
#include "ifb/schedules.hpp"

namespace ifb {

struct DiagnosticResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace diag {

inline DiagnosticResult make(const std::string& name, bool pass, const std::string& detail = "") {
    return {name, pass, detail};
}

// Largest k in [start, k_max] with alpha_k < gamma_k, plus one; start itself
// if the scan is clean.
inline long dominance_onset(const Schedule& sched, const ComparisonSeq& seq, long start,
                            long k_max) {
    long last_violation = start - 1;
    for (long k = start; k <= k_max; ++k)
        if (seq.alpha(k) < sched.gamma(k)) last_violation = k;
    return last_violation + 1;
}

}  // namespace diag

// Schedule limits (Assumption A2), Nesterov-rule scans, gamma -> 1 checks and
// alpha-dominance scans for the six default-parameter cases.
inline std::vector<DiagnosticResult> run_schedule_diagnostics(long k_probe = 1000000,
                                                              long scan_max = 100000) {
    std::vector<DiagnosticResult> out;
    struct CaseSpec {
        Schedule sched;
        ComparisonSeq seq;
        double sigma, c_expected;
    };
    const std::vector<CaseSpec> cases = {
        {Schedule::exponential(0.5), ComparisonSeq::case1(0.5), 0.5, 0.5},
        {Schedule::power(8.0, 4.0), ComparisonSeq::case2(8.0, 4.0), 1.0, 8.0},
        {Schedule::power(0.5, 0.5), ComparisonSeq::case3(2.0), 1.0, 0.5},
        {Schedule::log_poly(1.0), ComparisonSeq::case4(2.0), 1.0, 1.0},
        {Schedule::fista(), ComparisonSeq::case5(), 1.0, 1.0},
        {Schedule::fista_cd(4.0), ComparisonSeq::case6(4.0), 1.0, 1.0},
    };

    for (const auto& cs : cases) {
        const std::string tag = cs.sched.name();
        const auto a2 = check_assumption_a2(cs.sched, cs.sigma, k_probe);
        std::ostringstream d;
        d << "estimate " << a2.c << ", expected " << cs.c_expected;
        out.push_back(diag::make("a2 limit " + tag,
                                 std::abs(a2.c - cs.c_expected) <= 0.01 * cs.c_expected,
                                 d.str()));

        const double g = cs.sched.gamma(k_probe);
        out.push_back(diag::make("gamma limit " + tag, g > 0.99 && g < 1.0,
                                 "gamma(" + std::to_string(k_probe) + ") = " + std::to_string(g)));

        const long onset = diag::dominance_onset(cs.sched, cs.seq, 1, scan_max);
        out.push_back(diag::make("alpha dominance " + tag, onset <= scan_max / 2,
                                 "onset k = " + std::to_string(onset)));

        // Lemma 2.4 conclusions on the comparison sequence
        const bool growing = cs.seq.log_s(100000) > cs.seq.log_s(1000) &&
                             cs.seq.log_s(1000) > cs.seq.log_s(10);
        const double ratio = cs.seq.growth_ratio(100000);
        out.push_back(diag::make("s_k growth " + tag, growing));
        std::ostringstream rd;
        rd << "(s_{k+1}^2 - s_k^2)/s_k^2 = " << ratio << " at k = 1e5";
        out.push_back(diag::make("s_k ratio " + tag, ratio < 1e-3, rd.str()));
    }

    // Nesterov rule
    out.push_back(diag::make("nesterov fista", !check_nesterov_rule(Schedule::fista(), 10000)));
    out.push_back(
        diag::make("nesterov fista_cd:4", !check_nesterov_rule(Schedule::fista_cd(4.0), 100000)));
    const auto pow_violation = check_nesterov_rule(Schedule::power(8.0, 4.0), 10000);
    out.push_back(diag::make("nesterov pow:8:4 violated", pow_violation.has_value(),
                             pow_violation ? "first violation k = " + std::to_string(*pow_violation)
                                           : "no violation found"));

    // FistaClassic identities
    {
        const Schedule f = Schedule::fista();
        bool exact = true;
        for (long k = 1; k <= 1000; ++k) {
            const double tk = f.t_value(k), tk1 = f.t_value(k + 1);
            if (std::abs(tk * tk - (tk1 * tk1 - tk1)) > 1e-12 * std::max(1.0, tk * tk))
                exact = false;
        }
        out.push_back(diag::make("fista recursion identity", exact));
        const double ratio = f.t_value(10000) / 10000.0;
        out.push_back(diag::make("fista t_k/k -> 1/2", std::abs(ratio - 0.5) <= 0.005,
                                 "t_k/k = " + std::to_string(ratio) + " at k = 1e4"));
    }

    // Case 6, a = 1: alpha_k = gamma_k exactly
    {
        const Schedule s = Schedule::fista_cd(1.0);
        const ComparisonSeq c = ComparisonSeq::case6(1.0);
        double worst = 0.0;
        for (long k = 1; k <= 10000; ++k)
            worst = std::max(worst, std::abs(c.alpha(k) - s.gamma(k)));
        out.push_back(diag::make("case6 a=1 alpha == gamma", worst <= 1e-12,
                                 "max |alpha - gamma| = " + std::to_string(worst)));
    }

    return out;
}

// Non-expansiveness of both prox operators and the residual monotonicity of
// T_lambda in lambda, sampled on a small random LASSO instance.
inline std::vector<DiagnosticResult> run_prox_diagnostics(std::uint64_t seed = 7,
                                                          int samples = 1000) {
    std::vector<DiagnosticResult> out;
    Rng rng(seed);
    const int n = 8;

    double worst_soft = 0.0, worst_box = 0.0;
    const Vec lo = Vec::Constant(n, -1.0), hi = Vec::Constant(n, 1.0);
    for (int i = 0; i < samples; ++i) {
        Vec u(n), v(n);
        for (int j = 0; j < n; ++j) {
            u[j] = 3.0 * rng.gaussian();
            v[j] = 3.0 * rng.gaussian();
        }
        const double t = 2.0 * rng.uniform() + 1e-6;
        worst_soft = std::max(worst_soft, (soft_threshold(u, t) - soft_threshold(v, t)).norm() -
                                              (u - v).norm());
        worst_box =
            std::max(worst_box, (project_box(u, lo, hi) - project_box(v, lo, hi)).norm() -
                                    (u - v).norm());
    }
    out.push_back(diag::make("soft_threshold non-expansive", worst_soft <= 1e-12));
    out.push_back(diag::make("project_box non-expansive", worst_box <= 1e-12));

    const auto inst = gen_lasso_instance(12, n, 3, seed);
    double worst_up = 0.0, worst_down = 0.0;
    for (int i = 0; i < samples; ++i) {
        Vec x(n);
        for (int j = 0; j < n; ++j) x[j] = 2.0 * rng.gaussian();
        const double l2 = (0.9 * rng.uniform() + 0.05) / inst.problem.lipschitz;
        const double l1 = l2 * (1.0 + 3.0 * rng.uniform());
        const double r1 = forward_backward_map(inst.problem, x, l1).residual_norm;
        const double r2 = forward_backward_map(inst.problem, x, l2).residual_norm;
        worst_up = std::max(worst_up, r2 - r1);            // ||T_l1 x - x|| >= ||T_l2 x - x||
        worst_down = std::max(worst_down, r1 / l1 - r2 / l2);  // scaled residual decreasing
    }
    out.push_back(diag::make("residual monotone in lambda", worst_up <= 1e-10));
    out.push_back(diag::make("scaled residual antitone in lambda", worst_down <= 1e-10));
    return out;
}

}  // namespace ifb

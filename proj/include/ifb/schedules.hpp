#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ifb/errors.hpp"

namespace ifb {

enum class ScheduleKind { Exp, Power, LogPoly, FistaClassic, FistaCd, ConstantBeta, NoInertia };

// Momentum schedule: a rule for t_k with t_1 = 1 and the inertia weight
// gamma_k = (t_k - 1) / t_{k+1}, plus the two baselines that bypass t_k
// (a constant beta and no inertia at all).
//
// The exponential kind works in the exponent domain throughout: t_value
// refuses to materialize e^{(k-1)^alpha} once it exceeds double range, while
// gamma stays well-defined for every k as
//   gamma_k = exp((k-1)^alpha - k^alpha) - exp(-k^alpha).
class Schedule {
public:
    static Schedule exponential(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("Schedule: exp alpha must be in (0,1)");
        return Schedule(ScheduleKind::Exp, alpha, 0.0);
    }
    static Schedule power(double r, double a) {
        if (!(r > 0.0) || !(a > 0.0))
            throw std::invalid_argument("Schedule: pow needs r > 0 and a > 0");
        return Schedule(ScheduleKind::Power, r, a);
    }
    static Schedule log_poly(double theta) {
        if (!(theta > 0.0)) throw std::invalid_argument("Schedule: logpoly theta must be > 0");
        return Schedule(ScheduleKind::LogPoly, theta, 0.0);
    }
    static Schedule fista() { return Schedule(ScheduleKind::FistaClassic, 0.0, 0.0); }
    static Schedule fista_cd(double a) {
        if (!(a > 0.0)) throw std::invalid_argument("Schedule: fista_cd a must be > 0");
        return Schedule(ScheduleKind::FistaCd, a, 0.0);
    }
    static Schedule constant_beta(double beta) {
        if (!(beta >= 0.0 && beta < 1.0))
            throw std::invalid_argument("Schedule: const beta must be in [0,1)");
        return Schedule(ScheduleKind::ConstantBeta, beta, 0.0);
    }
    static Schedule no_inertia() { return Schedule(ScheduleKind::NoInertia, 0.0, 0.0); }

    ScheduleKind kind() const { return kind_; }
    double param_a() const { return pa_; }
    double param_b() const { return pb_; }

    bool t_based() const {
        return kind_ != ScheduleKind::ConstantBeta && kind_ != ScheduleKind::NoInertia;
    }

    double t_value(long k) const {
        require_t_based("t_value");
        if (k < 1) throw std::invalid_argument("t_value: k must be >= 1");
        switch (kind_) {
            case ScheduleKind::Exp: {
                const double e = std::pow(static_cast<double>(k - 1), pa_);
                if (e > 709.0)
                    throw std::range_error(
                        "t_value: e^{(k-1)^alpha} overflows double; use gamma() instead");
                return std::exp(e);
            }
            case ScheduleKind::Power:
                return (std::pow(static_cast<double>(k), pa_) - 1.0 + pb_) / pb_;
            case ScheduleKind::LogPoly:
                if (k == 1) return 1.0;
                return static_cast<double>(k) / std::pow(std::log(static_cast<double>(k)), pa_);
            case ScheduleKind::FistaClassic:
                ensure_fista(k);
                return fista_t_[static_cast<std::size_t>(k - 1)];
            case ScheduleKind::FistaCd:
                return (static_cast<double>(k) - 1.0 + pa_) / pa_;
            default:
                return 1.0;  // unreachable
        }
    }

    double gamma(long k) const {
        if (k < 1) throw std::invalid_argument("gamma: k must be >= 1");
        switch (kind_) {
            case ScheduleKind::ConstantBeta:
                return pa_;
            case ScheduleKind::NoInertia:
                return 0.0;
            case ScheduleKind::Exp: {
                const double ek = std::pow(static_cast<double>(k), pa_);
                const double ekm1 = std::pow(static_cast<double>(k - 1), pa_);
                return std::exp(ekm1 - ek) - std::exp(-ek);
            }
            case ScheduleKind::FistaCd:
                return (static_cast<double>(k) - 1.0) / (static_cast<double>(k) + pa_);
            default:
                return (t_value(k) - 1.0) / t_value(k + 1);
        }
    }

    // t_{k+1}/t_k - 1, evaluated without cancellation where the direct form
    // would lose digits.
    double t_ratio_minus_one(long k) const {
        require_t_based("t_ratio_minus_one");
        if (k < 1) throw std::invalid_argument("t_ratio_minus_one: k must be >= 1");
        switch (kind_) {
            case ScheduleKind::Exp:
                return std::expm1(std::pow(static_cast<double>(k), pa_) -
                                  std::pow(static_cast<double>(k - 1), pa_));
            case ScheduleKind::Power: {
                const double kr = std::pow(static_cast<double>(k), pa_);
                return (std::pow(static_cast<double>(k + 1), pa_) - kr) / (kr - 1.0 + pb_);
            }
            case ScheduleKind::FistaCd:
                return 1.0 / (static_cast<double>(k) - 1.0 + pa_);
            default:
                return (t_value(k + 1) - t_value(k)) / t_value(k);
        }
    }

    std::string name() const {
        std::ostringstream os;
        switch (kind_) {
            case ScheduleKind::Exp: os << "exp:" << pa_; break;
            case ScheduleKind::Power: os << "pow:" << pa_ << ":" << pb_; break;
            case ScheduleKind::LogPoly: os << "logpoly:" << pa_; break;
            case ScheduleKind::FistaClassic: os << "fista"; break;
            case ScheduleKind::FistaCd: os << "fista_cd:" << pa_; break;
            case ScheduleKind::ConstantBeta: os << "const:" << pa_; break;
            case ScheduleKind::NoInertia: os << "none"; break;
        }
        return os.str();
    }

private:
    Schedule(ScheduleKind k, double a, double b) : kind_(k), pa_(a), pb_(b) {}

    void require_t_based(const char* who) const {
        if (!t_based())
            throw std::logic_error(std::string(who) + ": schedule kind has no t sequence");
    }

    void ensure_fista(long k) const {
        if (fista_t_.empty()) fista_t_.push_back(1.0);
        while (static_cast<long>(fista_t_.size()) < k) {
            const double t = fista_t_.back();
            fista_t_.push_back(0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)));
        }
    }

    ScheduleKind kind_;
    double pa_, pb_;
    mutable std::vector<double> fista_t_;
};

// Parse the schedule grammar used by config files and the CLI:
//   exp:ALPHA | pow:R:A | logpoly:THETA | fista | fista_cd:A | const:BETA | none
inline Schedule schedule_from_string(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    auto num = [&](std::size_t i) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(parts.at(i), &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("schedule_from_string: bad number in '" + text + "'");
        }
        if (pos != parts[i].size())
            throw std::invalid_argument("schedule_from_string: bad number in '" + text + "'");
        return v;
    };
    const std::string& head = parts[0];
    if (head == "fista" && parts.size() == 1) return Schedule::fista();
    if (head == "none" && parts.size() == 1) return Schedule::no_inertia();
    if (head == "exp" && parts.size() == 2) return Schedule::exponential(num(1));
    if (head == "pow" && parts.size() == 3) return Schedule::power(num(1), num(2));
    if (head == "logpoly" && parts.size() == 2) return Schedule::log_poly(num(1));
    if (head == "fista_cd" && parts.size() == 2) return Schedule::fista_cd(num(1));
    if (head == "const" && parts.size() == 2) return Schedule::constant_beta(num(1));
    throw std::invalid_argument("schedule_from_string: unknown schedule '" + text + "'");
}

// First k in [1, k_max] violating the Nesterov rule
// t_k^2 - t_{k+1}^2 + t_{k+1} >= 0, or nullopt. The slack is 1e-9 relative to
// the magnitude of the squared terms: FISTA satisfies the rule with exact
// equality, so an absolute slack would flag pure rounding noise once t_k^2
// outgrows 1e9.
inline std::optional<long> check_nesterov_rule(const Schedule& s, long k_max) {
    if (k_max < 2) throw std::invalid_argument("check_nesterov_rule: k_max must be >= 2");
    for (long k = 1; k <= k_max; ++k) {
        const double tk = s.t_value(k);
        const double tk1 = s.t_value(k + 1);
        if (tk * tk - tk1 * tk1 + tk1 < -1e-9 * std::max(1.0, tk1 * tk1)) return k;
    }
    return std::nullopt;
}

struct A2Estimate {
    double c = 0.0;                                  // extrapolated limit
    bool converged = false;                          // successive extrapolants Cauchy within 1%
    std::vector<std::pair<long, double>> ladder;     // (k, k^sigma (t_{k+1}/t_k - 1))
};

// Probe lim k^sigma (t_{k+1}/t_k - 1) on a geometric ladder k = 1e3, 1e4, ...
// up to k_probe, extrapolating linearly in 1/ln k. The limit itself is a
// hypothesis, not a computable object; the converged flag reports whether the
// extrapolants settled to 1%.
inline A2Estimate check_assumption_a2(const Schedule& s, double sigma, long k_probe) {
    if (!(sigma > 0.0 && sigma <= 1.0))
        throw std::invalid_argument("check_assumption_a2: sigma must be in (0,1]");
    if (k_probe < 1000) throw std::invalid_argument("check_assumption_a2: k_probe must be >= 1e3");
    A2Estimate est;
    for (long k = 1000; k <= k_probe; k *= 10) {
        const double h = std::pow(static_cast<double>(k), sigma) * s.t_ratio_minus_one(k);
        est.ladder.emplace_back(k, h);
    }
    auto extrapolant = [&](std::size_t i) {
        // linear in u = 1/ln k through points i-1, i, evaluated at u = 0
        const double u0 = 1.0 / std::log(static_cast<double>(est.ladder[i - 1].first));
        const double u1 = 1.0 / std::log(static_cast<double>(est.ladder[i].first));
        const double h0 = est.ladder[i - 1].second;
        const double h1 = est.ladder[i].second;
        return h1 - u1 * (h0 - h1) / (u0 - u1);
    };
    const std::size_t m = est.ladder.size();
    if (m < 2) {
        est.c = est.ladder.back().second;
        return est;
    }
    est.c = extrapolant(m - 1);
    if (m >= 3) {
        const double prev = extrapolant(m - 2);
        est.converged = std::abs(est.c - prev) <= 0.01 * std::max(std::abs(est.c), 1e-300);
    }
    return est;
}

// Comparison sequence s_k with alpha_k = (s_k - 1)/s_{k+1}, one construction
// per schedule case. Values are kept in the log domain so the exponential
// construction stays evaluable at large k.
class ComparisonSeq {
public:
    enum class Case { ExpT, PowerT, PowerLowP, LogPolyP, FistaIntegral, FistaCdPoly };

    // Case 1: s_k = t_k = e^{(k-1)^alpha}
    static ComparisonSeq case1(double alpha) { return ComparisonSeq(Case::ExpT, alpha, 0.0); }
    // Case 2 (r > 1): s_k = t_k = (k^r - 1 + a)/a
    static ComparisonSeq case2(double r, double a) { return ComparisonSeq(Case::PowerT, r, a); }
    // Case 3 (r < 1): s_1 = 1, s_k = (k-1)^p
    static ComparisonSeq case3(double p) { return ComparisonSeq(Case::PowerLowP, p, 0.0); }
    // Case 4: s_k = k^p, p >= 2
    static ComparisonSeq case4(double p) { return ComparisonSeq(Case::LogPolyP, p, 0.0); }
    // Case 5: s_1 = s_2 = 1, s_k = (k-1)^3 / (int_1^{k-1} ln x / x^2 dx)^2
    static ComparisonSeq case5() { return ComparisonSeq(Case::FistaIntegral, 0.0, 0.0); }
    // Case 6: a >= 1: s_k = (k+a-1)^{a+1};
    //         a <  1: s_1 = s_2 = 1, s_k = (k+a-1)^{a+1} / int_1^{k-1} ln x / x^{1+a} dx
    static ComparisonSeq case6(double a) { return ComparisonSeq(Case::FistaCdPoly, a, 0.0); }

    Case case_id() const { return case_; }

    double log_s(long k) const {
        if (k < 1) throw std::invalid_argument("ComparisonSeq: k must be >= 1");
        if (case_ == Case::ExpT) return std::pow(static_cast<double>(k) - 1.0, pa_);
        return std::log(s(k));
    }

    double s(long k) const {
        if (k < 1) throw std::invalid_argument("ComparisonSeq: k must be >= 1");
        const double kd = static_cast<double>(k);
        switch (case_) {
            case Case::ExpT:
                return std::exp(std::pow(kd - 1.0, pa_));
            case Case::PowerT:
                return (std::pow(kd, pa_) - 1.0 + pb_) / pb_;
            case Case::PowerLowP:
                return k == 1 ? 1.0 : std::pow(kd - 1.0, pa_);
            case Case::LogPolyP:
                return std::pow(kd, pa_);
            case Case::FistaIntegral: {
                if (k <= 2) return 1.0;
                const double w = log_weight_int(kd - 1.0, 1.0);
                return std::pow(kd - 1.0, 3.0) / (w * w);
            }
            case Case::FistaCdPoly: {
                if (pa_ >= 1.0) return std::pow(kd + pa_ - 1.0, pa_ + 1.0);
                if (k <= 2) return 1.0;
                return std::pow(kd + pa_ - 1.0, pa_ + 1.0) / log_weight_int(kd - 1.0, pa_);
            }
        }
        return 1.0;  // unreachable
    }

    // alpha_k = (s_k - 1)/s_{k+1}, in the exponent domain for the
    // exponential construction (bitwise consistent with Schedule::gamma)
    // and directly otherwise.
    double alpha(long k) const {
        if (case_ == Case::ExpT) {
            const double lsk = log_s(k);
            const double lsk1 = log_s(k + 1);
            return std::exp(lsk - lsk1) - std::exp(-lsk1);
        }
        return (s(k) - 1.0) / s(k + 1);
    }

    // (s_{k+1}^2 - s_k^2) / s_k^2
    double growth_ratio(long k) const { return std::expm1(2.0 * (log_s(k + 1) - log_s(k))); }

private:
    ComparisonSeq(Case c, double a, double b) : case_(c), pa_(a), pb_(b) {}

    // int_1^K ln x / x^{1+a} dx by exact antiderivative; a = 1 gives
    // 1 - (1 + ln K)/K.
    static double log_weight_int(double upper, double a) {
        const double ka = std::pow(upper, a);
        return 1.0 / (a * a) - std::log(upper) / (a * ka) - 1.0 / (a * a * ka);
    }

    Case case_;
    double pa_, pb_;
};

inline double comparison_alpha(const ComparisonSeq& c, long k) { return c.alpha(k); }

}  // namespace ifb

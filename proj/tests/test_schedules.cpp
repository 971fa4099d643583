#include <catch2/catch_amalgamated.hpp>

#include "ifb/diagnostics.hpp"
#include "ifb/schedules.hpp"
#include "oracles.hpp"

using namespace ifb;

TEST_CASE("t_value closed forms") {
    const Schedule fista = Schedule::fista();
    CHECK(fista.t_value(1) == 1.0);
    CHECK(fista.t_value(2) == Catch::Approx(0.5 * (1.0 + std::sqrt(5.0))).epsilon(1e-15));

    CHECK(Schedule::fista_cd(4.0).t_value(5) == 2.0);

    // t_k / k -> 1/2
    CHECK(fista.t_value(10000) / 10000.0 == Catch::Approx(0.5).epsilon(0.01));

    CHECK(Schedule::power(2.0, 3.0).t_value(4) == Catch::Approx((16.0 - 1.0 + 3.0) / 3.0));
    CHECK(Schedule::log_poly(1.0).t_value(1) == 1.0);
    CHECK(Schedule::log_poly(1.0).t_value(2) == Catch::Approx(2.0 / std::log(2.0)));
    CHECK(Schedule::exponential(0.5).t_value(1) == 1.0);
    CHECK(Schedule::exponential(0.5).t_value(2) == Catch::Approx(std::exp(1.0)));
}

TEST_CASE("t_value domain errors") {
    CHECK_THROWS_AS(Schedule::fista().t_value(0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::exponential(0.5).t_value(1000000), std::range_error);
    CHECK_THROWS_AS(Schedule::constant_beta(0.5).t_value(3), std::logic_error);
    CHECK_THROWS_AS(Schedule::no_inertia().t_value(3), std::logic_error);
}

TEST_CASE("schedule constructor guards") {
    CHECK_THROWS_AS(Schedule::exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::exponential(1.0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::power(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::power(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::log_poly(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::fista_cd(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::constant_beta(1.0), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::constant_beta(-0.1), std::invalid_argument);
}

TEST_CASE("gamma closed forms") {
    // t_1 = 1 gives gamma_1 = 0 for every t-based kind
    CHECK(Schedule::fista().gamma(1) == 0.0);
    CHECK(Schedule::fista_cd(4.0).gamma(1) == 0.0);
    CHECK(Schedule::power(8.0, 4.0).gamma(1) == 0.0);
    CHECK(Schedule::log_poly(1.0).gamma(1) == 0.0);
    CHECK(Schedule::exponential(0.5).gamma(1) == 0.0);

    CHECK(Schedule::fista_cd(4.0).gamma(5) == 4.0 / 9.0);
    CHECK(Schedule::constant_beta(0.3).gamma(17) == 0.3);
    CHECK(Schedule::no_inertia().gamma(17) == 0.0);
}

TEST_CASE("gamma exp stable path matches extended precision") {
    const Schedule s = Schedule::exponential(0.5);
    for (long k : {1000L, 10000L, 100000L, 1000000L}) {
        const double ref = static_cast<double>(oracles::exp_gamma_reference(k, 0.5L));
        CHECK(std::abs(s.gamma(k) - ref) <= 1e-12 * ref);
    }
    // also exercise an alpha away from 1/2
    const Schedule s7 = Schedule::exponential(0.7);
    for (long k : {1000L, 1000000L}) {
        const double ref = static_cast<double>(oracles::exp_gamma_reference(k, 0.7L));
        CHECK(std::abs(s7.gamma(k) - ref) <= 1e-12 * ref);
    }
}

TEST_CASE("gamma stays in [0,1) and tends to 1") {
    const std::vector<Schedule> kinds = {
        Schedule::exponential(0.5), Schedule::power(8.0, 4.0), Schedule::power(0.5, 0.5),
        Schedule::log_poly(1.0),    Schedule::fista(),         Schedule::fista_cd(4.0)};
    for (const auto& s : kinds) {
        INFO(s.name());
        for (long k = 1; k <= 2000; ++k) {
            const double g = s.gamma(k);
            CHECK(g >= 0.0);
            CHECK(g < 1.0);
        }
        const double tail = s.gamma(1000000);
        CHECK(tail > 0.99);
        CHECK(tail < 1.0);
    }
}

TEST_CASE("fista gamma expansion 1 - 3/k") {
    const Schedule f = Schedule::fista();
    for (long k : {10000L, 100000L}) {
        const double kd = static_cast<double>(k);
        const double residual = std::abs(f.gamma(k) - (1.0 - 3.0 / kd));
        CHECK(residual <= 3.0 * std::log(kd) / (kd * kd));
    }
}

TEST_CASE("power r<1 gamma expansion 1 - a/k^r") {
    const Schedule s = Schedule::power(0.5, 0.5);
    const double k = 1e6;
    CHECK(std::pow(k, 0.5) * (1.0 - s.gamma(1000000)) == Catch::Approx(0.5).epsilon(0.01));
}

TEST_CASE("nesterov rule scans") {
    CHECK(!check_nesterov_rule(Schedule::fista(), 10000));
    CHECK(!check_nesterov_rule(Schedule::fista_cd(4.0), 100000));
    const auto v = check_nesterov_rule(Schedule::power(8.0, 4.0), 10000);
    REQUIRE(v.has_value());
    CHECK(*v == 1);  // t_2 = 64.75 already breaks the rule
    CHECK_THROWS_AS(check_nesterov_rule(Schedule::fista(), 1), std::invalid_argument);
}

TEST_CASE("assumption A2 limits") {
    struct Row {
        Schedule s;
        double sigma, c;
    };
    const std::vector<Row> rows = {
        {Schedule::exponential(0.5), 0.5, 0.5}, {Schedule::power(8.0, 4.0), 1.0, 8.0},
        {Schedule::power(0.5, 0.5), 1.0, 0.5},  {Schedule::log_poly(1.0), 1.0, 1.0},
        {Schedule::fista(), 1.0, 1.0},          {Schedule::fista_cd(4.0), 1.0, 1.0}};
    for (const auto& row : rows) {
        const auto est = check_assumption_a2(row.s, row.sigma, 1000000);
        INFO(row.s.name() << " estimate " << est.c);
        CHECK(est.converged);
        CHECK(est.c == Catch::Approx(row.c).epsilon(0.01));
    }
    CHECK_THROWS_AS(check_assumption_a2(Schedule::fista(), 0.0, 1000000), std::invalid_argument);
    CHECK_THROWS_AS(check_assumption_a2(Schedule::fista(), 1.5, 1000000), std::invalid_argument);
    CHECK_THROWS_AS(check_assumption_a2(Schedule::fista(), 1.0, 100), std::invalid_argument);
}

TEST_CASE("schedule string grammar") {
    CHECK(schedule_from_string("fista").kind() == ScheduleKind::FistaClassic);
    CHECK(schedule_from_string("none").kind() == ScheduleKind::NoInertia);
    const Schedule e = schedule_from_string("exp:0.5");
    CHECK(e.kind() == ScheduleKind::Exp);
    CHECK(e.param_a() == 0.5);
    const Schedule p = schedule_from_string("pow:8:4");
    CHECK(p.kind() == ScheduleKind::Power);
    CHECK(p.param_a() == 8.0);
    CHECK(p.param_b() == 4.0);
    CHECK(schedule_from_string("logpoly:1").param_a() == 1.0);
    CHECK(schedule_from_string("fista_cd:4").param_a() == 4.0);
    CHECK(schedule_from_string("const:0.25").param_a() == 0.25);

    // name() round-trips through the grammar
    for (const char* text : {"exp:0.5", "pow:8:4", "pow:0.5:0.5", "logpoly:1", "fista",
                             "fista_cd:4", "const:0.25", "none"}) {
        const Schedule s = schedule_from_string(text);
        const Schedule again = schedule_from_string(s.name());
        CHECK(again.kind() == s.kind());
        CHECK(again.param_a() == s.param_a());
        CHECK(again.param_b() == s.param_b());
    }

    CHECK_THROWS_AS(schedule_from_string(""), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_string("exp"), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_string("pow:2"), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_string("exp:abc"), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_string("exp:0.5:1"), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_string("momentum:3"), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_string("const:1.5"), std::invalid_argument);
}

TEST_CASE("comparison sequences basics") {
    // Case 6, a = 1: alpha_k = (k^2 - 1)/(k+1)^2 = gamma_k exactly
    const ComparisonSeq c6 = ComparisonSeq::case6(1.0);
    const Schedule cd1 = Schedule::fista_cd(1.0);
    for (long k = 1; k <= 10000; ++k) {
        const double kd = static_cast<double>(k);
        const double closed = (kd * kd - 1.0) / ((kd + 1.0) * (kd + 1.0));
        CHECK(std::abs(c6.alpha(k) - closed) <= 1e-12);
        CHECK(std::abs(c6.alpha(k) - cd1.gamma(k)) <= 1e-12);
    }

    // int_1^K ln x / x^2 dx -> 1, so case-5 s_k ~ (k-1)^3
    const ComparisonSeq c5 = ComparisonSeq::case5();
    CHECK(c5.s(1) == 1.0);
    CHECK(c5.s(2) == 1.0);
    const double k = 1e6;
    CHECK(c5.s(1000000) / std::pow(k - 1.0, 3.0) == Catch::Approx(1.0).margin(1e-4));

    CHECK(ComparisonSeq::case3(2.0).s(1) == 1.0);
    CHECK(ComparisonSeq::case3(2.0).s(5) == 16.0);
    CHECK(ComparisonSeq::case4(2.0).s(7) == 49.0);
    CHECK(ComparisonSeq::case6(4.0).s(2) == std::pow(5.0, 5.0));
    CHECK_THROWS_AS(c5.s(0), std::invalid_argument);
    CHECK_THROWS_AS(c5.alpha(0), std::invalid_argument);
}

TEST_CASE("comparison sequences grow and alpha dominates gamma") {
    struct Row {
        Schedule s;
        ComparisonSeq c;
    };
    const std::vector<Row> rows = {
        {Schedule::exponential(0.5), ComparisonSeq::case1(0.5)},
        {Schedule::power(8.0, 4.0), ComparisonSeq::case2(8.0, 4.0)},
        {Schedule::power(0.5, 0.5), ComparisonSeq::case3(2.0)},
        {Schedule::log_poly(1.0), ComparisonSeq::case4(2.0)},
        {Schedule::fista(), ComparisonSeq::case5()},
        {Schedule::fista_cd(4.0), ComparisonSeq::case6(4.0)}};
    for (const auto& row : rows) {
        INFO(row.s.name());
        CHECK(row.c.log_s(100000) > row.c.log_s(1000));
        CHECK(row.c.log_s(1000) > row.c.log_s(10));
        const long onset = diag::dominance_onset(row.s, row.c, 1, 100000);
        INFO("onset " << onset);
        CHECK(onset <= 50000);
        for (long k = onset; k <= onset + 200; ++k) CHECK(row.c.alpha(k) >= row.s.gamma(k));
    }
    // cases where s_k = t_k dominate trivially: alpha == gamma bitwise
    CHECK(ComparisonSeq::case1(0.5).alpha(12345) == Schedule::exponential(0.5).gamma(12345));
    CHECK(ComparisonSeq::case2(8.0, 4.0).alpha(12345) == Schedule::power(8.0, 4.0).gamma(12345));
}

TEST_CASE("comparison growth ratio at 1e5") {
    // (s_{k+1}^2 - s_k^2)/s_k^2 at k = 1e5 per construction. The polynomial
    // constructions sit comfortably below 1e-3; the exponential one cannot:
    // its exact value is expm1(2(sqrt(1e5) - sqrt(1e5 - 1))) ~ 3.17e-3.
    CHECK(ComparisonSeq::case2(8.0, 4.0).growth_ratio(100000) < 1e-3);
    CHECK(ComparisonSeq::case3(2.0).growth_ratio(100000) < 1e-3);
    CHECK(ComparisonSeq::case4(2.0).growth_ratio(100000) < 1e-3);
    CHECK(ComparisonSeq::case5().growth_ratio(100000) < 1e-3);
    CHECK(ComparisonSeq::case6(4.0).growth_ratio(100000) < 1e-3);

    const double exp_ratio = ComparisonSeq::case1(0.5).growth_ratio(100000);
    CHECK(exp_ratio == Catch::Approx(3.167e-3).epsilon(0.01));
    CHECK(exp_ratio > 1e-3);  // intrinsic to s_k = e^{(k-1)^{1/2}}; see decision log
}

TEST_CASE("fista recursion identity") {
    const Schedule f = Schedule::fista();
    for (long k = 1; k <= 2000; ++k) {
        const double tk = f.t_value(k);
        const double tk1 = f.t_value(k + 1);
        CHECK(std::abs(tk * tk - (tk1 * tk1 - tk1)) <= 1e-12 * std::max(1.0, tk * tk));
    }
}

TEST_CASE("schedule diagnostics pass except the exponential growth ratio") {
    const auto results = run_schedule_diagnostics();
    for (const auto& r : results) {
        INFO(r.name << " " << r.detail);
        if (r.name == "s_k ratio exp:0.5")
            CHECK_FALSE(r.pass);  // known analytic failure of the 1e-3 bound
        else
            CHECK(r.pass);
    }
}

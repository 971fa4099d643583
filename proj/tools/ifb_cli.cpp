// ifb command-line front end: instance generation, single solves, schedule
// benchmarks, rate fitting on stored traces, and the property-check suite.
//
// Exit codes: 0 success, 1 check-suite failure, 2 usage, 3 parse, 4 numeric,
// 5 I/O.

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <thread>

#include "ifb/analysis.hpp"
#include "ifb/diagnostics.hpp"
#include "ifb/io.hpp"
#include "ifb/problems.hpp"
#include "ifb/solver.hpp"

namespace fs = std::filesystem;
using namespace ifb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitIo = 5;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

long to_long(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": bad integer '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument(what + ": bad integer '" + s + "'");
    return v;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": bad number '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument(what + ": bad number '" + s + "'");
    return v;
}

// Dataset paths resolve against the current directory first, then the
// IFB_DATA_DIR environment variable.
std::string resolve_data_path(const std::string& path) {
    if (fs::exists(path)) return path;
    if (const char* dir = std::getenv("IFB_DATA_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    throw IoError("dataset not found (checked cwd and IFB_DATA_DIR)", path);
}

// Problem grammar: lasso:M:N:S | qp:M | logistic:M:N:S | libsvm:PATH |
// instance:PATH. Synthetic kinds draw from the run seed.
ProblemInstance make_problem(const std::string& spec, std::uint64_t seed, double delta) {
    const auto head_end = spec.find(':');
    const std::string head = spec.substr(0, head_end);
    const std::string rest = head_end == std::string::npos ? "" : spec.substr(head_end + 1);
    if (head == "lasso" || head == "logistic") {
        const auto p = split(rest, ':');
        if (p.size() != 3) throw std::invalid_argument("problem: " + head + " needs M:N:S");
        const long m = to_long(p[0], "problem"), n = to_long(p[1], "problem"),
                   s = to_long(p[2], "problem");
        if (head == "lasso")
            return gen_lasso_instance(static_cast<int>(m), static_cast<int>(n),
                                      static_cast<int>(s), seed, delta)
                .problem;
        return gen_logistic_instance(static_cast<int>(m), static_cast<int>(n),
                                     static_cast<int>(s), seed, delta)
            .problem;
    }
    if (head == "qp") {
        if (rest.empty() || rest.find(':') != std::string::npos)
            throw std::invalid_argument("problem: qp needs a single size M");
        return gen_qp_instance(static_cast<int>(to_long(rest, "problem")), seed).problem;
    }
    if (head == "libsvm") {
        if (rest.empty()) throw std::invalid_argument("problem: libsvm needs a path");
        const LibsvmData data = parse_libsvm(resolve_data_path(rest));
        std::cerr << "loaded " << data.features.rows() << " x " << data.features.cols()
                  << " dataset (" << data.label_note << ")\n";
        return make_logistic(data.features, data.labels, delta);
    }
    if (head == "instance") {
        if (rest.empty()) throw std::invalid_argument("problem: instance needs a path");
        return read_instance(resolve_data_path(rest)).problem;
    }
    throw std::invalid_argument("problem: unknown kind '" + head + "'");
}

struct RunOutcome {
    Trace trace;
    double mu;
};

// One (problem, schedule, algorithm) run driven by a RunConfig.
RunOutcome execute(const RunConfig& cfg, const std::optional<Vec>& x0) {
    if (cfg.problem.empty()) throw std::invalid_argument("no problem specified");
    const ProblemInstance problem = make_problem(cfg.problem, cfg.seed, cfg.delta);

    SolverOptions opts;
    opts.mu = cfg.mu;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    opts.x0 = x0;

    RunOutcome out{{}, cfg.mu};
    if (cfg.algo == "ifb" || cfg.algo == "fb") {
        const Schedule sched =
            cfg.algo == "fb" ? Schedule::no_inertia() : schedule_from_string(cfg.schedule);
        out.trace = run_ifb(problem, sched, opts);
    } else if (cfg.algo == "adapm") {
        if (cfg.scheme == "gradient")
            opts.modification = Modification::Gradient;
        else if (cfg.scheme == "function")
            opts.modification = Modification::Function;
        else if (cfg.scheme == "both")
            opts.modification = Modification::Both;
        else
            throw std::invalid_argument("scheme: expected gradient|function|both");
        out.trace = run_ifb_adapm(problem, schedule_from_string(cfg.schedule), opts);
    } else if (cfg.algo == "restart") {
        if (cfg.restart == "adaptive")
            opts.restart = RestartRule::adaptive();
        else if (cfg.restart.rfind("fixed:", 0) == 0)
            opts.restart = RestartRule::fixed(to_long(cfg.restart.substr(6), "restart"));
        else
            throw std::invalid_argument("restart: expected adaptive or fixed:K");
        out.trace = run_fista_restart(problem, opts);
    } else {
        throw std::invalid_argument("algo: expected ifb|adapm|restart|fb");
    }
    return out;
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIter: return "max_iter";
        default: return "numeric_failure";
    }
}

int cmd_gen(const std::string& kind, int m, int n, int s, std::uint64_t seed, double delta,
            const std::string& out_path) {
    nlohmann::json j;
    if (kind == "lasso") {
        const auto inst = gen_lasso_instance(m, n, s, seed, delta);
        j = {{"kind", "lasso"}, {"a", mat_to_json(inst.a)}, {"b", vec_to_json(inst.b)},
             {"delta", inst.delta}, {"seed", seed}, {"planted", vec_to_json(inst.planted)}};
    } else if (kind == "qp") {
        const auto inst = gen_qp_instance(m, seed);
        j = {{"kind", "qp"}, {"a", mat_to_json(inst.a)}, {"b", vec_to_json(inst.b)},
             {"lo", vec_to_json(inst.lo)}, {"hi", vec_to_json(inst.hi)}, {"seed", seed}};
    } else if (kind == "logistic") {
        const auto inst = gen_logistic_instance(m, n, s, seed, delta);
        j = {{"kind", "logistic"}, {"features", mat_to_json(inst.features)},
             {"labels", vec_to_json(inst.labels)}, {"delta", inst.delta}, {"seed", seed}};
    } else {
        throw std::invalid_argument("gen: kind must be lasso|qp|logistic");
    }
    write_instance(j, out_path);
    std::cout << "wrote " << kind << " instance to " << out_path << "\n";
    return kExitOk;
}

int cmd_solve(const RunConfig& cfg, const std::optional<Vec>& x0) {
    const RunOutcome out = execute(cfg, x0);
    const Trace& t = out.trace;
    std::cout << "status      " << status_name(t.status) << "\n"
              << "iterations  " << t.iterations() << "\n"
              << "objective   " << format_g17(t.final_objective()) << "\n"
              << "residual    " << format_g17(t.final_residual()) << "\n";
    if (!cfg.output.empty()) {
        const TraceFormat fmt = cfg.format == "jsonl" ? TraceFormat::JsonLines : TraceFormat::Csv;
        if (cfg.format != "csv" && cfg.format != "jsonl")
            throw std::invalid_argument("format: expected csv or jsonl");
        write_trace(t, cfg.output, fmt);
        std::cout << "trace       " << cfg.output << "\n";
    }
    return t.status == SolveStatus::NumericFailure ? kExitNumeric : kExitOk;
}

struct BenchCell {
    std::string schedule;
    std::uint64_t seed = 0;
    long iterations = 0;
    double objective = 0.0, residual = 0.0;
    SolveStatus status = SolveStatus::MaxIter;
};

int cmd_bench(const RunConfig& base, const std::vector<std::string>& schedules,
              const std::vector<std::uint64_t>& seeds, int jobs, const std::string& csv_path) {
    std::vector<BenchCell> cells;
    for (const auto& s : schedules)
        for (std::uint64_t seed : seeds) cells.push_back({s, seed});

    // validate schedule strings up front so workers can't throw
    for (const auto& s : schedules)
        if (s != "restart" && s != "fb") (void)schedule_from_string(s);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            BenchCell& cell = cells[i];
            RunConfig cfg = base;
            cfg.seed = cell.seed;
            cfg.output.clear();
            if (cell.schedule == "restart") {
                cfg.algo = "restart";
            } else if (cell.schedule == "fb") {
                cfg.algo = "fb";
            } else {
                cfg.schedule = cell.schedule;
            }
            try {
                const Trace t = execute(cfg, std::nullopt).trace;
                cell.iterations = t.iterations();
                cell.objective = t.final_objective();
                cell.residual = t.final_residual();
                cell.status = t.status;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("bench cell failed: " + first_error);

    // single collector writes everything in deterministic order
    std::cout << std::left << std::setw(14) << "schedule" << std::right << std::setw(8) << "seed"
              << std::setw(12) << "iters" << std::setw(16) << "residual" << std::setw(24)
              << "objective" << "  status\n";
    for (const auto& c : cells) {
        std::ostringstream res, obj;
        res << std::scientific << std::setprecision(3) << c.residual;
        obj << std::setprecision(12) << c.objective;
        std::cout << std::left << std::setw(14) << c.schedule << std::right << std::setw(8)
                  << c.seed << std::setw(12) << c.iterations << std::setw(16) << res.str()
                  << std::setw(24) << obj.str() << "  " << status_name(c.status) << "\n";
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw IoError("bench: cannot open for writing", csv_path);
        out << "schedule,seed,iterations,residual,objective,status\n";
        for (const auto& c : cells)
            out << c.schedule << ',' << c.seed << ',' << c.iterations << ','
                << format_g17(c.residual) << ',' << format_g17(c.objective) << ','
                << status_name(c.status) << '\n';
        if (!out) throw IoError("bench: write failed", csv_path);
    }
    const bool any_numeric = std::any_of(cells.begin(), cells.end(), [](const BenchCell& c) {
        return c.status == SolveStatus::NumericFailure;
    });
    return any_numeric ? kExitNumeric : kExitOk;
}

int cmd_rates(const std::vector<std::string>& traces, double f_star, double f_star_error,
              const std::string& model_name, double tail_fraction) {
    const RateFit::Model model =
        model_name == "linear" ? RateFit::Model::Linear : RateFit::Model::Power;
    if (model_name != "power" && model_name != "linear")
        throw std::invalid_argument("model: expected power or linear");
    std::cout << std::left << std::setw(32) << "trace" << std::right << std::setw(12)
              << (model == RateFit::Model::Power ? "p_hat" : "rho_hat") << std::setw(12) << "r2"
              << std::setw(10) << "k_lo" << std::setw(10) << "k_hi" << std::setw(10)
              << "points\n";
    for (const auto& path : traces) {
        const Trace t = read_trace_csv(path);
        const RateFit fit = fit_rate(t, f_star, model, tail_fraction, 10.0, f_star_error);
        std::ostringstream v, r2;
        v << std::setprecision(5) << fit.exponent_or_factor;
        r2 << std::setprecision(5) << fit.r_squared;
        std::cout << std::left << std::setw(32) << path << std::right << std::setw(12) << v.str()
                  << std::setw(12) << r2.str() << std::setw(10) << fit.k_lo << std::setw(10)
                  << fit.k_hi << std::setw(10) << fit.points << "\n";
    }
    return kExitOk;
}

int cmd_check() {
    auto results = run_prox_diagnostics();
    auto sched = run_schedule_diagnostics();
    results.insert(results.end(), sched.begin(), sched.end());
    int failures = 0;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
        std::cout << "\n";
        if (!r.pass) ++failures;
    }
    std::cout << results.size() - failures << "/" << results.size() << " checks passed\n";
    return failures == 0 ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inertial forward-backward solvers for composite problems"};
    app.require_subcommand(1);

    // ---- gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic instance file");
    std::string gen_kind = "lasso", gen_out = "instance.json";
    int gen_m = 100, gen_n = 256, gen_s = 10;
    std::uint64_t gen_seed = 1;
    double gen_delta = 1.0;
    gen->add_option("--kind", gen_kind, "lasso|qp|logistic");
    gen->add_option("--m", gen_m, "rows / qp size");
    gen->add_option("--n", gen_n, "columns");
    gen->add_option("--s", gen_s, "planted sparsity");
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--delta", gen_delta, "l1 weight");
    gen->add_option("--out", gen_out, "output path");

    // ---- solve
    auto* solve = app.add_subcommand("solve", "run one solver configuration");
    std::string cfg_path, solve_x0;
    RunConfig scfg;
    std::string s_problem, s_schedule, s_algo, s_scheme, s_restart, s_output, s_format;
    double s_mu = 0.0, s_tol = 0.0, s_delta = 0.0;
    long s_max_iter = 0;
    std::uint64_t s_seed = 0;
    solve->add_option("--config", cfg_path, "key = value config file (flags override)");
    auto* o_problem = solve->add_option("--problem", s_problem,
                                       "lasso:M:N:S | qp:M | logistic:M:N:S | libsvm:PATH | "
                                       "instance:PATH");
    auto* o_schedule = solve->add_option("--schedule", s_schedule,
                                        "exp:A | pow:R:A | logpoly:T | fista | fista_cd:A | "
                                        "const:B | none");
    auto* o_algo = solve->add_option("--algo", s_algo, "ifb|adapm|restart|fb");
    auto* o_scheme = solve->add_option("--scheme", s_scheme, "adapm test: gradient|function|both");
    auto* o_restart = solve->add_option("--restart", s_restart, "restart rule: adaptive|fixed:K");
    auto* o_mu = solve->add_option("--mu", s_mu, "step fraction in (0,1)");
    auto* o_tol = solve->add_option("--tol", s_tol, "termination tolerance");
    auto* o_max_iter = solve->add_option("--max-iter", s_max_iter, "iteration cap");
    auto* o_seed = solve->add_option("--seed", s_seed, "instance seed");
    auto* o_delta = solve->add_option("--delta", s_delta, "l1 weight");
    auto* o_output = solve->add_option("--output", s_output, "trace output path");
    auto* o_format = solve->add_option("--format", s_format, "trace format: csv|jsonl");
    solve->add_option("--x0", solve_x0, "initial point, comma-separated values");

    // ---- bench
    auto* bench = app.add_subcommand("bench", "schedule x seed benchmark grid");
    std::string b_problem, b_schedules = "fista,fista_cd:4,pow:8:4,pow:0.5:0.5,exp:0.5";
    std::string b_seeds = "1,2,3,4,5,6,7,8,9,10", b_csv;
    double b_mu = 0.98, b_tol = 1e-6, b_delta = 1.0;
    long b_max_iter = 100000;
    int b_jobs = 1;
    bench->add_option("--problem", b_problem, "problem family (seed varies per cell)")
        ->required();
    bench->add_option("--schedules", b_schedules,
                      "comma-separated schedule strings (plus 'restart', 'fb')");
    bench->add_option("--seeds", b_seeds, "comma-separated seed list");
    bench->add_option("--mu", b_mu, "step fraction");
    bench->add_option("--tol", b_tol, "termination tolerance");
    bench->add_option("--max-iter", b_max_iter, "iteration cap");
    bench->add_option("--delta", b_delta, "l1 weight");
    bench->add_option("--jobs", b_jobs, "worker threads");
    bench->add_option("--csv", b_csv, "also write the summary table as CSV");

    // ---- rates
    auto* rates = app.add_subcommand("rates", "fit decay rates to stored traces");
    std::vector<std::string> r_traces;
    double r_fstar = 0.0, r_fstar_error = 0.0, r_tail = 0.4;
    std::string r_model = "power";
    rates->add_option("--trace", r_traces, "trace CSV path (repeatable)")->required();
    rates->add_option("--fstar", r_fstar, "reference optimal value")->required();
    rates->add_option("--fstar-error", r_fstar_error, "error bound on fstar");
    rates->add_option("--model", r_model, "power|linear");
    rates->add_option("--tail", r_tail, "tail fraction used for the fit");

    // ---- check
    app.add_subcommand("check", "run the property-diagnostic suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_kind, gen_m, gen_n, gen_s, gen_seed, gen_delta,
                                          gen_out);
        if (solve->parsed()) {
            if (!cfg_path.empty()) scfg = RunConfig::parse_file(cfg_path);
            if (o_problem->count()) scfg.problem = s_problem;
            if (o_schedule->count()) scfg.schedule = s_schedule;
            if (o_algo->count()) scfg.algo = s_algo;
            if (o_scheme->count()) scfg.scheme = s_scheme;
            if (o_restart->count()) scfg.restart = s_restart;
            if (o_mu->count()) scfg.mu = s_mu;
            if (o_tol->count()) scfg.tol = s_tol;
            if (o_max_iter->count()) scfg.max_iter = s_max_iter;
            if (o_seed->count()) scfg.seed = s_seed;
            if (o_delta->count()) scfg.delta = s_delta;
            if (o_output->count()) scfg.output = s_output;
            if (o_format->count()) scfg.format = s_format;
            std::optional<Vec> x0;
            if (!solve_x0.empty()) {
                const auto parts = split(solve_x0, ',');
                Vec v(static_cast<Eigen::Index>(parts.size()));
                for (std::size_t i = 0; i < parts.size(); ++i)
                    v[static_cast<Eigen::Index>(i)] = to_double(parts[i], "x0");
                x0 = std::move(v);
            }
            return cmd_solve(scfg, x0);
        }
        if (bench->parsed()) {
            RunConfig base;
            base.problem = b_problem;
            base.mu = b_mu;
            base.tol = b_tol;
            base.max_iter = b_max_iter;
            base.delta = b_delta;
            std::vector<std::uint64_t> seeds;
            for (const auto& s : split(b_seeds, ','))
                seeds.push_back(static_cast<std::uint64_t>(to_long(s, "seeds")));
            return cmd_bench(base, split(b_schedules, ','), seeds, b_jobs, b_csv);
        }
        if (rates->parsed()) return cmd_rates(r_traces, r_fstar, r_fstar_error, r_model, r_tail);
        return cmd_check();
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const InsufficientData& e) {
        std::cerr << "insufficient data: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

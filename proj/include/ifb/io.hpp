#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifb/problems.hpp"
#include "ifb/solver.hpp"

namespace ifb {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct LibsvmData {
    DesignMatrix features;  // sparse, width = max feature index seen
    Vec labels;             // mapped to {-1, +1}
    std::string label_note;  // how raw labels were mapped
};

// LIBSVM text format: each nonempty line is "LABEL idx:val idx:val ..." with
// 1-based strictly increasing indices. Any positive label maps to +1,
// anything else to -1.
inline LibsvmData parse_libsvm(std::istream& in) {
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> labels;
    Eigen::Index max_col = 0;
    std::string line;
    long line_no = 0;
    bool saw_positive = false, saw_nonpositive = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank line
        std::size_t pos = 0;
        double raw = 0.0;
        try {
            raw = std::stod(tok, &pos);
        } catch (const std::exception&) {
            throw ParseError("parse_libsvm: bad label '" + tok + "'", line_no);
        }
        if (pos != tok.size()) throw ParseError("parse_libsvm: bad label '" + tok + "'", line_no);
        (raw > 0.0 ? saw_positive : saw_nonpositive) = true;
        labels.push_back(raw > 0.0 ? 1.0 : -1.0);

        long prev_idx = 0;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
                throw ParseError("parse_libsvm: malformed token '" + tok + "'", line_no);
            long idx = 0;
            double val = 0.0;
            try {
                std::size_t p1 = 0, p2 = 0;
                idx = std::stol(tok.substr(0, colon), &p1);
                val = std::stod(tok.substr(colon + 1), &p2);
                if (p1 != colon || p2 != tok.size() - colon - 1) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError("parse_libsvm: malformed token '" + tok + "'", line_no);
            }
            if (idx <= 0) throw ParseError("parse_libsvm: nonpositive feature index", line_no);
            if (idx <= prev_idx)
                throw ParseError("parse_libsvm: feature indices must be strictly increasing",
                                 line_no);
            prev_idx = idx;
            max_col = std::max<Eigen::Index>(max_col, idx);
            triplets.emplace_back(static_cast<int>(labels.size()) - 1, static_cast<int>(idx - 1),
                                  val);
        }
    }
    DesignMatrix::Sparse m(static_cast<Eigen::Index>(labels.size()), max_col);
    m.setFromTriplets(triplets.begin(), triplets.end());
    LibsvmData out{DesignMatrix::from_sparse(std::move(m)),
                   Eigen::Map<Vec>(labels.data(), static_cast<Eigen::Index>(labels.size())), ""};
    out.label_note = std::string("labels > 0 -> +1, others -> -1") +
                     (saw_positive && saw_nonpositive ? "" : " (single class in file)");
    return out;
}

inline LibsvmData parse_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("parse_libsvm: cannot open", path);
    return parse_libsvm(in);
}

enum class TraceFormat { Csv, JsonLines };

// Persist a trace. CSV columns are fixed:
// k,objective,gap,residual,gamma,step_len,modified,wall_nanos with gap left
// blank unless f_star is supplied. All scalars carry 17 significant digits.
inline void write_trace(const Trace& trace, const std::string& path, TraceFormat format,
                        std::optional<double> f_star = std::nullopt) {
    std::ofstream out(path);
    if (!out) throw IoError("write_trace: cannot open for writing", path);
    if (format == TraceFormat::Csv) {
        out << "k,objective,gap,residual,gamma,step_len,modified,wall_nanos\n";
        for (const auto& r : trace.records) {
            out << r.k << ',' << format_g17(r.objective) << ',';
            if (f_star) out << format_g17(r.objective - *f_star);
            out << ',' << format_g17(r.residual) << ',' << format_g17(r.gamma) << ','
                << format_g17(r.step_len) << ',' << (r.modified ? 1 : 0) << ',' << r.wall_nanos
                << '\n';
        }
    } else {
        for (const auto& r : trace.records) {
            nlohmann::json j{{"k", r.k},
                             {"objective", r.objective},
                             {"residual", r.residual},
                             {"gamma", r.gamma},
                             {"step_len", r.step_len},
                             {"modified", r.modified},
                             {"wall_nanos", r.wall_nanos}};
            if (f_star) j["gap"] = r.objective - *f_star;
            out << j.dump() << '\n';
        }
    }
    if (!out) throw IoError("write_trace: write failed", path);
}

// Read back a CSV trace (records only; final_x and status are not persisted).
inline Trace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_trace_csv: cannot open", path);
    Trace trace;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line.rfind("k,objective,", 0) != 0)
                throw ParseError("read_trace_csv: bad header", line_no);
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        cells.push_back(cur);
        if (cells.size() != 8) throw ParseError("read_trace_csv: expected 8 columns", line_no);
        try {
            IterateRecord r;
            r.k = std::stol(cells[0]);
            r.objective = std::stod(cells[1]);
            r.residual = std::stod(cells[3]);
            r.gamma = std::stod(cells[4]);
            r.step_len = std::stod(cells[5]);
            r.modified = std::stol(cells[6]) != 0;
            r.wall_nanos = std::stoll(cells[7]);
            trace.records.push_back(r);
        } catch (const std::exception&) {
            throw ParseError("read_trace_csv: bad cell", line_no);
        }
    }
    trace.status = SolveStatus::MaxIter;
    return trace;
}

// ---------------------------------------------------------------------------
// Instance files (JSON): enough raw data to rebuild the ProblemInstance.

inline nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vec vec_from_json(const nlohmann::json& a) {
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

inline nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd mat_from_json(const nlohmann::json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != c)
            throw std::invalid_argument("mat_from_json: ragged rows");
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

struct StoredInstance {
    std::string kind;  // lasso | qp | logistic
    ProblemInstance problem;
    nlohmann::json raw;
};

inline void write_instance(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_instance: cannot open for writing", path);
    out << j.dump() << '\n';
    if (!out) throw IoError("write_instance: write failed", path);
}

inline StoredInstance read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_instance: cannot open", path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("read_instance: ") + e.what(), 0);
    }
    StoredInstance s;
    s.kind = j.at("kind").get<std::string>();
    s.raw = j;
    if (s.kind == "lasso") {
        s.problem = make_lasso(DesignMatrix::from_dense(mat_from_json(j.at("a"))),
                               vec_from_json(j.at("b")), j.at("delta").get<double>());
    } else if (s.kind == "qp") {
        s.problem = make_box_qp(DesignMatrix::from_dense(mat_from_json(j.at("a"))),
                                vec_from_json(j.at("b")), vec_from_json(j.at("lo")),
                                vec_from_json(j.at("hi")));
    } else if (s.kind == "logistic") {
        s.problem = make_logistic(DesignMatrix::from_dense(mat_from_json(j.at("features"))),
                                  vec_from_json(j.at("labels")), j.at("delta").get<double>());
    } else {
        throw std::invalid_argument("read_instance: unknown kind '" + s.kind + "'");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Flat key = value run configuration. Unknown keys are rejected; CLI flags
// override file values.

struct RunConfig {
    std::string problem;   // e.g. lasso:100:256:10, qp:200, libsvm:PATH, instance:PATH
    std::string schedule = "fista";
    std::string algo = "ifb";  // ifb | adapm | restart | fb
    std::string scheme = "gradient";   // adapm: gradient | function | both
    std::string restart = "adaptive";  // restart algo: fixed:K | adaptive
    double mu = 0.98;
    double tol = 1e-8;
    long max_iter = 100000;
    std::uint64_t seed = 1;
    double delta = 1.0;
    std::string output;  // trace path
    std::string format = "csv";

    static RunConfig parse(std::istream& in) {
        RunConfig c;
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                if (b == std::string::npos) return std::string();
                const auto e = s.find_last_not_of(" \t\r");
                return s.substr(b, e - b + 1);
            };
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("RunConfig: expected key = value", line_no);
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            try {
                if (key == "problem") c.problem = val;
                else if (key == "schedule") c.schedule = val;
                else if (key == "algo") c.algo = val;
                else if (key == "scheme") c.scheme = val;
                else if (key == "restart") c.restart = val;
                else if (key == "mu") c.mu = std::stod(val);
                else if (key == "tol") c.tol = std::stod(val);
                else if (key == "max_iter") c.max_iter = std::stol(val);
                else if (key == "seed") c.seed = std::stoull(val);
                else if (key == "delta") c.delta = std::stod(val);
                else if (key == "output") c.output = val;
                else if (key == "format") c.format = val;
                else throw ParseError("RunConfig: unknown key '" + key + "'", line_no);
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception&) {
                throw ParseError("RunConfig: bad value for '" + key + "'", line_no);
            }
        }
        return c;
    }

    static RunConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("RunConfig: cannot open", path);
        return parse(in);
    }

    std::string serialize() const {
        std::ostringstream os;
        os << "problem = " << problem << '\n'
           << "schedule = " << schedule << '\n'
           << "algo = " << algo << '\n'
           << "scheme = " << scheme << '\n'
           << "restart = " << restart << '\n'
           << "mu = " << format_g17(mu) << '\n'
           << "tol = " << format_g17(tol) << '\n'
           << "max_iter = " << max_iter << '\n'
           << "seed = " << seed << '\n'
           << "delta = " << format_g17(delta) << '\n'
           << "output = " << output << '\n'
           << "format = " << format << '\n';
        return os.str();
    }

    bool operator==(const RunConfig&) const = default;
};

}  // namespace ifb

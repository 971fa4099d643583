#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace ifb {

// Thrown when an iterative routine produced non-finite values or failed to
// converge within its cap. Carries the best estimate available at the time.
class NumericFailure : public std::runtime_error {
public:
    explicit NumericFailure(const std::string& what,
                            double best = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), best_estimate(best) {}

    double best_estimate;
};

class UnsupportedOperation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Text-format parse failure, with the 1-based line it occurred on.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long line_number)
        : std::runtime_error(what + " (line " + std::to_string(line_number) + ")"),
          line(line_number) {}

    long line;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what, const std::string& file_path)
        : std::runtime_error(what + ": " + file_path), path(file_path) {}

    std::string path;
};

}  // namespace ifb

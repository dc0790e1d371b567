#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace causal_audit {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration (bad ScmConfig field, bad CLI/RunConfig value). Maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// CSV header problems: missing or unknown columns.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Row-level CSV problem; carries the 1-based data row index.
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

// Duplicate ids and similar dataset integrity violations.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Empty inputs, degenerate statistics (zero variance, absent group).
class DomainError : public Error {
public:
    using Error::Error;
};

// Dimension mismatch between a model and the data it is applied to.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Optimizer failed to converge; carries the last iterate on the original scale.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate,
                     double gradient_norm)
        : Error(what), last_iterate_(std::move(last_iterate)), gradient_norm_(gradient_norm) {}
    const std::vector<double>& last_iterate() const { return last_iterate_; }
    double gradient_norm() const { return gradient_norm_; }

private:
    std::vector<double> last_iterate_;
    double gradient_norm_;
};

// Propensity score of exactly 0 or 1 without clipping; carries offending row indices.
class PositivityError : public Error {
public:
    PositivityError(const std::string& what, std::vector<std::size_t> rows)
        : Error(what), rows_(std::move(rows)) {}
    const std::vector<std::size_t>& rows() const { return rows_; }

private:
    std::vector<std::size_t> rows_;
};

// Rank-deficient design matrix; names the dependent column.
class CollinearityError : public Error {
public:
    CollinearityError(const std::string& what, std::string column)
        : Error(what), column_(std::move(column)) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

// Estimation-level failures: degenerate groups, unstable bootstrap.
class EstimationError : public Error {
public:
    using Error::Error;
};

// Training diverged; message carries the last finite state description.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, int epochs_run, double last_finite_loss)
        : Error(what), epochs_run_(epochs_run), last_finite_loss_(last_finite_loss) {}
    int epochs_run() const { return epochs_run_; }
    double last_finite_loss() const { return last_finite_loss_; }

private:
    int epochs_run_;
    double last_finite_loss_;
};

}  // namespace causal_audit

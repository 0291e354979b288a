#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace greenbvp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: odd grid, wrong dimensions, negative weights, bad ids.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// |a2(t_i)| fell below the singularity threshold.
class SingularCoefficient : public Error {
public:
    using Error::Error;
};

/// The fundamental system lost linear independence during integration.
class DegenerateWronskian : public Error {
public:
    using Error::Error;
};

/// The completely homogeneous reduced problem has a nontrivial solution.
class IncompatibleProblem : public Error {
public:
    IncompatibleProblem(const std::string& what, double determinant)
        : Error(what), determinant_(determinant) {}

    double determinant() const noexcept { return determinant_; }

private:
    double determinant_;
};

/// An existence/contraction condition required by an operation does not hold.
class ConditionViolation : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration ran out of iterations or produced non-finite values.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::vector<double> increments)
        : Error(what), increments_(std::move(increments)) {}

    const std::vector<double>& increments() const noexcept { return increments_; }

private:
    std::vector<double> increments_;
};

}  // namespace greenbvp
